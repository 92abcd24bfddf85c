#include "stlcbf/stl/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stlcbf::stl {

namespace {
constexpr double kTol = 1e-9;
}

std::vector<int> ActiveSchedule::active_blocks(double t) const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (t >= intervals[i][0] - kTol && t <= intervals[i][1] + kTol) {
      idx.push_back(static_cast<int>(i));
    }
  }
  return idx;
}

bool ActiveSchedule::covers(double horizon) const {
  std::vector<std::array<double, 2>> sorted = intervals;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  double reach = 0.0;
  for (const auto& iv : sorted) {
    if (iv[0] > reach + kTol) return false;
    reach = std::max(reach, iv[1]);
  }
  return reach >= horizon - kTol;
}

ActiveSchedule assign_intervals(const Specification& spec,
                                const IntervalPolicy& policy) {
  ActiveSchedule sched;
  sched.intervals.reserve(spec.blocks.size());
  for (const auto& blk : spec.blocks) {
    if (blk.op == TemporalOp::Always) {
      sched.intervals.push_back({blk.a, blk.b});
      continue;
    }
    const double width = blk.b - blk.a;
    const double delta = policy.delta.value_or(0.2 * width);
    if (!(delta > 0.0) || delta > width + kTol) {
      throw std::invalid_argument(
          "interval policy delta " + std::to_string(delta) +
          " does not fit eventually interval of width " + std::to_string(width));
    }
    double tstar = 0.0;
    switch (policy.anchor) {
      case IntervalPolicy::Anchor::Start:
        tstar = blk.a;
        break;
      case IntervalPolicy::Anchor::Midpoint:
        tstar = 0.5 * (blk.a + blk.b) - 0.5 * delta;
        break;
      case IntervalPolicy::Anchor::Fraction: {
        const double f = std::clamp(policy.fraction, 0.0, 1.0);
        tstar = blk.a + f * (width - delta);
        break;
      }
    }
    sched.intervals.push_back({tstar, tstar + delta});
  }
  return sched;
}

Specification ensure_coverage(const Specification& spec, const Box& box,
                              const IntervalPolicy& policy) {
  if (!spec.blocks.empty() &&
      assign_intervals(spec, policy).covers(spec.horizon)) {
    return spec;
  }
  if (box.dim() != spec.state_dim) {
    throw std::invalid_argument("ensure_coverage: box dimension mismatch");
  }
  Eigen::VectorXd half = 0.5 * box.widths();
  for (int i = 0; i < half.size(); ++i) {
    if (!(half[i] > 0.0)) {
      throw std::invalid_argument(
          "ensure_coverage: degenerate box on axis " + std::to_string(i));
    }
  }
  TemporalBlock blk;
  blk.op = TemporalOp::Always;
  blk.a = 0.0;
  blk.b = spec.horizon;
  blk.body = make_atom(PredicateAtom::norm(box.center(), half.cwiseInverse(),
                                           1.0, NormOrder::LInf));
  Specification out = spec;
  out.blocks.insert(out.blocks.begin(), std::move(blk));
  return out;
}

}  // namespace stlcbf::stl
