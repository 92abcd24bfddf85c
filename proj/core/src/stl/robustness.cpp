#include "stlcbf/stl/robustness.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace stlcbf::stl {

double robustness_bool(const Formula& f, const Eigen::VectorXd& x,
                       double true_value) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, TrueNode>) {
          return true_value;
        } else if constexpr (std::is_same_v<T, PredicateAtom>) {
          return node.eval(x);
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return -robustness_bool(*node.child, x, true_value);
        } else if constexpr (std::is_same_v<T, AndNode>) {
          double v = std::numeric_limits<double>::infinity();
          for (const auto& c : node.children) {
            v = std::min(v, robustness_bool(*c, x, true_value));
          }
          return v;
        } else {
          double v = -std::numeric_limits<double>::infinity();
          for (const auto& c : node.children) {
            v = std::max(v, robustness_bool(*c, x, true_value));
          }
          return v;
        }
      },
      f.node);
}

double robustness_bool(const FormulaPtr& f, const Eigen::VectorXd& x,
                       double true_value) {
  return robustness_bool(*f, x, true_value);
}

namespace {
double interval_tol(double b) { return 1e-9 * std::max(1.0, std::abs(b)); }
}  // namespace

double robustness_signal_block(const TemporalBlock& block,
                               std::span<const double> times,
                               std::span<const Eigen::VectorXd> states,
                               double true_value) {
  if (times.size() != states.size()) {
    throw std::invalid_argument("trajectory times/states length mismatch");
  }
  const double tol = interval_tol(block.b);
  if (times.empty() || times.front() > block.a + tol ||
      times.back() < block.b - tol) {
    throw std::runtime_error("trajectory does not cover block interval [" +
                             std::to_string(block.a) + ", " +
                             std::to_string(block.b) + "]");
  }
  const bool always = block.op == TemporalOp::Always;
  double v = always ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  bool seen = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < block.a - tol) continue;
    if (times[i] > block.b + tol) break;
    seen = true;
    const double r = robustness_bool(*block.body, states[i], true_value);
    v = always ? std::min(v, r) : std::max(v, r);
  }
  if (!seen) {
    throw std::runtime_error("no trajectory sample inside block interval [" +
                             std::to_string(block.a) + ", " +
                             std::to_string(block.b) + "]");
  }
  return v;
}

double robustness_signal(const Specification& spec,
                         std::span<const double> times,
                         std::span<const Eigen::VectorXd> states,
                         double true_value) {
  double v = true_value;
  for (const auto& block : spec.blocks) {
    v = std::min(v, robustness_signal_block(block, times, states, true_value));
  }
  return v;
}

}  // namespace stlcbf::stl
