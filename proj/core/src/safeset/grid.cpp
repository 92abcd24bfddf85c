#include "stlcbf/safeset/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace stlcbf::safeset {

SampleGrid SampleGrid::build(const Box& X, double horizon, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("grid: epsilon must be > 0");
  }
  if (X.dim() < 1) throw std::invalid_argument("grid: empty state box");
  if (horizon < 0.0) throw std::invalid_argument("grid: negative horizon");

  SampleGrid g;
  g.state_box_ = X;
  g.horizon_ = horizon;
  g.epsilon_ = epsilon;

  const int d = X.dim() + 1;
  Eigen::VectorXd widths(d);
  Eigen::VectorXd lo(d);
  for (int i = 0; i < X.dim(); ++i) {
    widths[i] = X.width(i);
    lo[i] = X.lo[i];
  }
  widths[d - 1] = horizon;
  lo[d - 1] = 0.0;

  g.counts_.resize(static_cast<std::size_t>(d));
  g.lo_.resize(static_cast<std::size_t>(d));
  g.step_.resize(static_cast<std::size_t>(d));

  if (0.5 * widths.norm() <= epsilon) {
    // the center alone covers W
    for (int i = 0; i < d; ++i) {
      g.counts_[static_cast<std::size_t>(i)] = 1;
      g.lo_[static_cast<std::size_t>(i)] = lo[i] + 0.5 * widths[i];
      g.step_[static_cast<std::size_t>(i)] = 0.0;
    }
    g.total_ = 1;
    return g;
  }

  const double h = 2.0 * epsilon / std::sqrt(static_cast<double>(d));
  unsigned __int128 total = 1;
  for (int i = 0; i < d; ++i) {
    std::int64_t k = 0;
    if (widths[i] > 0.0) {
      k = static_cast<std::int64_t>(std::ceil(widths[i] / h - 1e-12));
      if (k < 1) k = 1;
    }
    g.counts_[static_cast<std::size_t>(i)] = static_cast<int>(k + 1);
    g.lo_[static_cast<std::size_t>(i)] = lo[i];
    g.step_[static_cast<std::size_t>(i)] =
        k > 0 ? widths[i] / static_cast<double>(k) : 0.0;
    total *= static_cast<unsigned __int128>(k + 1);
    if (total > (static_cast<unsigned __int128>(1) << 62)) {
      throw std::runtime_error(
          "grid: node count overflows a 64-bit counter; increase epsilon");
    }
  }
  g.total_ = static_cast<std::uint64_t>(total);
  return g;
}

void SampleGrid::node(std::uint64_t idx, Eigen::VectorXd& x, double& t) const {
  const int n = state_dim();
  x.resize(n);
  std::uint64_t rest = idx;
  for (int i = 0; i <= n; ++i) {
    const auto c = static_cast<std::uint64_t>(counts_[static_cast<std::size_t>(i)]);
    const std::uint64_t k = rest % c;
    rest /= c;
    const double v = lo_[static_cast<std::size_t>(i)] +
                     static_cast<double>(k) * step_[static_cast<std::size_t>(i)];
    if (i < n) {
      x[i] = v;
    } else {
      t = v;
    }
  }
}

AugPoint SampleGrid::node(std::uint64_t idx) const {
  AugPoint p;
  node(idx, p.x, p.t);
  return p;
}

Box SampleGrid::augmented_box() const {
  const int n = state_dim();
  Eigen::VectorXd lo(n + 1), hi(n + 1);
  lo.head(n) = state_box_.lo;
  hi.head(n) = state_box_.hi;
  lo[n] = 0.0;
  hi[n] = horizon_;
  return Box(lo, hi);
}

}  // namespace stlcbf::safeset
