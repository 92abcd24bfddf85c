#pragma once

#include <Eigen/Core>

namespace stlcbf {

// Axis-aligned compact box [lo, hi] (componentwise).
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_);

  static Box cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
  double width(int i) const { return hi[i] - lo[i]; }
  Eigen::VectorXd widths() const { return hi - lo; }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  double half_diagonal() const { return 0.5 * (hi - lo).norm(); }

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;

  // per-axis sup of |x_i| over the box
  Eigen::VectorXd max_abs() const;
};

}  // namespace stlcbf
