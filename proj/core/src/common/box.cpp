#include "stlcbf/common/box.hpp"

#include <stdexcept>
#include <utility>

namespace stlcbf {

Box::Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) {
    throw std::invalid_argument("box: lo/hi dimension mismatch");
  }
  for (int i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      throw std::invalid_argument("box: lo > hi on axis " + std::to_string(i));
    }
  }
}

Box Box::cube(int dim, double lo, double hi) {
  return Box(Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi));
}

bool Box::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

Eigen::VectorXd Box::max_abs() const {
  return lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
}

}  // namespace stlcbf
