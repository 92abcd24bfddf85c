#include "stlcbf/dynamics/system.hpp"

#include <stdexcept>
#include <utility>

namespace stlcbf::dyn {

SystemModel::SystemModel(std::string name, Box X, Box U, Dynamics f,
                         InputJacobian dfdu, BoundsFn bounds)
    : name_(std::move(name)),
      X_(std::move(X)),
      U_(std::move(U)),
      f_(std::move(f)),
      dfdu_(std::move(dfdu)),
      bounds_(std::move(bounds)) {
  if (!f_) throw std::invalid_argument("system: dynamics function required");
}

Eigen::VectorXd SystemModel::eval_f(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u) const {
  if (x.size() != state_dim()) {
    throw std::invalid_argument("eval_f: state dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(state_dim()) + ")");
  }
  if (u.size() != input_dim()) {
    throw std::invalid_argument("eval_f: input dimension mismatch (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(input_dim()) + ")");
  }
  return f_(x, u);
}

Eigen::MatrixXd SystemModel::input_jacobian(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& u) const {
  if (dfdu_) return dfdu_(x, u);
  const double h = 1e-6;
  Eigen::MatrixXd J(state_dim(), input_dim());
  Eigen::VectorXd up = u, um = u;
  for (int j = 0; j < input_dim(); ++j) {
    up[j] += h;
    um[j] -= h;
    J.col(j) = (eval_f(x, up) - eval_f(x, um)) / (2.0 * h);
    up[j] = u[j];
    um[j] = u[j];
  }
  return J;
}

DynamicsBounds SystemModel::analytic_bounds() const {
  return analytic_bounds(X_, U_);
}

DynamicsBounds SystemModel::analytic_bounds(const Box& X, const Box& U) const {
  if (!bounds_) {
    throw std::runtime_error("system '" + name_ +
                             "' has no analytic or declared bounds");
  }
  return bounds_(X, U);
}

SystemModel SystemModel::with_boxes(std::optional<Box> X,
                                    std::optional<Box> U) const {
  SystemModel out = *this;
  if (X) {
    if (X->dim() != state_dim()) {
      throw std::invalid_argument("state box override dimension mismatch");
    }
    out.X_ = std::move(*X);
  }
  if (U) {
    if (U->dim() != input_dim()) {
      throw std::invalid_argument("input box override dimension mismatch");
    }
    out.U_ = std::move(*U);
  }
  return out;
}

SystemModel SystemModel::with_declared_bounds(DynamicsBounds b) const {
  SystemModel out = *this;
  out.bounds_ = [b](const Box&, const Box&) { return b; };
  return out;
}

}  // namespace stlcbf::dyn
