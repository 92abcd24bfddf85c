#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

#include "stlcbf/common/box.hpp"

namespace stlcbf::dyn {

// Lipschitz/magnitude bounds of the dynamics over given state/input boxes.
struct DynamicsBounds {
  double L_x = 0.0;  // Lipschitz constant in x
  double L_u = 0.0;  // Lipschitz constant in u
  double M_f = 0.0;  // sup ||f(x,u)||_2
};

// Control system xdot = f(x, u) with compact state box X and input box U.
class SystemModel {
 public:
  using Dynamics =
      std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using InputJacobian =
      std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  // sound analytic bounds as a function of the boxes
  using BoundsFn = std::function<DynamicsBounds(const Box&, const Box&)>;

  SystemModel(std::string name, Box X, Box U, Dynamics f,
              InputJacobian dfdu = nullptr, BoundsFn bounds = nullptr);

  const std::string& name() const { return name_; }
  int state_dim() const { return X_.dim(); }
  int input_dim() const { return U_.dim(); }
  const Box& state_box() const { return X_; }
  const Box& input_box() const { return U_; }

  Eigen::VectorXd eval_f(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  // df/du; analytic when provided, else central differences
  Eigen::MatrixXd input_jacobian(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) const;

  bool has_analytic_bounds() const { return static_cast<bool>(bounds_); }
  DynamicsBounds analytic_bounds() const;
  DynamicsBounds analytic_bounds(const Box& X, const Box& U) const;

  // same dynamics over different boxes (analytic bounds recomputed)
  SystemModel with_boxes(std::optional<Box> X, std::optional<Box> U) const;
  // explicitly declared bounds (user-defined systems)
  SystemModel with_declared_bounds(DynamicsBounds b) const;

 private:
  std::string name_;
  Box X_;
  Box U_;
  Dynamics f_;
  InputJacobian dfdu_;
  BoundsFn bounds_;
};

// mecanum | pendulum | spacecraft, with their published constants.
SystemModel builtin(const std::string& name);

// Extension point for user-defined systems selectable by name.
void register_system(const std::string& name, SystemModel model);
bool is_registered(const std::string& name);
SystemModel lookup_system(const std::string& name);  // builtin or registered

}  // namespace stlcbf::dyn
