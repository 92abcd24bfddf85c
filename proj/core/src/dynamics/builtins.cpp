#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "stlcbf/dynamics/system.hpp"

namespace stlcbf::dyn {

namespace {

SystemModel make_mecanum() {
  // planar drive: xdot = u
  Box X = Box::cube(2, -2.0, 2.0);
  Box U = Box::cube(2, -0.2, 0.2);
  auto f = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(u);
  };
  auto dfdu = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2));
  };
  auto bounds = [](const Box&, const Box& Ub) {
    DynamicsBounds b;
    b.L_x = 0.0;
    b.L_u = 1.0;
    b.M_f = Ub.max_abs().norm();
    return b;
  };
  return SystemModel("mecanum", std::move(X), std::move(U), f, dfdu, bounds);
}

SystemModel make_pendulum() {
  const double mass = 0.5, length = 0.5, grav = 9.8, damping = 0.1;
  const double inv_ml2 = 1.0 / (mass * length * length);
  const double g_l = grav / length;
  const double b_ml2 = damping * inv_ml2;

  const double pi = 3.14159265358979323846;
  Eigen::VectorXd lo(2), hi(2);
  lo << -0.15, -2.15;
  hi << pi / 2 + 0.15, 2.15;
  Box X(lo, hi);
  Box U = Box::cube(1, -12.0, 12.0);

  auto f = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(2);
    dx[0] = x[1];
    dx[1] = u[0] * inv_ml2 - g_l * std::sin(x[0]) - b_ml2 * x[1];
    return dx;
  };
  auto dfdu = [=](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    Eigen::MatrixXd J(2, 1);
    J << 0.0, inv_ml2;
    return J;
  };
  auto bounds = [=](const Box& Xb, const Box& Ub) {
    // df/dx = [[0, 1], [-g/l cos x1, -b/(m l^2)]], |cos| <= 1
    DynamicsBounds b;
    const double fro = std::sqrt(1.0 + g_l * g_l + b_ml2 * b_ml2);
    const double one_inf = std::sqrt(std::max(g_l, 1.0 + b_ml2) *
                                     std::max(1.0, g_l + b_ml2));
    b.L_x = std::min(fro, one_inf);
    b.L_u = inv_ml2;
    const Eigen::VectorXd mx = Xb.max_abs();
    const Eigen::VectorXd mu = Ub.max_abs();
    const double s1 = mx[1];
    const double s2 = inv_ml2 * mu[0] + g_l + b_ml2 * mx[1];
    b.M_f = std::hypot(s1, s2);
    return b;
  };
  return SystemModel("pendulum", std::move(X), std::move(U), f, dfdu, bounds);
}

SystemModel make_spacecraft() {
  const double J1 = 200.0, J2 = 200.0, J3 = 100.0;
  const double c1 = (J2 - J3) / J1;
  const double c2 = (J3 - J1) / J2;
  const double c3 = (J1 - J2) / J3;

  Box X = Box::cube(3, -0.25, 0.25);
  Box U = Box::cube(3, -20.0, 20.0);

  auto f = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(3);
    dx[0] = c1 * x[1] * x[2] + u[0] / J1;
    dx[1] = c2 * x[0] * x[2] + u[1] / J2;
    dx[2] = c3 * x[0] * x[1] + u[2] / J3;
    return dx;
  };
  auto dfdu = [=](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, 3);
    J(0, 0) = 1.0 / J1;
    J(1, 1) = 1.0 / J2;
    J(2, 2) = 1.0 / J3;
    return J;
  };
  auto bounds = [=](const Box& Xb, const Box& Ub) {
    DynamicsBounds b;
    const Eigen::VectorXd a = Xb.max_abs();
    const Eigen::VectorXd mu = Ub.max_abs();
    const double fro2 = c1 * c1 * (a[1] * a[1] + a[2] * a[2]) +
                        c2 * c2 * (a[0] * a[0] + a[2] * a[2]) +
                        c3 * c3 * (a[0] * a[0] + a[1] * a[1]);
    b.L_x = std::sqrt(fro2);
    b.L_u = std::max({1.0 / J1, 1.0 / J2, 1.0 / J3});
    Eigen::VectorXd row(3);
    row[0] = std::abs(c1) * a[1] * a[2] + mu[0] / J1;
    row[1] = std::abs(c2) * a[0] * a[2] + mu[1] / J2;
    row[2] = std::abs(c3) * a[0] * a[1] + mu[2] / J3;
    b.M_f = row.norm();
    return b;
  };
  return SystemModel("spacecraft", std::move(X), std::move(U), f, dfdu, bounds);
}

std::map<std::string, SystemModel>& registry() {
  static std::map<std::string, SystemModel> reg;
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SystemModel builtin(const std::string& name) {
  if (name == "mecanum") return make_mecanum();
  if (name == "pendulum") return make_pendulum();
  if (name == "spacecraft") return make_spacecraft();
  throw std::runtime_error("unknown builtin system '" + name +
                           "' (mecanum, pendulum, spacecraft)");
}

void register_system(const std::string& name, SystemModel model) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry().insert_or_assign(name, std::move(model));
}

bool is_registered(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  return registry().count(name) > 0;
}

SystemModel lookup_system(const std::string& name) {
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(name);
    if (it != registry().end()) return it->second;
  }
  return builtin(name);
}

}  // namespace stlcbf::dyn
