#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "stlcbf/sim/simulate.hpp"
#include "stlcbf/stl/parse.hpp"

using namespace stlcbf;

namespace {

neural::CertNet constant_controller(int n, const Eigen::VectorXd& u, double lb,
                                    double ub) {
  neural::OutputClamp clamp;
  clamp.lb = Eigen::VectorXd::Constant(u.size(), lb);
  clamp.ub = Eigen::VectorXd::Constant(u.size(), ub);
  neural::CertNet net = neural::CertNet::controller(
      n, static_cast<int>(u.size()), {}, neural::Activation::Tanh,
      neural::CrossCoupling::product(n), clamp);
  net.bias(0) = u;
  return net;
}

neural::CertNet constant_barrier(int n, double value) {
  neural::CertNet net = neural::CertNet::barrier(
      n, {}, neural::Activation::Tanh, neural::CrossCoupling::product(n));
  net.bias(0)[0] = value;
  return net;
}

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

dyn::SystemModel exponential_growth() {
  // xdot = x; the input is ignored
  auto f = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(x);
  };
  return dyn::SystemModel("exp", Box::cube(1, -3, 3), Box::cube(1, -1, 1), f);
}

}  // namespace

TEST_CASE("simulate: constant input on the mecanum is exact") {
  const dyn::SystemModel sys = dyn::builtin("mecanum");
  const auto ctrl = constant_controller(2, vec({0.1, 0.0}), -0.2, 0.2);
  const sim::Trajectory traj =
      sim::simulate(sys, ctrl, vec({0.0, 0.0}), 1.0, 0.01);
  REQUIRE(traj.times.size() == 101);
  CHECK(traj.times.back() == doctest::Approx(1.0));
  CHECK(traj.states.back()[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(traj.states.back()[1] == doctest::Approx(0.0));
  CHECK_FALSE(traj.left_state_box);
  for (const auto& u : traj.inputs) {
    CHECK(u[0] == doctest::Approx(0.1));
    CHECK(u[1] == 0.0);
  }
}

TEST_CASE("simulate: RK4 accuracy and observed order on xdot = x") {
  const dyn::SystemModel sys = exponential_growth();
  const auto ctrl = constant_controller(1, vec({0.0}), -1, 1);
  const sim::Trajectory fine = sim::simulate(sys, ctrl, vec({1.0}), 1.0, 0.01);
  CHECK(std::abs(fine.states.back()[0] - std::exp(1.0)) <= 1e-8);

  const sim::Trajectory coarse = sim::simulate(sys, ctrl, vec({1.0}), 1.0, 0.02);
  const double e_coarse = std::abs(coarse.states.back()[0] - std::exp(1.0));
  const double e_fine = std::abs(fine.states.back()[0] - std::exp(1.0));
  const double order = std::log2(e_coarse / e_fine);
  CHECK(order >= 3.5);
}

TEST_CASE("simulate: pendulum balanced by the gravity-cancelling torque") {
  const dyn::SystemModel sys = dyn::builtin("pendulum");
  const double u0 = 0.5 * 9.8 * 0.5 * std::sin(M_PI / 3.0);  // m g l sin(x1)
  const auto ctrl = constant_controller(2, vec({u0}), -12, 12);
  const sim::Trajectory traj =
      sim::simulate(sys, ctrl, vec({M_PI / 3.0, 0.0}), 1.0, 0.01);
  for (const auto& x : traj.states) {
    CHECK(std::abs(x[0] - M_PI / 3.0) <= 1e-6);
    CHECK(std::abs(x[1]) <= 1e-6);
  }
}

TEST_CASE("simulate: runaway states are flagged") {
  const dyn::SystemModel sys = exponential_growth();
  const auto ctrl = constant_controller(1, vec({0.0}), -1, 1);
  const sim::Trajectory traj = sim::simulate(sys, ctrl, vec({2.9}), 2.0, 0.01);
  CHECK(traj.left_state_box);
  CHECK(traj.times.back() >= 2.0);
}

TEST_CASE("simulate: recorded inputs always lie in the input box") {
  Rng rng(71);
  const dyn::SystemModel sys = dyn::builtin("mecanum");
  neural::CertNet ctrl = oracles::random_controller(
      rng, 2, 2, {12}, neural::CouplingKind::Product);
  // rescale the random clamp to the mecanum input box
  neural::OutputClamp clamp;
  clamp.lb = sys.input_box().lo;
  clamp.ub = sys.input_box().hi;
  neural::CertNet scaled = neural::CertNet::controller(
      2, 2, {12}, neural::Activation::Tanh, neural::CrossCoupling::product(2),
      clamp);
  scaled.init_params(99);
  for (int k = 0; k < scaled.layer_count(); ++k) scaled.weight(k) *= 4.0;
  const sim::Trajectory traj =
      sim::simulate(sys, scaled, vec({-1.0, 0.5}), 3.0, 0.05);
  for (const auto& u : traj.inputs) {
    CHECK(u[0] >= -0.2);
    CHECK(u[0] <= 0.2);
    CHECK(u[1] >= -0.2);
    CHECK(u[1] <= 0.2);
  }
}

TEST_CASE("simulate: zero-order hold differs from stage feedback") {
  // time-varying controller output makes the two modes diverge
  const dyn::SystemModel sys = dyn::builtin("mecanum");
  neural::OutputClamp clamp;
  clamp.lb = sys.input_box().lo;
  clamp.ub = sys.input_box().hi;
  neural::CertNet ctrl = neural::CertNet::controller(
      2, 2, {}, neural::Activation::Tanh, neural::CrossCoupling::product(2),
      clamp);
  ctrl.weight(0)(0, 2) = 0.1;  // u1 = clamp(0.1 t)
  const sim::Trajectory a = sim::simulate(sys, ctrl, vec({0, 0}), 1.0, 0.1, false);
  const sim::Trajectory b = sim::simulate(sys, ctrl, vec({0, 0}), 1.0, 0.1, true);
  CHECK(a.states.back()[0] != b.states.back()[0]);
  CHECK(a.states.back()[0] == doctest::Approx(0.05).epsilon(1e-9));  // int of 0.1 t
}

TEST_CASE("monitor_barrier: constant and time-ramp barriers") {
  const dyn::SystemModel sys = dyn::builtin("mecanum");
  const auto ctrl = constant_controller(2, vec({0.0, 0.0}), -0.2, 0.2);
  const sim::Trajectory traj = sim::simulate(sys, ctrl, vec({0, 0}), 1.0, 0.1);

  const double alpha = 0.7, c = 0.4;
  const sim::MonitorSeries cm =
      sim::monitor_barrier(traj, constant_barrier(2, c), sys, ctrl, alpha);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    CHECK(cm.barrier_value[k] == doctest::Approx(c));
    CHECK(cm.decay_margin[k] == doctest::Approx(alpha * c));
  }

  // B = -t over static motion, alpha = 0: Bdot + alpha B = -1
  neural::CertNet ramp = constant_barrier(2, 0.0);
  ramp.weight(0)(0, 2) = -1.0;  // time feature
  const sim::MonitorSeries rm = sim::monitor_barrier(traj, ramp, sys, ctrl, 0.0);
  for (double v : rm.decay_margin) CHECK(v == doctest::Approx(-1.0));
}

TEST_CASE("score: delegates to the signal robustness") {
  const stl::Specification spec = stl::parse_spec(
      "G[0,15](norm2(x, [0,0]) <= 1.6 and norm2(x, [1,0]) > 0.3) "
      "and G[12,15](norm2(x, [0,0]) <= 0.3)",
      2);
  const dyn::SystemModel sys = dyn::builtin("mecanum");
  const auto hold = constant_controller(2, vec({0.0, 0.0}), -0.2, 0.2);
  const sim::Trajectory traj = sim::simulate(sys, hold, vec({0, 0}), 15.0, 0.05);
  const double rho = sim::score(traj, spec);
  CHECK(rho == doctest::Approx(0.3));
  CHECK(rho == stl::robustness_signal(spec, traj.times, traj.states));

  // a trajectory parked inside the obstacle scores negative
  const sim::Trajectory bad = sim::simulate(sys, hold, vec({1.0, 0.0}), 15.0, 0.05);
  CHECK(sim::score(bad, spec) < 0.0);
}

TEST_CASE("export_trajectory_csv: schema") {
  const stl::Specification spec =
      stl::parse_spec("G[0,1](norm2(x, [0,0]) <= 1.6)", 2);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  const dyn::SystemModel sys = dyn::builtin("mecanum");
  const auto ctrl = constant_controller(2, vec({0.1, 0.0}), -0.2, 0.2);
  const sim::Trajectory traj = sim::simulate(sys, ctrl, vec({0, 0}), 1.0, 0.25);
  const std::string path =
      (std::filesystem::temp_directory_path() / "stlcbf_traj.csv").string();
  sim::export_trajectory_csv(traj, sys, constant_barrier(2, 0.5), ctrl, 1.0,
                             spec, sched, path);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "t,x1,x2,u1,u2,B,Bdot_plus_alphaB,min_active_robustness");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == traj.times.size());
  std::filesystem::remove(path);
}
