#include "stlcbf/sim/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace stlcbf::sim {

Trajectory simulate(const dyn::SystemModel& sys,
                    const neural::CertNet& controller,
                    const Eigen::VectorXd& x0, double horizon, double dt,
                    bool zero_order_hold) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (x0.size() != sys.state_dim()) {
    throw std::invalid_argument("simulate: x0 dimension mismatch");
  }
  const auto steps =
      static_cast<std::uint64_t>(std::ceil(horizon / dt - 1e-9));

  // inflated box for the runaway diagnostic
  const Eigen::VectorXd infl = 0.1 * sys.state_box().widths();
  const Box guard(sys.state_box().lo - infl, sys.state_box().hi + infl);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.inputs.reserve(steps + 1);

  Eigen::VectorXd x = x0;
  auto control = [&](const Eigen::VectorXd& xs, double ts) {
    return controller.forward(xs, ts);
  };

  for (std::uint64_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Eigen::VectorXd u = control(x, t);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(u);
    if (!guard.contains(x)) traj.left_state_box = true;
    if (k == steps) break;

    Eigen::VectorXd k1, k2, k3, k4;
    if (zero_order_hold) {
      k1 = sys.eval_f(x, u);
      k2 = sys.eval_f(x + 0.5 * dt * k1, u);
      k3 = sys.eval_f(x + 0.5 * dt * k2, u);
      k4 = sys.eval_f(x + dt * k3, u);
    } else {
      k1 = sys.eval_f(x, u);
      Eigen::VectorXd x2 = x + 0.5 * dt * k1;
      k2 = sys.eval_f(x2, control(x2, t + 0.5 * dt));
      Eigen::VectorXd x3 = x + 0.5 * dt * k2;
      k3 = sys.eval_f(x3, control(x3, t + 0.5 * dt));
      Eigen::VectorXd x4 = x + dt * k3;
      k4 = sys.eval_f(x4, control(x4, t + dt));
    }
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      traj.left_state_box = true;
      break;
    }
  }
  return traj;
}

MonitorSeries monitor_barrier(const Trajectory& traj,
                              const neural::CertNet& barrier,
                              const dyn::SystemModel& sys,
                              const neural::CertNet& controller, double alpha) {
  MonitorSeries out;
  out.barrier_value.reserve(traj.times.size());
  out.decay_margin.reserve(traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const Eigen::VectorXd& x = traj.states[k];
    const double B = barrier.value(x, t);
    const neural::InputJacobian J = barrier.input_jacobian(x, t);
    const Eigen::VectorXd u = controller.forward(x, t);
    const Eigen::VectorXd f = sys.eval_f(x, u);
    const double bdot = J.dx.row(0).dot(f) + J.dt[0];
    out.barrier_value.push_back(B);
    out.decay_margin.push_back(bdot + alpha * B);
  }
  return out;
}

double score(const Trajectory& traj, const stl::Specification& spec) {
  return stl::robustness_signal(spec, traj.times, traj.states);
}

void export_trajectory_csv(const Trajectory& traj, const dyn::SystemModel& sys,
                           const neural::CertNet& barrier,
                           const neural::CertNet& controller, double alpha,
                           const stl::Specification& spec,
                           const stl::ActiveSchedule& sched,
                           const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write trajectory CSV: " + path);
  const int n = sys.state_dim();
  const int m = sys.input_dim();
  f << "t";
  for (int i = 1; i <= n; ++i) f << ",x" << i;
  for (int i = 1; i <= m; ++i) f << ",u" << i;
  f << ",B,Bdot_plus_alphaB,min_active_robustness\n";

  const MonitorSeries mon = monitor_barrier(traj, barrier, sys, controller, alpha);
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    f << buf;
  };
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    put(traj.times[k]);
    for (int i = 0; i < n; ++i) {
      f << ",";
      put(traj.states[k][i]);
    }
    for (int i = 0; i < m; ++i) {
      f << ",";
      put(traj.inputs[k][i]);
    }
    f << ",";
    put(mon.barrier_value[k]);
    f << ",";
    put(mon.decay_margin[k]);

    double rob = std::numeric_limits<double>::infinity();
    bool any = false;
    const auto active = sched.active_blocks(traj.times[k]);
    for (int blk : active) {
      any = true;
      rob = std::min(rob, stl::robustness_bool(
                              *spec.blocks[static_cast<std::size_t>(blk)].body,
                              traj.states[k]));
    }
    if (!any) rob = stl::kTrueRobustness;
    f << ",";
    put(rob);
    f << "\n";
  }
}

}  // namespace stlcbf::sim
