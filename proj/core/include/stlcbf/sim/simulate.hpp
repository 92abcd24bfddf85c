#pragma once

#include <string>
#include <vector>

#include "stlcbf/dynamics/system.hpp"
#include "stlcbf/neural/net.hpp"
#include "stlcbf/stl/robustness.hpp"
#include "stlcbf/stl/schedule.hpp"

namespace stlcbf::sim {

struct Trajectory {
  std::vector<double> times;               // 0, dt, 2dt, ...; covers [0, T]
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;     // controller output at each sample
  bool left_state_box = false;             // diagnostic flag
};

// Classical RK4 under u = g(x, t). By default the controller is evaluated at
// every RK4 stage point (continuous feedback); zero_order_hold freezes the
// step-start input instead. Integration continues after leaving the inflated
// state box (flagged), and stops early only on non-finite states.
Trajectory simulate(const dyn::SystemModel& sys,
                    const neural::CertNet& controller,
                    const Eigen::VectorXd& x0, double horizon, double dt,
                    bool zero_order_hold = false);

struct MonitorSeries {
  std::vector<double> barrier_value;  // B(x(t), t)
  std::vector<double> decay_margin;   // Bdot + alpha*B along the trajectory
};

MonitorSeries monitor_barrier(const Trajectory& traj,
                              const neural::CertNet& barrier,
                              const dyn::SystemModel& sys,
                              const neural::CertNet& controller, double alpha);

// rho^Phi of the sampled trajectory; >= 0 means the specification holds.
double score(const Trajectory& traj, const stl::Specification& spec);

// CSV: t, x1..xn, u1..um, B, Bdot_plus_alphaB, min_active_robustness
void export_trajectory_csv(const Trajectory& traj, const dyn::SystemModel& sys,
                           const neural::CertNet& barrier,
                           const neural::CertNet& controller, double alpha,
                           const stl::Specification& spec,
                           const stl::ActiveSchedule& sched,
                           const std::string& path);

}  // namespace stlcbf::sim
