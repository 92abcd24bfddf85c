#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlcbf/common/box.hpp"
#include "stlcbf/dynamics/system.hpp"
#include "stlcbf/neural/net.hpp"
#include "stlcbf/stl/schedule.hpp"
#include "stlcbf/training/trainer.hpp"

namespace stlcbf::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NetConfig {
  std::vector<int> hidden{32, 32};
  neural::Activation activation = neural::Activation::Tanh;
  neural::CouplingKind coupling = neural::CouplingKind::Product;
  std::optional<Eigen::VectorXd> coupling_coeffs;
};

// One experiment, schema-validated on load.
struct RunConfig {
  std::string system_name;
  std::optional<Box> state_box;
  std::optional<Box> input_box;
  std::optional<dyn::DynamicsBounds> declared_bounds;

  std::string spec_text;
  std::optional<double> horizon;

  double epsilon = 0.1;
  stl::IntervalPolicy policy;

  NetConfig barrier_net;
  NetConfig controller_net;
  neural::ClampKind clamp_kind = neural::ClampKind::Hard;
  std::uint64_t net_seed = 7;

  training::TrainConfig train;

  double sim_dt = 0.01;
  std::vector<Eigen::VectorXd> initial_states;
  std::optional<double> sim_horizon;
  // class-K slope used when monitoring Bdot + alpha*B along trajectories;
  // defaults to the training slope
  std::optional<double> monitor_alpha;

  std::string output_dir = "out";
};

// Parses and validates; spec file and relative paths resolve against the
// config file's directory.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir);

}  // namespace stlcbf::cli
