#pragma once

#include <optional>
#include <string>

#include "stlcbf/cli/config.hpp"

namespace stlcbf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitUnsatisfiable = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

// Trains barrier + controller, writes barrier.json, controller.json,
// history.csv, run_summary.json and certificate.json under outputs.dir.
// 0 when training converged (the certificate verdict may still be invalid),
// 1 when it did not, 2 when refinement emptied the safe set, 64 on config
// errors.
int cmd_train(const RunConfig& cfg);

// Recomputes the sampled violation max over a fresh grid, composes the
// Lipschitz constant and writes certificate.json.
int cmd_verify(const RunConfig& cfg, const std::string& barrier_path,
               const std::string& controller_path,
               std::optional<double> epsilon_override = std::nullopt);

// Closed-loop rollouts for the configured (or overridden) initial states;
// writes traj_<k>.csv and prints the robustness score and min barrier value.
int cmd_simulate(const RunConfig& cfg,
                 std::optional<std::string> barrier_path = std::nullopt,
                 std::optional<std::string> controller_path = std::nullopt,
                 std::optional<Eigen::VectorXd> x0_override = std::nullopt);

// Standalone robustness scoring of a trajectory CSV against a spec file.
int cmd_robustness(const std::string& spec_path, const std::string& traj_csv);

}  // namespace stlcbf::cli
