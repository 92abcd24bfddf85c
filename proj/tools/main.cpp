#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stlcbf/cli/commands.hpp"

namespace {

Eigen::VectorXd parse_x0(const std::string& s) {
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok = s.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) vals.push_back(std::strtod(tok.c_str(), nullptr));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  Eigen::VectorXd v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = vals[i];
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural time-varying barrier + controller synthesis for "
               "temporal specifications"};
  app.require_subcommand(1);

  std::string config_path, barrier_path, controller_path, spec_path, traj_path,
      x0_text;
  double epsilon_override = 0.0;
  bool has_eps = false;

  CLI::App* train = app.add_subcommand("train", "train barrier + controller");
  train->add_option("-c,--config", config_path, "run config JSON")->required();

  CLI::App* verify =
      app.add_subcommand("verify", "recompute the validity certificate");
  verify->add_option("-c,--config", config_path, "run config JSON")->required();
  verify->add_option("--barrier", barrier_path, "barrier model JSON")->required();
  verify->add_option("--controller", controller_path, "controller model JSON")
      ->required();
  verify->add_option("--epsilon", epsilon_override, "covering radius override")
      ->each([&](const std::string&) { has_eps = true; });

  CLI::App* simulate =
      app.add_subcommand("simulate", "closed-loop rollouts of trained models");
  simulate->add_option("-c,--config", config_path, "run config JSON")->required();
  simulate->add_option("--barrier", barrier_path, "barrier model JSON");
  simulate->add_option("--controller", controller_path, "controller model JSON");
  simulate->add_option("--x0", x0_text, "initial state, comma-separated");

  CLI::App* robustness =
      app.add_subcommand("robustness", "score a trajectory CSV against a spec");
  robustness->add_option("--spec", spec_path, "specification text file")
      ->required();
  robustness->add_option("--traj", traj_path, "trajectory CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return stlcbf::cli::cmd_train(stlcbf::cli::load_run_config(config_path));
    }
    if (verify->parsed()) {
      return stlcbf::cli::cmd_verify(
          stlcbf::cli::load_run_config(config_path), barrier_path,
          controller_path,
          has_eps ? std::optional<double>(epsilon_override) : std::nullopt);
    }
    if (simulate->parsed()) {
      return stlcbf::cli::cmd_simulate(
          stlcbf::cli::load_run_config(config_path),
          barrier_path.empty() ? std::nullopt
                               : std::optional<std::string>(barrier_path),
          controller_path.empty() ? std::nullopt
                                  : std::optional<std::string>(controller_path),
          x0_text.empty() ? std::nullopt
                          : std::optional<Eigen::VectorXd>(parse_x0(x0_text)));
    }
    if (robustness->parsed()) {
      return stlcbf::cli::cmd_robustness(spec_path, traj_path);
    }
  } catch (const stlcbf::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return stlcbf::cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stlcbf::cli::kExitInternal;
  }
  return stlcbf::cli::kExitUsage;
}
