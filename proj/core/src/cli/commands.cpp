#include "stlcbf/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>

#include <nlohmann/json.hpp>

#include "stlcbf/certify/certificate.hpp"
#include "stlcbf/common/parallel.hpp"
#include "stlcbf/neural/serialize.hpp"
#include "stlcbf/safeset/dataset.hpp"
#include "stlcbf/sim/simulate.hpp"
#include "stlcbf/stl/parse.hpp"
#include "stlcbf/training/trainer.hpp"

namespace stlcbf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

dyn::SystemModel build_system(const RunConfig& cfg) {
  dyn::SystemModel sys = dyn::lookup_system(cfg.system_name);
  sys = sys.with_boxes(cfg.state_box, cfg.input_box);
  if (cfg.declared_bounds) sys = sys.with_declared_bounds(*cfg.declared_bounds);
  return sys;
}

struct Pipeline {
  dyn::SystemModel sys;
  stl::Specification spec;
  stl::ActiveSchedule sched;
};

Pipeline build_pipeline(const RunConfig& cfg) {
  dyn::SystemModel sys = build_system(cfg);
  stl::Specification spec =
      stl::parse_spec(cfg.spec_text, sys.state_dim(), cfg.horizon);
  spec = stl::ensure_coverage(spec, sys.state_box(), cfg.policy);
  stl::ActiveSchedule sched = stl::assign_intervals(spec, cfg.policy);
  return Pipeline{std::move(sys), std::move(spec), std::move(sched)};
}

neural::CertNet build_barrier(const RunConfig& cfg, int n) {
  auto coupling = cfg.barrier_net.coupling == neural::CouplingKind::Product
                      ? neural::CrossCoupling::product(n)
                      : (cfg.barrier_net.coupling_coeffs
                             ? neural::CrossCoupling::exponential(
                                   n, *cfg.barrier_net.coupling_coeffs)
                             : neural::CrossCoupling::exponential(n));
  neural::CertNet net = neural::CertNet::barrier(
      n, cfg.barrier_net.hidden, cfg.barrier_net.activation, coupling);
  net.init_params(cfg.net_seed);
  return net;
}

neural::CertNet build_controller(const RunConfig& cfg,
                                 const dyn::SystemModel& sys) {
  const int n = sys.state_dim();
  auto coupling = cfg.controller_net.coupling == neural::CouplingKind::Product
                      ? neural::CrossCoupling::product(n)
                      : (cfg.controller_net.coupling_coeffs
                             ? neural::CrossCoupling::exponential(
                                   n, *cfg.controller_net.coupling_coeffs)
                             : neural::CrossCoupling::exponential(n));
  neural::OutputClamp clamp;
  clamp.lb = sys.input_box().lo;
  clamp.ub = sys.input_box().hi;
  clamp.kind = cfg.clamp_kind;
  neural::CertNet net = neural::CertNet::controller(
      n, sys.input_dim(), cfg.controller_net.hidden,
      cfg.controller_net.activation, coupling, clamp);
  net.init_params(cfg.net_seed + 1);
  return net;
}

certify::BoundsEstimate make_bounds(const neural::CertNet& barrier,
                                    const neural::CertNet& controller,
                                    const dyn::SystemModel& sys, double horizon,
                                    double alpha) {
  certify::BoundsEstimate be;
  const certify::NetBounds bb =
      certify::estimate_net_bounds(barrier, sys.state_box(), horizon);
  const certify::NetBounds cb =
      certify::estimate_net_bounds(controller, sys.state_box(), horizon);
  be.L_b = bb.lipschitz;
  be.L_db = bb.deriv_lipschitz;
  be.M_b = bb.grad_bound;
  be.L_g = cb.lipschitz;
  const dyn::DynamicsBounds db = sys.analytic_bounds();
  be.L_x = db.L_x;
  be.L_u = db.L_u;
  be.M_f = db.M_f;
  be.alpha = alpha;
  return be;
}

void write_history_csv(const std::vector<training::LossReport>& history,
                       const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write history CSV: " + path);
  f << "epoch,L1,L2,L3,lip_penalty,total,eta_hat,generation,inSafe_count\n";
  for (const auto& r : history) {
    f << r.epoch << "," << fmt(r.l1) << "," << fmt(r.l2) << "," << fmt(r.l3)
      << "," << fmt(r.lip_penalty) << "," << fmt(r.total) << ","
      << fmt(r.eta_hat) << "," << r.generation << "," << r.in_safe_count
      << "\n";
  }
}

void write_summary(const training::TrainResult& res, const std::string& path) {
  json j;
  j["converged"] = res.converged;
  j["epochs_run"] = res.epochs_run;
  j["eta"] = res.eta;
  if (!res.history.empty()) {
    j["final_total"] = res.history.back().total;
    j["final_eta_hat"] = res.history.back().eta_hat;
  }
  j["generation"] = res.dataset.generation();
  j["in_safe_count"] = res.dataset.in_safe_count();
  j["min_in_safe_robustness"] = res.dataset.min_in_safe_robustness();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write summary: " + path);
  f << j.dump(2) << "\n";
}

void append_log(const std::string& dir, const std::string& line) {
  std::ofstream f(fs::path(dir) / "run.log", std::ios::app);
  const auto now = std::chrono::system_clock::now();
  const auto secs =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
  f << "[" << secs.count() << "] " << line << "\n";
}

int guard(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const training::UnsatisfiableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnsatisfiable;
  } catch (const stl::ParseError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace

int cmd_train(const RunConfig& cfg) {
  return guard([&]() {
    Pipeline p = build_pipeline(cfg);
    auto grid = std::make_shared<const safeset::SampleGrid>(
        safeset::SampleGrid::build(p.sys.state_box(), p.spec.horizon, cfg.epsilon));
    neural::CertNet barrier = build_barrier(cfg, p.sys.state_dim());
    neural::CertNet controller = build_controller(cfg, p.sys);

    fs::create_directories(cfg.output_dir);
    append_log(cfg.output_dir,
               "train start: system=" + cfg.system_name +
                   " grid_nodes=" + std::to_string(grid->size()) +
                   " workers=" + std::to_string(worker_count()));
    const auto t0 = std::chrono::steady_clock::now();

    training::TrainResult res = training::train(
        p.spec, p.sched, p.sys, grid, std::move(barrier), std::move(controller),
        cfg.train);

    const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::steady_clock::now() - t0);
    append_log(cfg.output_dir, "train end: " + std::to_string(dt.count()) +
                                   "s epochs=" + std::to_string(res.epochs_run));

    const fs::path out(cfg.output_dir);
    neural::save_model_file(res.barrier, (out / "barrier.json").string());
    neural::save_model_file(res.controller, (out / "controller.json").string());
    write_history_csv(res.history, (out / "history.csv").string());
    write_summary(res, (out / "run_summary.json").string());

    const certify::ViolationReport rep = certify::max_violation(
        res.barrier, res.controller, p.sys, res.dataset, cfg.train.lambda,
        cfg.train.alpha);
    const certify::BoundsEstimate be = make_bounds(
        res.barrier, res.controller, p.sys, p.spec.horizon, cfg.train.alpha);
    const certify::Certificate cert =
        certify::make_certificate(rep, be, cfg.epsilon);
    certify::write_certificate(cert, (out / "certificate.json").string());

    std::cout << "training " << (res.converged ? "converged" : "did not converge")
              << " after " << res.epochs_run << " epochs";
    if (!res.history.empty()) {
      std::cout << " (total " << res.history.back().total << ")";
    }
    std::cout << "\n";
    std::cout << "eta_hat " << rep.eta_hat << ", composite Lipschitz "
              << cert.lipschitz << ", epsilon " << cert.epsilon << " -> verdict "
              << (cert.verdict == certify::Verdict::Valid ? "valid" : "invalid")
              << "\n";
    if (!res.converged) {
      std::cout << "hint: smaller epsilon, wider layers or another learning "
                   "rate can help convergence\n";
      return kExitNotConverged;
    }
    return kExitOk;
  });
}

int cmd_verify(const RunConfig& cfg, const std::string& barrier_path,
               const std::string& controller_path,
               std::optional<double> epsilon_override) {
  return guard([&]() {
    Pipeline p = build_pipeline(cfg);
    neural::CertNet barrier = neural::load_model_file(barrier_path);
    neural::CertNet controller = neural::load_model_file(controller_path);
    if (barrier.state_dim() != p.sys.state_dim() ||
        controller.state_dim() != p.sys.state_dim() ||
        controller.out_dim() != p.sys.input_dim() || barrier.out_dim() != 1) {
      throw ConfigError("model/config dimension mismatch");
    }
    const double eps = epsilon_override.value_or(cfg.epsilon);
    if (!(eps > 0.0)) throw ConfigError("epsilon must be > 0");
    auto grid = std::make_shared<const safeset::SampleGrid>(
        safeset::SampleGrid::build(p.sys.state_box(), p.spec.horizon, eps));
    const safeset::LabeledDataset ds =
        safeset::label_samples(grid, p.spec, p.sched);
    const certify::ViolationReport rep = certify::max_violation(
        barrier, controller, p.sys, ds, cfg.train.lambda, cfg.train.alpha);
    const certify::BoundsEstimate be = make_bounds(barrier, controller, p.sys,
                                                   p.spec.horizon,
                                                   cfg.train.alpha);
    const certify::Certificate cert = certify::make_certificate(rep, be, eps);
    fs::create_directories(cfg.output_dir);
    certify::write_certificate(
        cert, (fs::path(cfg.output_dir) / "certificate.json").string());
    std::cout << "eta_hat " << rep.eta_hat << ", composite Lipschitz "
              << cert.lipschitz << ", epsilon " << eps << " -> verdict "
              << (cert.verdict == certify::Verdict::Valid ? "valid" : "invalid")
              << "\n";
    return kExitOk;
  });
}

int cmd_simulate(const RunConfig& cfg, std::optional<std::string> barrier_path,
                 std::optional<std::string> controller_path,
                 std::optional<Eigen::VectorXd> x0_override) {
  return guard([&]() {
    Pipeline p = build_pipeline(cfg);
    const fs::path out(cfg.output_dir);
    const std::string bpath =
        barrier_path.value_or((out / "barrier.json").string());
    const std::string cpath =
        controller_path.value_or((out / "controller.json").string());
    neural::CertNet barrier = neural::load_model_file(bpath);
    neural::CertNet controller = neural::load_model_file(cpath);
    if (barrier.state_dim() != p.sys.state_dim() ||
        controller.state_dim() != p.sys.state_dim() ||
        controller.out_dim() != p.sys.input_dim()) {
      throw ConfigError("model/config dimension mismatch");
    }

    std::vector<Eigen::VectorXd> starts;
    if (x0_override) {
      starts.push_back(*x0_override);
    } else {
      starts = cfg.initial_states;
    }
    if (starts.empty()) {
      throw ConfigError("no initial states: set sim.x0 or pass --x0");
    }
    const double T = cfg.sim_horizon.value_or(p.spec.horizon);
    if (T < p.spec.horizon - 1e-12) {
      throw ConfigError("sim horizon " + std::to_string(T) +
                        " is shorter than the specification horizon " +
                        std::to_string(p.spec.horizon) +
                        "; the robustness score would be undefined");
    }
    fs::create_directories(cfg.output_dir);
    for (std::size_t k = 0; k < starts.size(); ++k) {
      if (starts[k].size() != p.sys.state_dim() ||
          !p.sys.state_box().contains(starts[k])) {
        throw ConfigError("initial state " + std::to_string(k) +
                          " lies outside the state box");
      }
      const sim::Trajectory traj =
          sim::simulate(p.sys, controller, starts[k], T, cfg.sim_dt);
      const double rho = sim::score(traj, p.spec);
      const double malpha = cfg.monitor_alpha.value_or(cfg.train.alpha);
      const sim::MonitorSeries mon =
          sim::monitor_barrier(traj, barrier, p.sys, controller, malpha);
      double minB = std::numeric_limits<double>::infinity();
      for (double b : mon.barrier_value) minB = std::min(minB, b);
      const std::string file =
          (out / ("traj_" + std::to_string(k) + ".csv")).string();
      sim::export_trajectory_csv(traj, p.sys, barrier, controller, malpha,
                                 p.spec, p.sched, file);
      std::cout << "x0 [" << starts[k].transpose() << "]: robustness " << rho
                << ", min barrier " << minB << (traj.left_state_box
                                                    ? ", left state box"
                                                    : "")
                << " -> " << file << "\n";
    }
    return kExitOk;
  });
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

int cmd_robustness(const std::string& spec_path, const std::string& traj_csv) {
  return guard([&]() {
    std::ifstream specf(spec_path);
    if (!specf) throw ConfigError("spec file not found: " + spec_path);
    std::string spec_text((std::istreambuf_iterator<char>(specf)),
                          std::istreambuf_iterator<char>());

    std::ifstream f(traj_csv);
    if (!f) throw ConfigError("trajectory CSV not found: " + traj_csv);
    std::string header;
    if (!std::getline(f, header)) throw ConfigError("empty trajectory CSV");
    const std::vector<std::string> cols = split_csv_line(header);
    int t_col = -1;
    int n = 0;
    for (const auto& c : cols) {
      if (c.size() >= 2 && c[0] == 'x') {
        bool digits = true;
        for (std::size_t i = 1; i < c.size(); ++i) {
          digits = digits && std::isdigit(static_cast<unsigned char>(c[i]));
        }
        if (digits) n = std::max(n, std::atoi(c.c_str() + 1));
      }
    }
    std::vector<int> x_col(static_cast<std::size_t>(n), -1);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == "t") t_col = static_cast<int>(i);
      for (int k = 1; k <= n; ++k) {
        if (cols[i] == "x" + std::to_string(k)) {
          x_col[static_cast<std::size_t>(k - 1)] = static_cast<int>(i);
        }
      }
    }
    if (t_col < 0) throw ConfigError("trajectory CSV: missing column 't'");
    if (n == 0) throw ConfigError("trajectory CSV: missing state columns x1..xn");
    for (int k = 0; k < n; ++k) {
      if (x_col[static_cast<std::size_t>(k)] < 0) {
        throw ConfigError("trajectory CSV: missing column 'x" +
                          std::to_string(k + 1) + "'");
      }
    }

    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const std::vector<std::string> vals = split_csv_line(line);
      if (vals.size() != cols.size()) {
        throw ConfigError("trajectory CSV: row with " +
                          std::to_string(vals.size()) + " fields, header has " +
                          std::to_string(cols.size()));
      }
      times.push_back(std::strtod(vals[static_cast<std::size_t>(t_col)].c_str(), nullptr));
      Eigen::VectorXd x(n);
      for (int k = 0; k < n; ++k) {
        x[k] = std::strtod(
            vals[static_cast<std::size_t>(x_col[static_cast<std::size_t>(k)])].c_str(),
            nullptr);
      }
      states.push_back(std::move(x));
    }

    const stl::Specification spec = stl::parse_spec(spec_text, n);
    double total = stl::kTrueRobustness;
    for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
      const auto& blk = spec.blocks[i];
      double r;
      try {
        r = stl::robustness_signal_block(blk, times, states);
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
      total = std::min(total, r);
      std::cout << "block " << i << " "
                << (blk.op == stl::TemporalOp::Always ? "G" : "F") << "["
                << blk.a << "," << blk.b << "]: " << r << "\n";
    }
    std::cout << "robustness " << total << "\n";
    return kExitOk;
  });
}

}  // namespace stlcbf::cli
