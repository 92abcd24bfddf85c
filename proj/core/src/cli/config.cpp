#include "stlcbf/cli/config.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace stlcbf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Box parse_box(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(what) + ": expected [[lo, hi], ...]");
  }
  const int d = static_cast<int>(j.size());
  Eigen::VectorXd lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    const json& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || r.size() != 2) {
      throw ConfigError(std::string(what) + ": axis " + std::to_string(i) +
                        " must be [lo, hi]");
    }
    lo[i] = r[0].get<double>();
    hi[i] = r[1].get<double>();
    if (!(lo[i] < hi[i])) {
      throw ConfigError(std::string(what) + ": lo >= hi on axis " +
                        std::to_string(i));
    }
  }
  return Box(lo, hi);
}

Eigen::VectorXd parse_vector(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(what) + ": expected a number array");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

neural::Activation parse_activation(const std::string& s) {
  if (s == "tanh") return neural::Activation::Tanh;
  if (s == "softplus") return neural::Activation::Softplus;
  if (s == "sigmoid") return neural::Activation::Sigmoid;
  throw ConfigError("unknown activation '" + s + "'");
}

NetConfig parse_net(const json& j, const char* what) {
  NetConfig net;
  if (j.contains("hidden")) {
    net.hidden.clear();
    for (const auto& h : j.at("hidden")) {
      const int w = h.get<int>();
      if (w < 1) throw ConfigError(std::string(what) + ": hidden width must be >= 1");
      net.hidden.push_back(w);
    }
  }
  if (j.contains("activation")) {
    net.activation = parse_activation(j.at("activation").get<std::string>());
  }
  if (j.contains("coupling")) {
    const std::string c = j.at("coupling").get<std::string>();
    if (c == "product") {
      net.coupling = neural::CouplingKind::Product;
    } else if (c == "exponential") {
      net.coupling = neural::CouplingKind::Exponential;
    } else {
      throw ConfigError(std::string(what) + ": unknown coupling '" + c + "'");
    }
  }
  if (j.contains("coeffs")) {
    net.coupling_coeffs = parse_vector(j.at("coeffs"), what);
  }
  return net;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  RunConfig cfg;
  try {
    const json& sys = j.at("system");
    cfg.system_name = sys.at("name").get<std::string>();
    if (sys.contains("X")) cfg.state_box = parse_box(sys.at("X"), "system.X");
    if (sys.contains("U")) cfg.input_box = parse_box(sys.at("U"), "system.U");
    if (sys.contains("bounds")) {
      const json& b = sys.at("bounds");
      dyn::DynamicsBounds db;
      db.L_x = b.at("L_x").get<double>();
      db.L_u = b.at("L_u").get<double>();
      db.M_f = b.at("M_f").get<double>();
      cfg.declared_bounds = db;
    }

    const json& spec = j.at("spec");
    if (spec.contains("text")) {
      cfg.spec_text = spec.at("text").get<std::string>();
    } else if (spec.contains("file")) {
      const fs::path p = fs::path(base_dir) / spec.at("file").get<std::string>();
      std::ifstream in(p);
      if (!in) throw ConfigError("spec file not found: " + p.string());
      cfg.spec_text.assign((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    } else {
      throw ConfigError("config: spec.text or spec.file required");
    }
    if (spec.contains("horizon")) cfg.horizon = spec.at("horizon").get<double>();

    cfg.epsilon = j.at("grid").at("epsilon").get<double>();
    if (!(cfg.epsilon > 0.0)) throw ConfigError("grid.epsilon must be > 0");

    if (j.contains("interval_policy")) {
      const json& p = j.at("interval_policy");
      if (p.contains("anchor")) {
        const json& a = p.at("anchor");
        if (a.is_number()) {
          cfg.policy.anchor = stl::IntervalPolicy::Anchor::Fraction;
          cfg.policy.fraction = a.get<double>();
        } else {
          const std::string s = a.get<std::string>();
          if (s == "start") {
            cfg.policy.anchor = stl::IntervalPolicy::Anchor::Start;
          } else if (s == "midpoint") {
            cfg.policy.anchor = stl::IntervalPolicy::Anchor::Midpoint;
          } else {
            throw ConfigError("interval_policy.anchor must be start, midpoint or a fraction");
          }
        }
      }
      if (p.contains("delta")) {
        const double d = p.at("delta").get<double>();
        if (!(d > 0.0)) throw ConfigError("interval_policy.delta must be > 0");
        cfg.policy.delta = d;
      }
    }

    const json& nets = j.at("nets");
    cfg.barrier_net = parse_net(nets.at("barrier"), "nets.barrier");
    cfg.controller_net = parse_net(nets.at("controller"), "nets.controller");
    if (nets.at("controller").contains("clamp")) {
      const std::string c = nets.at("controller").at("clamp").get<std::string>();
      if (c == "hard") {
        cfg.clamp_kind = neural::ClampKind::Hard;
      } else if (c == "tanh") {
        cfg.clamp_kind = neural::ClampKind::SmoothTanh;
      } else {
        throw ConfigError("nets.controller.clamp must be 'hard' or 'tanh'");
      }
    }
    if (nets.contains("seed")) cfg.net_seed = nets.at("seed").get<std::uint64_t>();

    const json& tr = j.at("train");
    auto& t = cfg.train;
    t.epochs = tr.at("epochs").get<int>();
    if (tr.contains("batch_size")) t.batch_size = tr.at("batch_size").get<int>();
    if (tr.contains("lr")) t.adam.lr = tr.at("lr").get<double>();
    if (tr.contains("beta1")) t.adam.beta1 = tr.at("beta1").get<double>();
    if (tr.contains("beta2")) t.adam.beta2 = tr.at("beta2").get<double>();
    if (tr.contains("eps_adam")) t.adam.eps = tr.at("eps_adam").get<double>();
    if (tr.contains("k1")) t.k1 = tr.at("k1").get<double>();
    if (tr.contains("k2")) t.k2 = tr.at("k2").get<double>();
    if (tr.contains("k3")) t.k3 = tr.at("k3").get<double>();
    if (tr.contains("lambda")) t.lambda = tr.at("lambda").get<double>();
    if (tr.contains("alpha")) t.alpha = tr.at("alpha").get<double>();
    if (tr.contains("eta")) t.eta = tr.at("eta").get<double>();
    if (tr.contains("lip_targets")) {
      const json& lt = tr.at("lip_targets");
      t.lip_targets.L_b = lt.at("L_b").get<double>();
      t.lip_targets.L_db = lt.at("L_db").get<double>();
      t.lip_targets.L_g = lt.at("L_g").get<double>();
    }
    if (tr.contains("lip_weight")) t.lip_weight = tr.at("lip_weight").get<double>();
    if (tr.contains("lr_decay")) t.lr_decay = tr.at("lr_decay").get<double>();
    if (tr.contains("lr_decay_every")) {
      t.lr_decay_every = tr.at("lr_decay_every").get<int>();
    }
    if (tr.contains("seed")) t.seed = tr.at("seed").get<std::uint64_t>();
    if (tr.contains("refine_every")) t.refine_every = tr.at("refine_every").get<int>();
    if (tr.contains("convergence_tol")) {
      t.convergence_tol = tr.at("convergence_tol").get<double>();
    }

    if (j.contains("sim")) {
      const json& s = j.at("sim");
      if (s.contains("dt")) cfg.sim_dt = s.at("dt").get<double>();
      if (!(cfg.sim_dt > 0.0)) throw ConfigError("sim.dt must be > 0");
      if (s.contains("x0")) {
        for (const auto& x : s.at("x0")) {
          cfg.initial_states.push_back(parse_vector(x, "sim.x0"));
        }
      }
      if (s.contains("T")) cfg.sim_horizon = s.at("T").get<double>();
      if (s.contains("alpha")) cfg.monitor_alpha = s.at("alpha").get<double>();
    }

    if (j.contains("outputs")) {
      cfg.output_dir =
          (fs::path(base_dir) / j.at("outputs").at("dir").get<std::string>())
              .string();
    } else {
      cfg.output_dir = (fs::path(base_dir) / "out").string();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_run_config(text, fs::path(path).parent_path().string());
}

}  // namespace stlcbf::cli
