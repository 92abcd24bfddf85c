#include "stlcbf/neural/serialize.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stlcbf::neural {

using nlohmann::json;

namespace {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Softplus: return "softplus";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "tanh";
}

Activation activation_from(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "softplus") return Activation::Softplus;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw std::runtime_error("model: unknown activation '" + s + "'");
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

std::string save_model(const CertNet& net) {
  json j;
  j["version"] = 1;
  j["role"] = net.is_controller() ? "controller" : "barrier";
  j["n"] = net.state_dim();
  j["m"] = net.out_dim();
  json coup;
  coup["kind"] =
      net.coupling().kind == CouplingKind::Product ? "product" : "exponential";
  coup["coeffs"] = net.coupling().kind == CouplingKind::Exponential
                       ? vec_to_json(net.coupling().coeffs)
                       : json::array();
  j["coupling"] = coup;
  j["activation"] = activation_name(net.activation());
  json layers = json::array();
  for (int k = 0; k < net.layer_count(); ++k) {
    const auto& W = net.weight(k);
    json layer;
    layer["rows"] = W.rows();
    layer["cols"] = W.cols();
    json w = json::array();
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) w.push_back(W(i, c));
    }
    layer["w"] = std::move(w);
    layer["b"] = vec_to_json(net.bias(k));
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  if (net.is_controller()) {
    json cl;
    cl["lb"] = vec_to_json(net.clamp().lb);
    cl["ub"] = vec_to_json(net.clamp().ub);
    cl["kind"] = net.clamp().kind == ClampKind::Hard ? "hard" : "tanh";
    j["clamp"] = std::move(cl);
  }
  return j.dump(2);
}

CertNet load_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model: invalid JSON: ") + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != 1) {
    throw std::runtime_error("model: unsupported or missing version");
  }
  const std::string role = j.at("role").get<std::string>();
  const int n = j.at("n").get<int>();
  const json& coup = j.at("coupling");
  const std::string ckind = coup.at("kind").get<std::string>();
  CrossCoupling coupling;
  if (ckind == "product") {
    coupling = CrossCoupling::product(n);
  } else if (ckind == "exponential") {
    coupling = CrossCoupling::exponential(n, vec_from_json(coup.at("coeffs")));
  } else {
    throw std::runtime_error("model: unknown coupling kind '" + ckind + "'");
  }
  const Activation act = activation_from(j.at("activation").get<std::string>());

  const json& layers = j.at("layers");
  if (!layers.is_array() || layers.empty()) {
    throw std::runtime_error("model: layers array missing or empty");
  }
  std::vector<int> hidden;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    hidden.push_back(layers[k].at("rows").get<int>());
  }
  const int out_dim = layers.back().at("rows").get<int>();

  std::optional<OutputClamp> clamp;
  if (role == "controller") {
    const json& cl = j.at("clamp");
    OutputClamp oc;
    oc.lb = vec_from_json(cl.at("lb"));
    oc.ub = vec_from_json(cl.at("ub"));
    const std::string kind = cl.value("kind", "hard");
    oc.kind = kind == "tanh" ? ClampKind::SmoothTanh : ClampKind::Hard;
    clamp = std::move(oc);
  } else if (role != "barrier") {
    throw std::runtime_error("model: unknown role '" + role + "'");
  }

  CertNet net(coupling, hidden, out_dim, act, std::move(clamp));

  int expect_cols = coupling.out_dim();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const json& layer = layers[k];
    const int rows = layer.at("rows").get<int>();
    const int cols = layer.at("cols").get<int>();
    if (cols != expect_cols) {
      throw std::runtime_error("model: layer " + std::to_string(k) + " has " +
                               std::to_string(cols) + " columns, expected " +
                               std::to_string(expect_cols));
    }
    const json& w = layer.at("w");
    const json& b = layer.at("b");
    if (static_cast<int>(w.size()) != rows * cols) {
      throw std::runtime_error("model: layer " + std::to_string(k) +
                               " weight count mismatch");
    }
    if (static_cast<int>(b.size()) != rows) {
      throw std::runtime_error("model: layer " + std::to_string(k) +
                               " bias count mismatch");
    }
    auto& W = net.weight(static_cast<int>(k));
    for (int i = 0; i < rows; ++i) {
      for (int c = 0; c < cols; ++c) {
        W(i, c) = w[static_cast<std::size_t>(i * cols + c)].get<double>();
      }
    }
    net.bias(static_cast<int>(k)) = vec_from_json(b);
    expect_cols = rows;
  }
  return net;
}

void save_model_file(const CertNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << save_model(net) << "\n";
}

CertNet load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return load_model(text);
}

}  // namespace stlcbf::neural
