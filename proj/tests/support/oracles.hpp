#pragma once

// Test-only oracles, independent of the library's evaluation paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "stlcbf/common/rng.hpp"
#include "stlcbf/neural/net.hpp"
#include "stlcbf/stl/ast.hpp"
#include "stlcbf/stl/robustness.hpp"

namespace oracles {

using stlcbf::Rng;
namespace stl = stlcbf::stl;
namespace neural = stlcbf::neural;

// ---- brute-force robustness ------------------------------------------------

// Recursive reference evaluator written against the semantics directly;
// collects child values and folds them with explicit loops.
inline double brute_robustness(const stl::Formula& f, const Eigen::VectorXd& x,
                               double true_value = stl::kTrueRobustness) {
  if (std::holds_alternative<stl::TrueNode>(f.node)) return true_value;
  if (const auto* atom = std::get_if<stl::PredicateAtom>(&f.node)) {
    if (atom->kind == stl::PredicateAtom::Kind::Affine) {
      double s = atom->offset;
      for (int i = 0; i < x.size(); ++i) s += atom->coeff[i] * x[i];
      return s;
    }
    double nrm = 0.0;
    std::vector<double> comp(static_cast<std::size_t>(x.size()));
    for (int i = 0; i < x.size(); ++i) {
      comp[static_cast<std::size_t>(i)] =
          std::abs(atom->scale[i] * (x[i] - atom->center[i]));
    }
    switch (atom->order) {
      case stl::NormOrder::L1:
        for (double c : comp) nrm += c;
        break;
      case stl::NormOrder::L2: {
        double s = 0.0;
        for (double c : comp) s += c * c;
        nrm = std::sqrt(s);
        break;
      }
      case stl::NormOrder::LInf:
        for (double c : comp) nrm = std::max(nrm, c);
        break;
    }
    return atom->radius - nrm;
  }
  if (const auto* nn = std::get_if<stl::NotNode>(&f.node)) {
    return -brute_robustness(*nn->child, x, true_value);
  }
  std::vector<double> vals;
  bool is_and = false;
  if (const auto* an = std::get_if<stl::AndNode>(&f.node)) {
    is_and = true;
    for (const auto& c : an->children) vals.push_back(brute_robustness(*c, x, true_value));
  } else {
    const auto& on = std::get<stl::OrNode>(f.node);
    for (const auto& c : on.children) vals.push_back(brute_robustness(*c, x, true_value));
  }
  return is_and ? *std::min_element(vals.begin(), vals.end())
                : *std::max_element(vals.begin(), vals.end());
}

// ---- random formulas ---------------------------------------------------------

inline stl::PredicateAtom random_atom(Rng& rng, int n) {
  if (rng.uniform() < 0.5) {
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = rng.uniform(-2.0, 2.0);
    return stl::PredicateAtom::affine(c, rng.uniform(-1.0, 1.0));
  }
  Eigen::VectorXd center(n), scale(n);
  for (int i = 0; i < n; ++i) {
    center[i] = rng.uniform(-1.0, 1.0);
    scale[i] = rng.uniform(0.2, 2.0);
  }
  const stl::NormOrder order =
      std::array<stl::NormOrder, 3>{stl::NormOrder::L1, stl::NormOrder::L2,
                                    stl::NormOrder::LInf}[rng.index(3)];
  return stl::PredicateAtom::norm(center, scale, rng.uniform(0.1, 2.0), order);
}

inline stl::FormulaPtr random_formula(Rng& rng, int n, int depth) {
  const double p = rng.uniform();
  if (depth == 0 || p < 0.35) {
    if (p < 0.05) return stl::make_true();
    return stl::make_atom(random_atom(rng, n));
  }
  if (p < 0.55) return stl::make_not(random_formula(rng, n, depth - 1));
  const int arity = 2 + static_cast<int>(rng.index(2));
  std::vector<stl::FormulaPtr> kids;
  for (int i = 0; i < arity; ++i) kids.push_back(random_formula(rng, n, depth - 1));
  return p < 0.78 ? stl::make_and(std::move(kids)) : stl::make_or(std::move(kids));
}

// ---- finite differences ------------------------------------------------------

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// central difference of f along coordinate i of a parameter vector
inline double central_diff(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> params, std::size_t i, double h) {
  const double p0 = params[i];
  params[i] = p0 + h;
  const double fp = f(params);
  params[i] = p0 - h;
  const double fm = f(params);
  return (fp - fm) / (2.0 * h);
}

// ---- random networks --------------------------------------------------------

inline neural::CertNet random_barrier(Rng& rng, int n, std::vector<int> hidden,
                                      neural::CouplingKind kind,
                                      neural::Activation act = neural::Activation::Tanh) {
  neural::CrossCoupling coupling;
  if (kind == neural::CouplingKind::Product) {
    coupling = neural::CrossCoupling::product(n);
  } else {
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = rng.uniform(-0.8, 0.8);
    coupling = neural::CrossCoupling::exponential(n, a);
  }
  neural::CertNet net = neural::CertNet::barrier(n, hidden, act, coupling);
  net.init_params(rng.next_u64());
  return net;
}

inline neural::Activation act_of(Rng& rng) {
  const std::array<neural::Activation, 3> acts{neural::Activation::Tanh,
                                               neural::Activation::Softplus,
                                               neural::Activation::Sigmoid};
  return acts[rng.index(3)];
}

inline neural::CertNet random_controller(Rng& rng, int n, int m,
                                         std::vector<int> hidden,
                                         neural::CouplingKind kind,
                                         neural::Activation act = neural::Activation::Tanh,
                                         neural::ClampKind clamp_kind =
                                             neural::ClampKind::Hard) {
  neural::CrossCoupling coupling;
  if (kind == neural::CouplingKind::Product) {
    coupling = neural::CrossCoupling::product(n);
  } else {
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = rng.uniform(-0.8, 0.8);
    coupling = neural::CrossCoupling::exponential(n, a);
  }
  neural::OutputClamp clamp;
  clamp.lb = Eigen::VectorXd::Constant(m, -0.5);
  clamp.ub = Eigen::VectorXd::Constant(m, 0.5);
  clamp.kind = clamp_kind;
  neural::CertNet net =
      neural::CertNet::controller(n, m, hidden, act, coupling, clamp);
  net.init_params(rng.next_u64());
  return net;
}

}  // namespace oracles
