#pragma once

#include <span>

#include "stlcbf/common/box.hpp"
#include "stlcbf/neural/net.hpp"

namespace stlcbf::training {

// Target Lipschitz bounds the certificate will assume.
struct LipschitzTargets {
  double L_b = 10.0;
  double L_db = 100.0;
  double L_g = 10.0;
};

// weight * [ ReLU(bound_b - L_b) + ReLU(bound_db - L_db) + ReLU(bound_g - L_g) ]
// with the bounds from the spectral-norm products over W = X x [0, T].
double lipschitz_penalty(const neural::CertNet& barrier,
                         const neural::CertNet& controller, const Box& X,
                         double horizon, const LipschitzTargets& targets,
                         double weight);

// Same value, with d penalty / d theta accumulated into the flat gradient
// layouts (spectral-norm subgradient u1 v1^T per weight matrix).
double lipschitz_penalty_grad(const neural::CertNet& barrier,
                              const neural::CertNet& controller, const Box& X,
                              double horizon, const LipschitzTargets& targets,
                              double weight, std::span<double> barrier_grads,
                              std::span<double> controller_grads);

}  // namespace stlcbf::training
