#pragma once

#include <cstdint>
#include <vector>

#include "stlcbf/common/box.hpp"
#include "stlcbf/dynamics/system.hpp"
#include "stlcbf/neural/net.hpp"

namespace stlcbf::certify {

// Everything the composite Lipschitz constant needs.
struct BoundsEstimate {
  double L_b = 0.0;   // barrier Lipschitz bound
  double L_db = 0.0;  // barrier-gradient Lipschitz bound
  double L_g = 0.0;   // controller Lipschitz bound
  double L_x = 0.0;   // dynamics Lipschitz in x
  double L_u = 0.0;   // dynamics Lipschitz in u
  double M_f = 0.0;   // sup ||f||
  double M_b = 0.0;   // sup ||(dB/dx, dB/dt)||
  double alpha = 0.0; // class-K slope
};

struct NetBounds {
  double lipschitz = 0.0;        // |net(p) - net(q)| <= lipschitz * |p - q| on W
  double grad_bound = 0.0;       // sup ||input gradient|| (== lipschitz here)
  double deriv_lipschitz = 0.0;  // Lipschitz bound of the input gradient map
};

// per-factor breakdown, mainly for tests and diagnostics
struct NetBoundParts {
  std::vector<double> layer_norms;  // spectral norm per weight matrix
  double coupling_norm = 0.0;       // sup ||coupling jacobian|| over W
  double coupling_lip = 0.0;        // Lipschitz constant of the coupling jacobian
  double mlp_grad = 0.0;            // gradient bound of the dense stack
  double mlp_grad_lip = 0.0;        // gradient Lipschitz bound of the dense stack
  double act_d1 = 0.0;              // sup |sigma'|
  double act_d2 = 0.0;              // sup |sigma''|
};

// Layer-wise spectral-norm-product upper bounds over W = X x [0, T]. The
// coupling layer's jacobian norm and its Lipschitz constant are computed
// from box extremes. Conservative but sound; exact SVD per layer.
NetBounds estimate_net_bounds(const neural::CertNet& net, const Box& X,
                              double horizon, NetBoundParts* parts = nullptr);

// sup |sigma'| and sup |sigma''| of the activation
void activation_constants(neural::Activation a, double& d1, double& d2);

// sup of the coupling jacobian's spectral norm over W and a Lipschitz
// constant for the jacobian map itself (Frobenius-style bounds)
void coupling_constants(const neural::CrossCoupling& c, const Box& X,
                        double horizon, double& norm_bound, double& lip_bound);

struct DynamicsBoundsReport {
  dyn::DynamicsBounds analytic;     // declared/analytic, enters certificates
  dyn::DynamicsBounds monte_carlo;  // sampled lower-bound sanity estimate
};

// Throws when the system declares no analytic bounds: certificates must not
// rest on sampled estimates.
DynamicsBoundsReport estimate_dynamics_bounds(const dyn::SystemModel& sys,
                                              const Box& X, const Box& U,
                                              int pairs = 10000,
                                              std::uint64_t seed = 2024);

}  // namespace stlcbf::certify
