#pragma once

#include <span>
#include <vector>

#include "stlcbf/neural/net.hpp"

namespace stlcbf::neural {

// Scratch buffers for repeated sweeps over one network; allocate one per
// worker thread and reuse across samples.
struct NetWorkspace {
  std::vector<Eigen::VectorXd> z;     // z[0..L-1]: layer inputs, z[0] = coupling
  std::vector<Eigen::VectorXd> a;     // a[0..L-2]: hidden pre-activations
  std::vector<Eigen::VectorXd> sp;    // sigma'(a[k])
  std::vector<Eigen::VectorXd> zdot;  // input-tangent of z
  std::vector<Eigen::VectorXd> adot;  // input-tangent of a
  std::vector<Eigen::VectorXd> p;     // reverse cotangent of z[k]
  std::vector<Eigen::VectorXd> r;     // reverse cotangent of zdot[k]
  Eigen::VectorXd out;                // output (pre-clamp for controllers)
  Eigen::VectorXd u;                  // clamped output (controllers)
  Eigen::VectorXd cl_slope;           // clamp slope per channel
  Eigen::MatrixXd CJ;                 // coupling jacobian at the sample
  Eigen::VectorXd gamma;              // (d out/d x, d out/d t), scalar nets
  std::vector<std::size_t> w_off;     // parameter offsets per layer
  std::vector<std::size_t> b_off;
  double phi = 0.0;                   // tangent output

  void resize(const CertNet& net);
};

// Forward pass storing activations; for controllers also clamps and records
// per-channel slopes. No finite checks here; callers police batch results.
void forward_ws(const CertNet& net, const Eigen::VectorXd& x, double t,
                NetWorkspace& ws);

// Input gradient of a scalar net into ws.gamma; requires forward_ws.
void input_gradient_ws(const CertNet& net, NetWorkspace& ws);

// Forward tangent along input direction v (length n+1); requires forward_ws.
// Returns phi = gamma . v and stores the tangents for backprop_scalar_ws.
double tangent_ws(const CertNet& net, const Eigen::VectorXd& v, NetWorkspace& ws);

// Accumulates d(e_y * out + e_phi * phi)/d theta for a scalar net into
// grads (layout of CertNet::get_params). The e_phi path differentiates
// through the input-gradient computation (second-order terms). Requires
// forward_ws and, when e_phi != 0, tangent_ws.
void backprop_scalar_ws(const CertNet& net, double e_y, double e_phi,
                        NetWorkspace& ws, std::span<double> grads);

// Accumulates d(e_u . u)/d theta for a controller net into grads; the clamp
// slope gates each channel. Requires forward_ws.
void backprop_vector_ws(const CertNet& net, const Eigen::VectorXd& e_u,
                        NetWorkspace& ws, std::span<double> grads);

}  // namespace stlcbf::neural
