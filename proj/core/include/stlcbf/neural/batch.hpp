#pragma once

#include <span>
#include <vector>

#include "stlcbf/neural/net.hpp"

namespace stlcbf::neural {

// Column-batched counterparts of the per-sample kernels in grad.hpp: a chunk
// of samples flows through each layer as one matrix product. Results agree
// with the per-sample kernels up to summation order; parameter gradients
// contract over the chunk in one GEMM per layer.
struct BatchWorkspace {
  using Mat = Eigen::MatrixXd;
  using Row = Eigen::RowVectorXd;

  std::vector<Mat> z;     // z[0..L-1], layer inputs per column
  std::vector<Mat> a;     // hidden pre-activations
  std::vector<Mat> sp;    // sigma'(a)
  std::vector<Mat> zdot;  // input tangents
  std::vector<Mat> adot;
  std::vector<Mat> p;     // reverse cotangents of z
  std::vector<Mat> r;     // reverse cotangents of zdot
  Mat out;                // outputs (pre-clamp for controllers)
  Mat u;                  // clamped outputs
  Mat cl_slope;           // clamp slopes
  Mat z0in;               // (n+1) x C staging: states + time
  Mat gamma;              // (n+1) x C input gradients
  Mat expat;              // exp(a_i t_c), exponential coupling only
  Row phi;                // tangent outputs
  std::vector<std::size_t> w_off, b_off;
  int cols = 0;

  void resize(const CertNet& net, int max_cols);
};

// Forward over columns [0, cols) of X (n x C) and T (C). Stores activations;
// controllers also fill u and cl_slope.
void batch_forward(const CertNet& net, const Eigen::MatrixXd& X,
                   const Eigen::RowVectorXd& T, int cols, BatchWorkspace& ws);

// Input gradients (scalar nets): ws.gamma columns.
void batch_input_gradient(const CertNet& net, BatchWorkspace& ws);

// Tangents along per-column directions V ((n+1) x C): fills ws.phi.
void batch_tangent(const CertNet& net, const Eigen::MatrixXd& V, BatchWorkspace& ws);

// Accumulates sum_c d(e_y[c] out_c + e_phi[c] phi_c)/dtheta into grads.
// Pass with_tangent = false when e_phi is identically zero.
void batch_backprop_scalar(const CertNet& net, const Eigen::RowVectorXd& e_y,
                           const Eigen::RowVectorXd& e_phi, bool with_tangent,
                           BatchWorkspace& ws, std::span<double> grads);

// Accumulates sum_c d(e_u.col(c) . u_c)/dtheta into grads. Clobbers ws.out.
void batch_backprop_vector(const CertNet& net, const Eigen::MatrixXd& e_u,
                           BatchWorkspace& ws, std::span<double> grads);

// Elementwise activation over a matrix block, vectorized; value and slope.
// Values agree with act_value up to an ulp (exp-based formulas).
void batch_activation(Activation act, const Eigen::Ref<const Eigen::MatrixXd>& a,
                      Eigen::Ref<Eigen::MatrixXd> value,
                      Eigen::Ref<Eigen::MatrixXd> slope);

}  // namespace stlcbf::neural
