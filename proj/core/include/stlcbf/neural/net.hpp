#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stlcbf::neural {

enum class Activation { Tanh, Softplus, Sigmoid };
enum class CouplingKind { Product, Exponential };
enum class ClampKind { Hard, SmoothTanh };

// Fixed feature map at the network input: passes (x, t) through and appends
// one coupling term per state, t*x_i or exp(a_i t)*x_i. No trainable
// parameters; output layout [x_1..x_n, t, coupling_1..coupling_n].
struct CrossCoupling {
  CouplingKind kind = CouplingKind::Product;
  int n = 0;
  Eigen::VectorXd coeffs;  // exponential kind only

  static CrossCoupling product(int n);
  static CrossCoupling exponential(int n, Eigen::VectorXd coeffs);
  static CrossCoupling exponential(int n);  // coeffs = ones

  int out_dim() const { return 2 * n + 1; }
  void apply(const Eigen::VectorXd& x, double t, Eigen::VectorXd& out) const;
  // J(i, j) = d feature_i / d input_j with inputs ordered (x_1..x_n, t)
  void jacobian(const Eigen::VectorXd& x, double t, Eigen::MatrixXd& J) const;
};

// Per-channel output saturation for controller networks. Hard is the
// piecewise-linear clamp; SmoothTanh is a C^1 surrogate that also maps into
// [lb, ub] and is 1-Lipschitz.
struct OutputClamp {
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  ClampKind kind = ClampKind::Hard;
};

// Jacobian of the network output w.r.t. its (x, t) input.
struct InputJacobian {
  Eigen::MatrixXd dx;  // out_dim x n
  Eigen::VectorXd dt;  // out_dim

  // barrier networks: the single (dB/dx, dB/dt) gradient as one vector
  Eigen::VectorXd gradient() const;
};

// MLP over the cross-coupling features with smooth hidden activations.
// Barrier role: scalar output, no clamp. Controller role: m outputs fed
// through the clamp.
class CertNet {
 public:
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  CertNet(CrossCoupling coupling, std::vector<int> hidden, int out_dim,
          Activation act, std::optional<OutputClamp> clamp);

  static CertNet barrier(int state_dim, const std::vector<int>& hidden,
                         Activation act, CrossCoupling coupling);
  static CertNet controller(int state_dim, int input_dim,
                            const std::vector<int>& hidden, Activation act,
                            CrossCoupling coupling, OutputClamp clamp);

  int state_dim() const { return coupling_.n; }
  int out_dim() const { return static_cast<int>(b_.back().size()); }
  // number of weight layers (hidden count + 1)
  int layer_count() const { return static_cast<int>(w_.size()); }
  bool is_controller() const { return clamp_.has_value(); }

  const CrossCoupling& coupling() const { return coupling_; }
  Activation activation() const { return act_; }
  const OutputClamp& clamp() const;
  const RowMat& weight(int k) const { return w_[static_cast<std::size_t>(k)]; }
  RowMat& weight(int k) { return w_[static_cast<std::size_t>(k)]; }
  const Eigen::VectorXd& bias(int k) const { return b_[static_cast<std::size_t>(k)]; }
  Eigen::VectorXd& bias(int k) { return b_[static_cast<std::size_t>(k)]; }

  // uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases
  void init_params(std::uint64_t seed);

  std::size_t param_count() const;
  void get_params(std::span<double> out) const;
  void set_params(std::span<const double> in);

  // Throws on non-finite intermediates, naming the layer.
  Eigen::VectorXd forward(const Eigen::VectorXd& x, double t) const;
  double value(const Eigen::VectorXd& x, double t) const;  // scalar output

  InputJacobian input_jacobian(const Eigen::VectorXd& x, double t) const;

 private:
  CrossCoupling coupling_;
  std::vector<RowMat> w_;
  std::vector<Eigen::VectorXd> b_;
  Activation act_;
  std::optional<OutputClamp> clamp_;
};

// activation value/derivatives used across forward and gradient sweeps
double act_value(Activation a, double z);
double act_deriv(Activation a, double value, double z);
// second derivative expressed through the stored value/first derivative
double act_second(Activation a, double value, double deriv);

// clamp helpers (per channel)
double clamp_value(const OutputClamp& c, int j, double pre);
double clamp_slope(const OutputClamp& c, int j, double pre);

}  // namespace stlcbf::neural
