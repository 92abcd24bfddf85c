#include "stlcbf/neural/net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "stlcbf/common/rng.hpp"

namespace stlcbf::neural {

CrossCoupling CrossCoupling::product(int n) {
  if (n < 1) throw std::invalid_argument("coupling: state dimension must be >= 1");
  CrossCoupling c;
  c.kind = CouplingKind::Product;
  c.n = n;
  return c;
}

CrossCoupling CrossCoupling::exponential(int n, Eigen::VectorXd coeffs) {
  if (n < 1) throw std::invalid_argument("coupling: state dimension must be >= 1");
  if (coeffs.size() != n) {
    throw std::invalid_argument("coupling: coefficient count must equal state dimension");
  }
  CrossCoupling c;
  c.kind = CouplingKind::Exponential;
  c.n = n;
  c.coeffs = std::move(coeffs);
  return c;
}

CrossCoupling CrossCoupling::exponential(int n) {
  return exponential(n, Eigen::VectorXd::Ones(n));
}

void CrossCoupling::apply(const Eigen::VectorXd& x, double t,
                          Eigen::VectorXd& out) const {
  out.resize(out_dim());
  out.head(n) = x;
  out[n] = t;
  if (kind == CouplingKind::Product) {
    out.tail(n) = t * x;
  } else {
    for (int i = 0; i < n; ++i) {
      out[n + 1 + i] = std::exp(coeffs[i] * t) * x[i];
    }
  }
}

void CrossCoupling::jacobian(const Eigen::VectorXd& x, double t,
                             Eigen::MatrixXd& J) const {
  J.setZero(out_dim(), n + 1);
  J.topLeftCorner(n, n).setIdentity();
  J(n, n) = 1.0;
  if (kind == CouplingKind::Product) {
    for (int i = 0; i < n; ++i) {
      J(n + 1 + i, i) = t;
      J(n + 1 + i, n) = x[i];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double e = std::exp(coeffs[i] * t);
      J(n + 1 + i, i) = e;
      J(n + 1 + i, n) = coeffs[i] * e * x[i];
    }
  }
}

double act_value(Activation a, double z) {
  switch (a) {
    case Activation::Tanh:
      return std::tanh(z);
    case Activation::Softplus:
      return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    case Activation::Sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
  }
  return 0.0;
}

double act_deriv(Activation a, double value, double z) {
  switch (a) {
    case Activation::Tanh:
      return 1.0 - value * value;
    case Activation::Softplus:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::Sigmoid:
      return value * (1.0 - value);
  }
  return 0.0;
}

double act_second(Activation a, double value, double deriv) {
  switch (a) {
    case Activation::Tanh:
      return -2.0 * value * deriv;
    case Activation::Softplus:
      return deriv * (1.0 - deriv);
    case Activation::Sigmoid:
      return deriv * (1.0 - 2.0 * value);
  }
  return 0.0;
}

double clamp_value(const OutputClamp& c, int j, double pre) {
  const double lb = c.lb[j], ub = c.ub[j];
  if (c.kind == ClampKind::Hard) {
    return pre < lb ? lb : (pre > ub ? ub : pre);
  }
  const double hw = 0.5 * (ub - lb);
  if (hw <= 0.0) return lb;
  const double mid = 0.5 * (lb + ub);
  return mid + hw * std::tanh((pre - mid) / hw);
}

double clamp_slope(const OutputClamp& c, int j, double pre) {
  const double lb = c.lb[j], ub = c.ub[j];
  if (c.kind == ClampKind::Hard) {
    return (pre > lb && pre < ub) ? 1.0 : 0.0;
  }
  const double hw = 0.5 * (ub - lb);
  if (hw <= 0.0) return 0.0;
  const double mid = 0.5 * (lb + ub);
  const double th = std::tanh((pre - mid) / hw);
  return 1.0 - th * th;
}

Eigen::VectorXd InputJacobian::gradient() const {
  if (dx.rows() != 1) {
    throw std::logic_error("gradient() requires a scalar-output network");
  }
  Eigen::VectorXd g(dx.cols() + 1);
  g.head(dx.cols()) = dx.row(0).transpose();
  g[dx.cols()] = dt[0];
  return g;
}

CertNet::CertNet(CrossCoupling coupling, std::vector<int> hidden, int out_dim,
                 Activation act, std::optional<OutputClamp> clamp)
    : coupling_(std::move(coupling)), act_(act), clamp_(std::move(clamp)) {
  if (out_dim < 1) throw std::invalid_argument("net: output dimension must be >= 1");
  int prev = coupling_.out_dim();
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("net: hidden width must be >= 1");
    w_.emplace_back(RowMat::Zero(h, prev));
    b_.emplace_back(Eigen::VectorXd::Zero(h));
    prev = h;
  }
  w_.emplace_back(RowMat::Zero(out_dim, prev));
  b_.emplace_back(Eigen::VectorXd::Zero(out_dim));
  if (clamp_) {
    if (clamp_->lb.size() != out_dim || clamp_->ub.size() != out_dim) {
      throw std::invalid_argument("net: clamp bound dimension mismatch");
    }
    for (int j = 0; j < out_dim; ++j) {
      if (!(clamp_->lb[j] <= clamp_->ub[j])) {
        throw std::invalid_argument("net: clamp lb > ub on channel " + std::to_string(j));
      }
    }
  }
}

CertNet CertNet::barrier(int state_dim, const std::vector<int>& hidden,
                         Activation act, CrossCoupling coupling) {
  if (coupling.n != state_dim) {
    throw std::invalid_argument("barrier: coupling dimension mismatch");
  }
  return CertNet(std::move(coupling), hidden, 1, act, std::nullopt);
}

CertNet CertNet::controller(int state_dim, int input_dim,
                            const std::vector<int>& hidden, Activation act,
                            CrossCoupling coupling, OutputClamp clamp) {
  if (coupling.n != state_dim) {
    throw std::invalid_argument("controller: coupling dimension mismatch");
  }
  return CertNet(std::move(coupling), hidden, input_dim, act, std::move(clamp));
}

const OutputClamp& CertNet::clamp() const {
  if (!clamp_) throw std::logic_error("net has no output clamp");
  return *clamp_;
}

void CertNet::init_params(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t k = 0; k < w_.size(); ++k) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(w_[k].rows() + w_[k].cols()));
    for (Eigen::Index i = 0; i < w_[k].rows(); ++i) {
      for (Eigen::Index j = 0; j < w_[k].cols(); ++j) {
        w_[k](i, j) = rng.uniform(-bound, bound);
      }
    }
    b_[k].setZero();
  }
}

std::size_t CertNet::param_count() const {
  std::size_t c = 0;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    c += static_cast<std::size_t>(w_[k].size()) +
         static_cast<std::size_t>(b_[k].size());
  }
  return c;
}

void CertNet::get_params(std::span<double> out) const {
  if (out.size() != param_count()) {
    throw std::invalid_argument("get_params: buffer size mismatch");
  }
  std::size_t off = 0;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    const auto& W = w_[k];
    std::copy(W.data(), W.data() + W.size(), out.data() + off);
    off += static_cast<std::size_t>(W.size());
    std::copy(b_[k].data(), b_[k].data() + b_[k].size(), out.data() + off);
    off += static_cast<std::size_t>(b_[k].size());
  }
}

void CertNet::set_params(std::span<const double> in) {
  if (in.size() != param_count()) {
    throw std::invalid_argument("set_params: buffer size mismatch");
  }
  std::size_t off = 0;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    auto& W = w_[k];
    std::copy(in.data() + off, in.data() + off + W.size(), W.data());
    off += static_cast<std::size_t>(W.size());
    std::copy(in.data() + off, in.data() + off + b_[k].size(), b_[k].data());
    off += static_cast<std::size_t>(b_[k].size());
  }
}

Eigen::VectorXd CertNet::forward(const Eigen::VectorXd& x, double t) const {
  if (x.size() != coupling_.n) {
    throw std::invalid_argument("forward: state dimension mismatch");
  }
  Eigen::VectorXd z;
  coupling_.apply(x, t, z);
  const int L = layer_count();
  for (int k = 0; k < L; ++k) {
    Eigen::VectorXd a = w_[static_cast<std::size_t>(k)] * z +
                        b_[static_cast<std::size_t>(k)];
    if (!a.allFinite()) {
      throw std::runtime_error("non-finite activation after layer " +
                               std::to_string(k));
    }
    if (k + 1 < L) {
      z.resize(a.size());
      for (Eigen::Index i = 0; i < a.size(); ++i) z[i] = act_value(act_, a[i]);
    } else {
      z = std::move(a);
    }
  }
  if (clamp_) {
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      z[j] = clamp_value(*clamp_, static_cast<int>(j), z[j]);
    }
  }
  return z;
}

double CertNet::value(const Eigen::VectorXd& x, double t) const {
  if (out_dim() != 1) {
    throw std::logic_error("value() requires a scalar-output network");
  }
  return forward(x, t)[0];
}

InputJacobian CertNet::input_jacobian(const Eigen::VectorXd& x, double t) const {
  if (x.size() != coupling_.n) {
    throw std::invalid_argument("input_jacobian: state dimension mismatch");
  }
  const int n = coupling_.n;
  Eigen::VectorXd z;
  coupling_.apply(x, t, z);
  Eigen::MatrixXd Jz;
  coupling_.jacobian(x, t, Jz);

  const int L = layer_count();
  Eigen::VectorXd pre;
  for (int k = 0; k < L; ++k) {
    const auto& W = w_[static_cast<std::size_t>(k)];
    pre = W * z + b_[static_cast<std::size_t>(k)];
    Eigen::MatrixXd Ja = W * Jz;
    if (k + 1 < L) {
      z.resize(pre.size());
      Jz.resize(Ja.rows(), Ja.cols());
      for (Eigen::Index i = 0; i < pre.size(); ++i) {
        const double v = act_value(act_, pre[i]);
        const double d = act_deriv(act_, v, pre[i]);
        z[i] = v;
        Jz.row(i) = d * Ja.row(i);
      }
    } else {
      z = pre;
      Jz = std::move(Ja);
    }
  }
  if (clamp_) {
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      Jz.row(j) *= clamp_slope(*clamp_, static_cast<int>(j), z[j]);
    }
  }
  InputJacobian out;
  out.dx = Jz.leftCols(n);
  out.dt = Jz.col(n);
  return out;
}

}  // namespace stlcbf::neural
