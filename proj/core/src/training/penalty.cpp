#include "stlcbf/training/penalty.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "stlcbf/certify/bounds.hpp"

namespace stlcbf::training {

namespace {

struct NetSpectral {
  std::vector<double> sigma;
  std::vector<Eigen::VectorXd> u1;  // top left singular vector per layer
  std::vector<Eigen::VectorXd> v1;  // top right singular vector per layer
};

NetSpectral decompose(const neural::CertNet& net) {
  NetSpectral s;
  const int L = net.layer_count();
  s.sigma.resize(static_cast<std::size_t>(L));
  s.u1.resize(static_cast<std::size_t>(L));
  s.v1.resize(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) {
    const Eigen::MatrixXd W = net.weight(k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    s.sigma[static_cast<std::size_t>(k)] = svd.singularValues()[0];
    s.u1[static_cast<std::size_t>(k)] = svd.matrixU().col(0);
    s.v1[static_cast<std::size_t>(k)] = svd.matrixV().col(0);
  }
  return s;
}

// bound value and d bound / d sigma_i for the plain Lipschitz bound
double lip_bound(const std::vector<double>& sigma, double K, double d1,
                 std::vector<double>* dsig) {
  const int L = static_cast<int>(sigma.size());
  const int hidden = L - 1;
  double prod = 1.0;
  for (double s : sigma) prod *= s;
  const double scale = K * std::pow(d1, hidden);
  if (dsig) {
    dsig->assign(sigma.size(), 0.0);
    for (int i = 0; i < L; ++i) {
      double partial = 1.0;
      for (int j = 0; j < L; ++j) {
        if (j != i) partial *= sigma[static_cast<std::size_t>(j)];
      }
      (*dsig)[static_cast<std::size_t>(i)] = scale * partial;
    }
  }
  return scale * prod;
}

// bound value and d bound / d sigma_i for the gradient-Lipschitz bound
double deriv_lip_bound(const std::vector<double>& sigma, double K, double Lc,
                       double d1, double d2, std::vector<double>* dsig) {
  const int L = static_cast<int>(sigma.size());
  const int hidden = L - 1;
  double prod = 1.0;
  for (double s : sigma) prod *= s;
  const double mlp_grad = prod * std::pow(d1, hidden);

  if (dsig) dsig->assign(sigma.size(), 0.0);
  double sum = 0.0;
  for (int k = 0; k < hidden; ++k) {
    double lip_ak = sigma[static_cast<std::size_t>(k)];
    for (int j = 0; j < k; ++j) lip_ak *= d1 * sigma[static_cast<std::size_t>(j)];
    const double term = prod * std::pow(d1, hidden - 1) * d2 * lip_ak;
    sum += term;
    if (dsig) {
      for (int i = 0; i < L; ++i) {
        const int expo = 1 + (i <= k ? 1 : 0);
        const double si = std::max(sigma[static_cast<std::size_t>(i)], 1e-12);
        (*dsig)[static_cast<std::size_t>(i)] += K * K * term * expo / si;
      }
    }
  }
  if (dsig) {
    for (int i = 0; i < L; ++i) {
      const double si = std::max(sigma[static_cast<std::size_t>(i)], 1e-12);
      (*dsig)[static_cast<std::size_t>(i)] += Lc * mlp_grad / si;
    }
  }
  return Lc * mlp_grad + K * K * sum;
}

void accumulate(const neural::CertNet& net, const NetSpectral& s,
                const std::vector<double>& dsig, double factor,
                std::span<double> grads) {
  std::size_t off = 0;
  for (int k = 0; k < net.layer_count(); ++k) {
    const auto& W = net.weight(k);
    const double c = factor * dsig[static_cast<std::size_t>(k)];
    if (c != 0.0) {
      Eigen::Map<neural::CertNet::RowMat> G(grads.data() + off, W.rows(), W.cols());
      G.noalias() += c * s.u1[static_cast<std::size_t>(k)] *
                     s.v1[static_cast<std::size_t>(k)].transpose();
    }
    off += static_cast<std::size_t>(W.size()) + static_cast<std::size_t>(W.rows());
  }
}

}  // namespace

double lipschitz_penalty(const neural::CertNet& barrier,
                         const neural::CertNet& controller, const Box& X,
                         double horizon, const LipschitzTargets& targets,
                         double weight) {
  if (weight == 0.0) return 0.0;
  const certify::NetBounds bb = certify::estimate_net_bounds(barrier, X, horizon);
  const certify::NetBounds cb = certify::estimate_net_bounds(controller, X, horizon);
  return weight * (std::max(0.0, bb.lipschitz - targets.L_b) +
                   std::max(0.0, bb.deriv_lipschitz - targets.L_db) +
                   std::max(0.0, cb.lipschitz - targets.L_g));
}

double lipschitz_penalty_grad(const neural::CertNet& barrier,
                              const neural::CertNet& controller, const Box& X,
                              double horizon, const LipschitzTargets& targets,
                              double weight, std::span<double> barrier_grads,
                              std::span<double> controller_grads) {
  if (weight == 0.0) return 0.0;
  double d1 = 0.0, d2 = 0.0;
  certify::activation_constants(barrier.activation(), d1, d2);
  double Kb = 0.0, Lcb = 0.0;
  certify::coupling_constants(barrier.coupling(), X, horizon, Kb, Lcb);
  const NetSpectral bs = decompose(barrier);

  std::vector<double> d_lb, d_ldb;
  const double bound_b = lip_bound(bs.sigma, Kb, d1, &d_lb);
  const double bound_db = deriv_lip_bound(bs.sigma, Kb, Lcb, d1, d2, &d_ldb);

  double gd1 = 0.0, gd2 = 0.0;
  certify::activation_constants(controller.activation(), gd1, gd2);
  double Kg = 0.0, Lcg = 0.0;
  certify::coupling_constants(controller.coupling(), X, horizon, Kg, Lcg);
  const NetSpectral cs = decompose(controller);
  std::vector<double> d_lg;
  const double bound_g = lip_bound(cs.sigma, Kg, gd1, &d_lg);

  double value = 0.0;
  if (bound_b > targets.L_b) {
    value += bound_b - targets.L_b;
    accumulate(barrier, bs, d_lb, weight, barrier_grads);
  }
  if (bound_db > targets.L_db) {
    value += bound_db - targets.L_db;
    accumulate(barrier, bs, d_ldb, weight, barrier_grads);
  }
  if (bound_g > targets.L_g) {
    value += bound_g - targets.L_g;
    accumulate(controller, cs, d_lg, weight, controller_grads);
  }
  return weight * value;
}

}  // namespace stlcbf::training
