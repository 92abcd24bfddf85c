#include "stlcbf/certify/bounds.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "stlcbf/common/rng.hpp"

namespace stlcbf::certify {

void activation_constants(neural::Activation a, double& d1, double& d2) {
  switch (a) {
    case neural::Activation::Tanh:
      d1 = 1.0;
      d2 = 4.0 / (3.0 * std::sqrt(3.0));  // max |tanh''|
      return;
    case neural::Activation::Softplus:
      d1 = 1.0;
      d2 = 0.25;
      return;
    case neural::Activation::Sigmoid:
      d1 = 0.25;
      d2 = 1.0 / (6.0 * std::sqrt(3.0));
      return;
  }
}

void coupling_constants(const neural::CrossCoupling& c, const Box& X,
                        double horizon, double& norm_bound, double& lip_bound) {
  const int n = c.n;
  const Eigen::VectorXd m = X.max_abs();
  if (c.kind == neural::CouplingKind::Product) {
    norm_bound = std::sqrt(n + 1.0 + n * horizon * horizon + m.squaredNorm());
    lip_bound = std::sqrt(static_cast<double>(n));
    return;
  }
  double k2 = n + 1.0;
  double l2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = c.coeffs[i];
    const double E = std::exp(std::max(a * horizon, 0.0));
    k2 += E * E * (1.0 + a * a * m[i] * m[i]);
    const double ci = std::abs(a) * E;
    const double di = std::abs(a) * E * std::sqrt(1.0 + a * a * m[i] * m[i]);
    l2 += ci * ci + di * di;
  }
  norm_bound = std::sqrt(k2);
  lip_bound = std::sqrt(l2);
}

NetBounds estimate_net_bounds(const neural::CertNet& net, const Box& X,
                              double horizon, NetBoundParts* parts) {
  const int L = net.layer_count();
  double d1 = 0.0, d2 = 0.0;
  activation_constants(net.activation(), d1, d2);

  std::vector<double> sigma(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) {
    const Eigen::MatrixXd W = net.weight(k);
    if (W.rows() == 1) {
      sigma[static_cast<std::size_t>(k)] = W.row(0).norm();
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
      sigma[static_cast<std::size_t>(k)] = svd.singularValues()[0];
    }
  }

  double prod = 1.0;
  for (double s : sigma) prod *= s;
  const int hidden = L - 1;
  const double mlp_grad = prod * std::pow(d1, hidden);

  // gradient Lipschitz of the dense stack: one sigma''-slot per hidden layer
  double mlp_grad_lip = 0.0;
  for (int k = 0; k < hidden; ++k) {
    double lip_ak = sigma[static_cast<std::size_t>(k)];
    for (int j = 0; j < k; ++j) lip_ak *= d1 * sigma[static_cast<std::size_t>(j)];
    mlp_grad_lip += prod * std::pow(d1, hidden - 1) * d2 * lip_ak;
  }

  double K = 0.0, Lc = 0.0;
  coupling_constants(net.coupling(), X, horizon, K, Lc);

  NetBounds out;
  out.lipschitz = K * mlp_grad;
  out.grad_bound = out.lipschitz;
  out.deriv_lipschitz = Lc * mlp_grad + K * K * mlp_grad_lip;

  if (parts) {
    parts->layer_norms = sigma;
    parts->coupling_norm = K;
    parts->coupling_lip = Lc;
    parts->mlp_grad = mlp_grad;
    parts->mlp_grad_lip = mlp_grad_lip;
    parts->act_d1 = d1;
    parts->act_d2 = d2;
  }
  return out;
}

DynamicsBoundsReport estimate_dynamics_bounds(const dyn::SystemModel& sys,
                                              const Box& X, const Box& U,
                                              int pairs, std::uint64_t seed) {
  DynamicsBoundsReport rep;
  rep.analytic = sys.analytic_bounds(X, U);

  Rng rng(seed);
  auto sample = [&rng](const Box& b) {
    Eigen::VectorXd v(b.dim());
    for (int i = 0; i < b.dim(); ++i) v[i] = rng.uniform(b.lo[i], b.hi[i]);
    return v;
  };

  dyn::DynamicsBounds mc;
  for (int k = 0; k < pairs; ++k) {
    const Eigen::VectorXd x1 = sample(X);
    const Eigen::VectorXd x2 = sample(X);
    const Eigen::VectorXd u1 = sample(U);
    const Eigen::VectorXd u2 = sample(U);
    const Eigen::VectorXd f11 = sys.eval_f(x1, u1);
    mc.M_f = std::max(mc.M_f, f11.norm());
    const double dx = (x1 - x2).norm();
    if (dx > 1e-12) {
      mc.L_x = std::max(mc.L_x, (f11 - sys.eval_f(x2, u1)).norm() / dx);
    }
    const double du = (u1 - u2).norm();
    if (du > 1e-12) {
      mc.L_u = std::max(mc.L_u, (f11 - sys.eval_f(x1, u2)).norm() / du);
    }
  }
  rep.monte_carlo = mc;
  return rep;
}

}  // namespace stlcbf::certify
