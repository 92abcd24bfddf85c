#include "stlcbf/neural/batch.hpp"

#include <cmath>

namespace stlcbf::neural {

void BatchWorkspace::resize(const CertNet& net, int max_cols) {
  const int L = net.layer_count();
  const int n = net.state_dim();
  z.resize(static_cast<std::size_t>(L));
  zdot.resize(static_cast<std::size_t>(L));
  p.resize(static_cast<std::size_t>(L));
  r.resize(static_cast<std::size_t>(L));
  a.resize(static_cast<std::size_t>(L > 0 ? L - 1 : 0));
  sp.resize(a.size());
  adot.resize(a.size());
  w_off.resize(static_cast<std::size_t>(L));
  b_off.resize(static_cast<std::size_t>(L));

  std::size_t off = 0;
  int in = net.coupling().out_dim();
  for (int k = 0; k < L; ++k) {
    const auto& W = net.weight(k);
    z[static_cast<std::size_t>(k)].resize(in, max_cols);
    zdot[static_cast<std::size_t>(k)].resize(in, max_cols);
    p[static_cast<std::size_t>(k)].resize(in, max_cols);
    r[static_cast<std::size_t>(k)].resize(in, max_cols);
    if (k < L - 1) {
      a[static_cast<std::size_t>(k)].resize(W.rows(), max_cols);
      sp[static_cast<std::size_t>(k)].resize(W.rows(), max_cols);
      adot[static_cast<std::size_t>(k)].resize(W.rows(), max_cols);
    }
    w_off[static_cast<std::size_t>(k)] = off;
    off += static_cast<std::size_t>(W.size());
    b_off[static_cast<std::size_t>(k)] = off;
    off += static_cast<std::size_t>(W.rows());
    in = static_cast<int>(W.rows());
  }
  out.resize(net.out_dim(), max_cols);
  u.resize(net.out_dim(), max_cols);
  cl_slope.resize(net.out_dim(), max_cols);
  z0in.resize(n + 1, max_cols);
  gamma.resize(n + 1, max_cols);
  expat.resize(n, max_cols);
  phi.resize(max_cols);
  cols = 0;
}

void batch_activation(Activation act, const Eigen::Ref<const Eigen::MatrixXd>& a,
                      Eigen::Ref<Eigen::MatrixXd> value,
                      Eigen::Ref<Eigen::MatrixXd> slope) {
  switch (act) {
    case Activation::Tanh: {
      // tanh via one vectorized exp; exact saturation past |a| = 20
      value.array() = (2.0 * a.array().min(20.0).max(-20.0)).exp();
      value.array() = (value.array() - 1.0) / (value.array() + 1.0);
      slope.array() = 1.0 - value.array().square();
      return;
    }
    case Activation::Softplus: {
      slope.array() = 1.0 / (1.0 + (-a.array()).exp());
      value.array() = a.array().max(0.0) + (1.0 + (-a.array().abs()).exp()).log();
      return;
    }
    case Activation::Sigmoid: {
      value.array() = 1.0 / (1.0 + (-a.array()).exp());
      slope.array() = value.array() * (1.0 - value.array());
      return;
    }
  }
}

namespace {

// sigma'' from stored value and slope, vectorized
void batch_second(Activation act, const Eigen::Ref<const Eigen::MatrixXd>& value,
                  const Eigen::Ref<const Eigen::MatrixXd>& slope,
                  Eigen::Ref<Eigen::MatrixXd> s2) {
  switch (act) {
    case Activation::Tanh:
      s2.array() = -2.0 * value.array() * slope.array();
      return;
    case Activation::Softplus:
      s2.array() = slope.array() * (1.0 - slope.array());
      return;
    case Activation::Sigmoid:
      s2.array() = slope.array() * (1.0 - 2.0 * value.array());
      return;
  }
}

inline Eigen::Map<CertNet::RowMat> weight_grad(std::span<double> grads,
                                               const BatchWorkspace& ws,
                                               const CertNet& net, int k) {
  return Eigen::Map<CertNet::RowMat>(
      grads.data() + ws.w_off[static_cast<std::size_t>(k)],
      net.weight(k).rows(), net.weight(k).cols());
}

inline Eigen::Map<Eigen::VectorXd> bias_grad(std::span<double> grads,
                                             const BatchWorkspace& ws,
                                             const CertNet& net, int k) {
  return Eigen::Map<Eigen::VectorXd>(
      grads.data() + ws.b_off[static_cast<std::size_t>(k)],
      net.weight(k).rows());
}

}  // namespace

void batch_forward(const CertNet& net, const Eigen::MatrixXd& X,
                   const Eigen::RowVectorXd& T, int cols, BatchWorkspace& ws) {
  const int L = net.layer_count();
  const int n = net.state_dim();
  const auto& coupling = net.coupling();
  ws.cols = cols;

  auto z0 = ws.z[0].leftCols(cols);
  z0.topRows(n) = X.leftCols(cols);
  z0.row(n) = T.head(cols);
  if (coupling.kind == CouplingKind::Product) {
    z0.bottomRows(n) =
        X.leftCols(cols).array().rowwise() * T.head(cols).array();
  } else {
    auto E = ws.expat.leftCols(cols);
    E.array() =
        ((coupling.coeffs * T.head(cols)).array()).exp();  // n x C outer
    z0.bottomRows(n).array() = E.array() * X.leftCols(cols).array();
  }

  for (int k = 0; k < L - 1; ++k) {
    auto ak = ws.a[static_cast<std::size_t>(k)].leftCols(cols);
    ak.noalias() = net.weight(k) * ws.z[static_cast<std::size_t>(k)].leftCols(cols);
    ak.colwise() += net.bias(k);
    batch_activation(net.activation(), ak,
                     ws.z[static_cast<std::size_t>(k + 1)].leftCols(cols),
                     ws.sp[static_cast<std::size_t>(k)].leftCols(cols));
  }
  auto outb = ws.out.leftCols(cols);
  outb.noalias() = net.weight(L - 1) * ws.z[static_cast<std::size_t>(L - 1)].leftCols(cols);
  outb.colwise() += net.bias(L - 1);

  if (net.is_controller()) {
    const auto& cl = net.clamp();
    for (int c = 0; c < cols; ++c) {
      for (int j = 0; j < net.out_dim(); ++j) {
        ws.u(j, c) = clamp_value(cl, j, ws.out(j, c));
        ws.cl_slope(j, c) = clamp_slope(cl, j, ws.out(j, c));
      }
    }
  }
}

void batch_input_gradient(const CertNet& net, BatchWorkspace& ws) {
  const int L = net.layer_count();
  const int n = net.state_dim();
  const int cols = ws.cols;
  const auto& coupling = net.coupling();

  ws.p[static_cast<std::size_t>(L - 1)].leftCols(cols) =
      net.weight(L - 1).row(0).transpose().replicate(1, cols);
  for (int k = L - 2; k >= 0; --k) {
    auto pk1 = ws.p[static_cast<std::size_t>(k + 1)].leftCols(cols);
    pk1.array() *= ws.sp[static_cast<std::size_t>(k)].leftCols(cols).array();
    ws.p[static_cast<std::size_t>(k)].leftCols(cols).noalias() =
        net.weight(k).transpose() * pk1;
  }

  const auto g0 = ws.p[0].leftCols(cols);
  const auto z0 = ws.z[0].leftCols(cols);
  auto gm = ws.gamma.leftCols(cols);
  if (coupling.kind == CouplingKind::Product) {
    gm.topRows(n).array() = g0.topRows(n).array() +
                            g0.bottomRows(n).array().rowwise() *
                                z0.row(n).array();
    gm.row(n).array() =
        g0.row(n).array() +
        (z0.topRows(n).array() * g0.bottomRows(n).array()).colwise().sum();
  } else {
    const auto E = ws.expat.leftCols(cols);
    gm.topRows(n).array() =
        g0.topRows(n).array() + E.array() * g0.bottomRows(n).array();
    gm.row(n).array() =
        g0.row(n).array() +
        (((E.array() * z0.topRows(n).array()).colwise() *
          coupling.coeffs.array()) *
         g0.bottomRows(n).array())
            .colwise()
            .sum();
  }
}

void batch_tangent(const CertNet& net, const Eigen::MatrixXd& V,
                   BatchWorkspace& ws) {
  const int L = net.layer_count();
  const int n = net.state_dim();
  const int cols = ws.cols;
  const auto& coupling = net.coupling();

  const auto z0 = ws.z[0].leftCols(cols);
  auto zd0 = ws.zdot[0].leftCols(cols);
  zd0.topRows(n) = V.topRows(n).leftCols(cols);
  zd0.row(n) = V.row(n).head(cols);
  if (coupling.kind == CouplingKind::Product) {
    zd0.bottomRows(n).array() =
        V.topRows(n).leftCols(cols).array().rowwise() * z0.row(n).array() +
        z0.topRows(n).array().rowwise() * V.row(n).head(cols).array();
  } else {
    const auto E = ws.expat.leftCols(cols);
    zd0.bottomRows(n).array() =
        E.array() * V.topRows(n).leftCols(cols).array() +
        ((E.array() * z0.topRows(n).array()).colwise() *
         coupling.coeffs.array())
                .rowwise() *
            V.row(n).head(cols).array();
  }

  for (int k = 0; k < L - 1; ++k) {
    auto ad = ws.adot[static_cast<std::size_t>(k)].leftCols(cols);
    ad.noalias() = net.weight(k) * ws.zdot[static_cast<std::size_t>(k)].leftCols(cols);
    ws.zdot[static_cast<std::size_t>(k + 1)].leftCols(cols).array() =
        ws.sp[static_cast<std::size_t>(k)].leftCols(cols).array() * ad.array();
  }
  ws.phi.head(cols).noalias() =
      net.weight(L - 1).row(0) * ws.zdot[static_cast<std::size_t>(L - 1)].leftCols(cols);
}

void batch_backprop_scalar(const CertNet& net, const Eigen::RowVectorXd& e_y,
                           const Eigen::RowVectorXd& e_phi, bool with_tangent,
                           BatchWorkspace& ws, std::span<double> grads) {
  const int L = net.layer_count();
  const int cols = ws.cols;

  {
    auto Wg = weight_grad(grads, ws, net, L - 1);
    Wg.row(0).noalias() +=
        e_y.head(cols) * ws.z[static_cast<std::size_t>(L - 1)].leftCols(cols).transpose();
    if (with_tangent) {
      Wg.row(0).noalias() +=
          e_phi.head(cols) *
          ws.zdot[static_cast<std::size_t>(L - 1)].leftCols(cols).transpose();
    }
    bias_grad(grads, ws, net, L - 1)[0] += e_y.head(cols).sum();
    ws.p[static_cast<std::size_t>(L - 1)].leftCols(cols).noalias() =
        net.weight(L - 1).row(0).transpose() * e_y.head(cols);
    if (with_tangent) {
      ws.r[static_cast<std::size_t>(L - 1)].leftCols(cols).noalias() =
          net.weight(L - 1).row(0).transpose() * e_phi.head(cols);
    }
  }

  for (int k = L - 2; k >= 0; --k) {
    const auto spk = ws.sp[static_cast<std::size_t>(k)].leftCols(cols);
    auto pk1 = ws.p[static_cast<std::size_t>(k + 1)].leftCols(cols);
    if (with_tangent) {
      auto rk1 = ws.r[static_cast<std::size_t>(k + 1)].leftCols(cols);
      // reuse the pre-activation buffer as sigma'' scratch
      auto s2 = ws.a[static_cast<std::size_t>(k)].leftCols(cols);
      batch_second(net.activation(),
                   ws.z[static_cast<std::size_t>(k + 1)].leftCols(cols), spk, s2);
      pk1.array() = spk.array() * pk1.array() +
                    s2.array() *
                        ws.adot[static_cast<std::size_t>(k)].leftCols(cols).array() *
                        rk1.array();
      rk1.array() *= spk.array();
      auto Wg = weight_grad(grads, ws, net, k);
      Wg.noalias() += pk1 * ws.z[static_cast<std::size_t>(k)].leftCols(cols).transpose();
      Wg.noalias() +=
          rk1 * ws.zdot[static_cast<std::size_t>(k)].leftCols(cols).transpose();
      bias_grad(grads, ws, net, k) += pk1.rowwise().sum();
      ws.p[static_cast<std::size_t>(k)].leftCols(cols).noalias() =
          net.weight(k).transpose() * pk1;
      ws.r[static_cast<std::size_t>(k)].leftCols(cols).noalias() =
          net.weight(k).transpose() * rk1;
    } else {
      pk1.array() *= spk.array();
      auto Wg = weight_grad(grads, ws, net, k);
      Wg.noalias() += pk1 * ws.z[static_cast<std::size_t>(k)].leftCols(cols).transpose();
      bias_grad(grads, ws, net, k) += pk1.rowwise().sum();
      ws.p[static_cast<std::size_t>(k)].leftCols(cols).noalias() =
          net.weight(k).transpose() * pk1;
    }
  }
}

void batch_backprop_vector(const CertNet& net, const Eigen::MatrixXd& e_u,
                           BatchWorkspace& ws, std::span<double> grads) {
  const int L = net.layer_count();
  const int cols = ws.cols;
  // route the cotangent through the clamp slopes
  ws.out.leftCols(cols).array() =
      e_u.leftCols(cols).array() * ws.cl_slope.leftCols(cols).array();
  const auto q = ws.out.leftCols(cols);
  {
    auto Wg = weight_grad(grads, ws, net, L - 1);
    Wg.noalias() += q * ws.z[static_cast<std::size_t>(L - 1)].leftCols(cols).transpose();
    bias_grad(grads, ws, net, L - 1) += q.rowwise().sum();
    ws.p[static_cast<std::size_t>(L - 1)].leftCols(cols).noalias() =
        net.weight(L - 1).transpose() * q;
  }
  for (int k = L - 2; k >= 0; --k) {
    auto pk1 = ws.p[static_cast<std::size_t>(k + 1)].leftCols(cols);
    pk1.array() *= ws.sp[static_cast<std::size_t>(k)].leftCols(cols).array();
    auto Wg = weight_grad(grads, ws, net, k);
    Wg.noalias() += pk1 * ws.z[static_cast<std::size_t>(k)].leftCols(cols).transpose();
    bias_grad(grads, ws, net, k) += pk1.rowwise().sum();
    ws.p[static_cast<std::size_t>(k)].leftCols(cols).noalias() =
        net.weight(k).transpose() * pk1;
  }
}

}  // namespace stlcbf::neural
