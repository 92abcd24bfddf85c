#include "stlcbf/neural/grad.hpp"

namespace stlcbf::neural {

void NetWorkspace::resize(const CertNet& net) {
  const int L = net.layer_count();
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
    z[static_cast<std::size_t>(k)].resize(in);
    zdot[static_cast<std::size_t>(k)].resize(in);
    p[static_cast<std::size_t>(k)].resize(in);
    r[static_cast<std::size_t>(k)].resize(in);
    if (k < L - 1) {
      a[static_cast<std::size_t>(k)].resize(W.rows());
      sp[static_cast<std::size_t>(k)].resize(W.rows());
      adot[static_cast<std::size_t>(k)].resize(W.rows());
    }
    w_off[static_cast<std::size_t>(k)] = off;
    off += static_cast<std::size_t>(W.size());
    b_off[static_cast<std::size_t>(k)] = off;
    off += static_cast<std::size_t>(W.rows());
    in = static_cast<int>(W.rows());
  }
  out.resize(net.out_dim());
  u.resize(net.out_dim());
  cl_slope.resize(net.out_dim());
  CJ.resize(net.coupling().out_dim(), net.state_dim() + 1);
  gamma.resize(net.state_dim() + 1);
}

void forward_ws(const CertNet& net, const Eigen::VectorXd& x, double t,
                NetWorkspace& ws) {
  const int L = net.layer_count();
  const Activation act = net.activation();
  net.coupling().apply(x, t, ws.z[0]);
  net.coupling().jacobian(x, t, ws.CJ);
  for (int k = 0; k < L - 1; ++k) {
    auto& ak = ws.a[static_cast<std::size_t>(k)];
    ak.noalias() = net.weight(k) * ws.z[static_cast<std::size_t>(k)];
    ak += net.bias(k);
    auto& zn = ws.z[static_cast<std::size_t>(k + 1)];
    auto& spk = ws.sp[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < ak.size(); ++i) {
      const double v = act_value(act, ak[i]);
      zn[i] = v;
      spk[i] = act_deriv(act, v, ak[i]);
    }
  }
  ws.out.noalias() = net.weight(L - 1) * ws.z[static_cast<std::size_t>(L - 1)];
  ws.out += net.bias(L - 1);
  if (net.is_controller()) {
    const auto& cl = net.clamp();
    for (Eigen::Index j = 0; j < ws.out.size(); ++j) {
      ws.u[j] = clamp_value(cl, static_cast<int>(j), ws.out[j]);
      ws.cl_slope[j] = clamp_slope(cl, static_cast<int>(j), ws.out[j]);
    }
  }
}

void input_gradient_ws(const CertNet& net, NetWorkspace& ws) {
  const int L = net.layer_count();
  // scalar output: cotangent of z[L-1] is the output row
  ws.p[static_cast<std::size_t>(L - 1)] = net.weight(L - 1).row(0).transpose();
  for (int k = L - 2; k >= 0; --k) {
    auto& pk1 = ws.p[static_cast<std::size_t>(k + 1)];
    pk1.array() *= ws.sp[static_cast<std::size_t>(k)].array();
    ws.p[static_cast<std::size_t>(k)].noalias() =
        net.weight(k).transpose() * pk1;
  }
  ws.gamma.noalias() = ws.CJ.transpose() * ws.p[0];
}

double tangent_ws(const CertNet& net, const Eigen::VectorXd& v,
                  NetWorkspace& ws) {
  const int L = net.layer_count();
  ws.zdot[0].noalias() = ws.CJ * v;
  for (int k = 0; k < L - 1; ++k) {
    auto& ad = ws.adot[static_cast<std::size_t>(k)];
    ad.noalias() = net.weight(k) * ws.zdot[static_cast<std::size_t>(k)];
    ws.zdot[static_cast<std::size_t>(k + 1)].array() =
        ws.sp[static_cast<std::size_t>(k)].array() * ad.array();
  }
  ws.phi = net.weight(L - 1).row(0).dot(ws.zdot[static_cast<std::size_t>(L - 1)]);
  return ws.phi;
}

namespace {

inline Eigen::Map<CertNet::RowMat> weight_grad(std::span<double> grads,
                                               const NetWorkspace& ws,
                                               const CertNet& net, int k) {
  return Eigen::Map<CertNet::RowMat>(
      grads.data() + ws.w_off[static_cast<std::size_t>(k)],
      net.weight(k).rows(), net.weight(k).cols());
}

inline Eigen::Map<Eigen::VectorXd> bias_grad(std::span<double> grads,
                                             const NetWorkspace& ws,
                                             const CertNet& net, int k) {
  return Eigen::Map<Eigen::VectorXd>(
      grads.data() + ws.b_off[static_cast<std::size_t>(k)],
      net.weight(k).rows());
}

}  // namespace

void backprop_scalar_ws(const CertNet& net, double e_y, double e_phi,
                        NetWorkspace& ws, std::span<double> grads) {
  const int L = net.layer_count();
  const Activation act = net.activation();
  const bool second = e_phi != 0.0;

  // output layer
  {
    auto Wg = weight_grad(grads, ws, net, L - 1);
    Wg.row(0) += e_y * ws.z[static_cast<std::size_t>(L - 1)].transpose();
    if (second) {
      Wg.row(0) += e_phi * ws.zdot[static_cast<std::size_t>(L - 1)].transpose();
    }
    bias_grad(grads, ws, net, L - 1)[0] += e_y;
    ws.p[static_cast<std::size_t>(L - 1)] =
        e_y * net.weight(L - 1).row(0).transpose();
    if (second) {
      ws.r[static_cast<std::size_t>(L - 1)] =
          e_phi * net.weight(L - 1).row(0).transpose();
    }
  }

  for (int k = L - 2; k >= 0; --k) {
    const auto& spk = ws.sp[static_cast<std::size_t>(k)];
    const auto& zk1 = ws.z[static_cast<std::size_t>(k + 1)];
    auto& pk1 = ws.p[static_cast<std::size_t>(k + 1)];
    if (second) {
      auto& rk1 = ws.r[static_cast<std::size_t>(k + 1)];
      // abar = sigma'(a) p + sigma''(a) adot r ; rbar = sigma'(a) r
      for (Eigen::Index i = 0; i < pk1.size(); ++i) {
        const double s2 = act_second(act, zk1[i], spk[i]);
        const double abar = spk[i] * pk1[i] +
                            s2 * ws.adot[static_cast<std::size_t>(k)][i] * rk1[i];
        const double rbar = spk[i] * rk1[i];
        pk1[i] = abar;
        rk1[i] = rbar;
      }
      auto Wg = weight_grad(grads, ws, net, k);
      Wg.noalias() += pk1 * ws.z[static_cast<std::size_t>(k)].transpose();
      Wg.noalias() += rk1 * ws.zdot[static_cast<std::size_t>(k)].transpose();
      bias_grad(grads, ws, net, k) += pk1;
      ws.p[static_cast<std::size_t>(k)].noalias() =
          net.weight(k).transpose() * pk1;
      ws.r[static_cast<std::size_t>(k)].noalias() =
          net.weight(k).transpose() * rk1;
    } else {
      pk1.array() *= spk.array();
      auto Wg = weight_grad(grads, ws, net, k);
      Wg.noalias() += pk1 * ws.z[static_cast<std::size_t>(k)].transpose();
      bias_grad(grads, ws, net, k) += pk1;
      ws.p[static_cast<std::size_t>(k)].noalias() =
          net.weight(k).transpose() * pk1;
    }
  }
}

void backprop_vector_ws(const CertNet& net, const Eigen::VectorXd& e_u,
                        NetWorkspace& ws, std::span<double> grads) {
  const int L = net.layer_count();
  Eigen::VectorXd q = e_u.cwiseProduct(ws.cl_slope);
  {
    auto Wg = weight_grad(grads, ws, net, L - 1);
    Wg.noalias() += q * ws.z[static_cast<std::size_t>(L - 1)].transpose();
    bias_grad(grads, ws, net, L - 1) += q;
    ws.p[static_cast<std::size_t>(L - 1)].noalias() =
        net.weight(L - 1).transpose() * q;
  }
  for (int k = L - 2; k >= 0; --k) {
    auto& pk1 = ws.p[static_cast<std::size_t>(k + 1)];
    pk1.array() *= ws.sp[static_cast<std::size_t>(k)].array();
    auto Wg = weight_grad(grads, ws, net, k);
    Wg.noalias() += pk1 * ws.z[static_cast<std::size_t>(k)].transpose();
    bias_grad(grads, ws, net, k) += pk1;
    ws.p[static_cast<std::size_t>(k)].noalias() =
        net.weight(k).transpose() * pk1;
  }
}

}  // namespace stlcbf::neural
