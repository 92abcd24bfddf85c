#include "stlcbf/training/losses.hpp"

#include <algorithm>

#include "stlcbf/neural/grad.hpp"

namespace stlcbf::training {

double loss_l1(const neural::CertNet& barrier,
               std::span<const safeset::AugPoint> batch, double eta) {
  double sum = 0.0;
  for (const auto& s : batch) {
    sum += std::max(0.0, -barrier.value(s.x, s.t) - eta);
  }
  return sum;
}

double loss_l2(const neural::CertNet& barrier,
               std::span<const safeset::AugPoint> batch, double eta,
               double lambda) {
  double sum = 0.0;
  for (const auto& s : batch) {
    sum += std::max(0.0, barrier.value(s.x, s.t) + lambda - eta);
  }
  return sum;
}

double loss_l3(const neural::CertNet& barrier, const neural::CertNet& controller,
               const dyn::SystemModel& sys,
               std::span<const safeset::AugPoint> batch, double eta,
               double alpha) {
  neural::NetWorkspace bws, cws;
  bws.resize(barrier);
  cws.resize(controller);
  Eigen::VectorXd v(barrier.state_dim() + 1);
  double sum = 0.0;
  for (const auto& s : batch) {
    neural::forward_ws(controller, s.x, s.t, cws);
    const Eigen::VectorXd f = sys.eval_f(s.x, cws.u);
    neural::forward_ws(barrier, s.x, s.t, bws);
    neural::input_gradient_ws(barrier, bws);
    v.head(barrier.state_dim()) = f;
    v[barrier.state_dim()] = 1.0;
    sum += std::max(0.0, -bws.gamma.dot(v) - alpha * bws.out[0] - eta);
  }
  return sum;
}

}  // namespace stlcbf::training
