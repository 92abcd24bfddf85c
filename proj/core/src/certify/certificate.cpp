#include "stlcbf/certify/certificate.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stlcbf/common/parallel.hpp"
#include "stlcbf/neural/grad.hpp"

namespace stlcbf::certify {

QValues eval_q(const neural::CertNet& barrier, const neural::CertNet& controller,
               const dyn::SystemModel& sys, const safeset::AugPoint& s,
               bool in_safe, double lambda, double alpha) {
  const double B = barrier.value(s.x, s.t);
  const Eigen::VectorXd u = controller.forward(s.x, s.t);
  const Eigen::VectorXd f = sys.eval_f(s.x, u);
  const neural::InputJacobian J = barrier.input_jacobian(s.x, s.t);
  QValues q;
  q.q1 = in_safe ? -B : 0.0;
  q.q2 = in_safe ? 0.0 : B + lambda;
  q.q3 = -J.dx.row(0).dot(f) - J.dt[0] - alpha * B;
  return q;
}

ViolationReport max_violation(const neural::CertNet& barrier,
                              const neural::CertNet& controller,
                              const dyn::SystemModel& sys,
                              const safeset::LabeledDataset& ds, double lambda,
                              double alpha) {
  if (ds.size() == 0) {
    throw std::invalid_argument("max_violation: empty dataset");
  }
  constexpr std::uint64_t kChunk = 4096;
  const std::size_t chunks = chunk_count(ds.size(), kChunk);
  struct Local {
    double best = -std::numeric_limits<double>::infinity();
    std::uint64_t arg = 0;
    int which = 0;
    double gmax = 0.0;
  };
  std::vector<Local> locals(chunks);

  parallel_chunks(ds.size(), kChunk, [&](std::size_t c, std::uint64_t b, std::uint64_t e) {
    thread_local neural::NetWorkspace bws, cws;
    bws.resize(barrier);
    cws.resize(controller);
    Local loc;
    Eigen::VectorXd x, v(barrier.state_dim() + 1);
    double t = 0.0;
    for (std::uint64_t i = b; i < e; ++i) {
      ds.grid().node(i, x, t);
      neural::forward_ws(controller, x, t, cws);
      const Eigen::VectorXd f = sys.eval_f(x, cws.u);
      neural::forward_ws(barrier, x, t, bws);
      const double B = bws.out[0];
      neural::input_gradient_ws(barrier, bws);
      v.head(barrier.state_dim()) = f;
      v[barrier.state_dim()] = 1.0;
      const double q3 = -bws.gamma.dot(v) - alpha * B;
      loc.gmax = std::max(loc.gmax, bws.gamma.norm());

      double qa;
      int which;
      if (ds.in_safe(i)) {
        qa = -B;
        which = 1;
      } else {
        qa = B + lambda;
        which = 2;
      }
      if (qa > loc.best) {
        loc.best = qa;
        loc.arg = i;
        loc.which = which;
      }
      if (q3 > loc.best) {
        loc.best = q3;
        loc.arg = i;
        loc.which = 3;
      }
    }
    locals[c] = loc;
  });

  ViolationReport rep;
  rep.eta_hat = -std::numeric_limits<double>::infinity();
  for (const Local& loc : locals) {
    rep.grad_max = std::max(rep.grad_max, loc.gmax);
    if (loc.which != 0 && loc.best > rep.eta_hat) {
      rep.eta_hat = loc.best;
      rep.argmax = loc.arg;
      rep.which_q = loc.which;
    }
  }
  return rep;
}

double composite_lipschitz(const BoundsEstimate& b) {
  const double l3 = b.L_db * (b.M_f + 1.0) + b.M_b * (b.L_x + b.L_u * b.L_g) +
                    b.alpha * b.L_b;
  return std::max(b.L_b, l3);
}

Verdict check_validity(double eta_hat, double lipschitz, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("check_validity: epsilon must be > 0");
  }
  return eta_hat + lipschitz * epsilon <= 0.0 ? Verdict::Valid
                                              : Verdict::Invalid;
}

Certificate make_certificate(const ViolationReport& report,
                             const BoundsEstimate& bounds, double epsilon) {
  Certificate cert;
  cert.eta_hat = report.eta_hat;
  cert.bounds = bounds;
  cert.lipschitz = composite_lipschitz(bounds);
  cert.epsilon = epsilon;
  cert.verdict = check_validity(cert.eta_hat, cert.lipschitz, epsilon);
  cert.sampled_grad_max = report.grad_max;
  cert.deviations = {
      "network Lipschitz constants are layer-wise spectral-norm-product upper "
      "bounds (conservative)",
      "M_b is the network Lipschitz upper bound; the sampled gradient max is "
      "reported separately as a diagnostic"};
  return cert;
}

std::string certificate_to_json(const Certificate& cert) {
  nlohmann::json j;
  j["eta_hat"] = cert.eta_hat;
  j["L_composite"] = cert.lipschitz;
  j["epsilon"] = cert.epsilon;
  j["verdict"] = cert.verdict == Verdict::Valid ? "valid" : "invalid";
  j["bounds"] = {{"L_b", cert.bounds.L_b},     {"L_db", cert.bounds.L_db},
                 {"L_g", cert.bounds.L_g},     {"L_x", cert.bounds.L_x},
                 {"L_u", cert.bounds.L_u},     {"M_f", cert.bounds.M_f},
                 {"M_b", cert.bounds.M_b},     {"alpha", cert.bounds.alpha}};
  j["sampled_grad_max"] = cert.sampled_grad_max;
  j["deviations"] = cert.deviations;
  return j.dump(2);
}

void write_certificate(const Certificate& cert, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write certificate: " + path);
  f << certificate_to_json(cert) << "\n";
}

}  // namespace stlcbf::certify
