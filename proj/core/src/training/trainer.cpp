#include "stlcbf/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "stlcbf/certify/certificate.hpp"
#include "stlcbf/common/parallel.hpp"
#include "stlcbf/common/rng.hpp"
#include "stlcbf/neural/batch.hpp"

namespace stlcbf::training {

namespace {

constexpr std::uint64_t kChunk = 256;  // columns per batched kernel call

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(cfg.k1 > 0.0 && cfg.k2 > 0.0 && cfg.k3 > 0.0)) {
    throw std::invalid_argument("train: loss weights must be positive");
  }
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("train: lambda must be > 0");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("train: alpha must be > 0");
  if (cfg.eta && *cfg.eta > 0.0) {
    throw std::invalid_argument("train: eta must be <= 0");
  }
  if (cfg.lip_weight < 0.0) throw std::invalid_argument("train: lip_weight must be >= 0");
  if (!(cfg.lip_targets.L_b > 0.0 && cfg.lip_targets.L_db > 0.0 &&
        cfg.lip_targets.L_g > 0.0)) {
    throw std::invalid_argument("train: Lipschitz targets must be positive");
  }
  if (cfg.refine_every < 1) throw std::invalid_argument("train: refine_every must be >= 1");
  if (!(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) {
    throw std::invalid_argument("train: lr_decay must lie in (0, 1]");
  }
  if (cfg.lr_decay_every < 1) {
    throw std::invalid_argument("train: lr_decay_every must be >= 1");
  }
  if (cfg.convergence_tol < 1e-6 || cfg.convergence_tol > 1e-4) {
    throw std::invalid_argument("train: convergence_tol must lie in [1e-6, 1e-4]");
  }
}

// per-thread staging for one chunk of samples
struct ChunkBuffers {
  neural::BatchWorkspace bws, cws;
  Eigen::MatrixXd X;       // n x C
  Eigen::RowVectorXd T;    // C
  Eigen::MatrixXd V;       // (n+1) x C direction [f; 1]
  Eigen::MatrixXd EU;      // m x C controller cotangents
  Eigen::RowVectorXd ey, ephi, phi, B;
  std::vector<char> in_safe;
  Eigen::VectorXd xtmp;

  void resize(const neural::CertNet& barrier, const neural::CertNet& ctrl) {
    bws.resize(barrier, static_cast<int>(kChunk));
    cws.resize(ctrl, static_cast<int>(kChunk));
    const int n = barrier.state_dim();
    X.resize(n, static_cast<Eigen::Index>(kChunk));
    T.resize(static_cast<Eigen::Index>(kChunk));
    V.resize(n + 1, static_cast<Eigen::Index>(kChunk));
    EU.resize(ctrl.out_dim(), static_cast<Eigen::Index>(kChunk));
    ey.resize(static_cast<Eigen::Index>(kChunk));
    ephi.resize(static_cast<Eigen::Index>(kChunk));
    phi.resize(static_cast<Eigen::Index>(kChunk));
    B.resize(static_cast<Eigen::Index>(kChunk));
    in_safe.resize(kChunk);
    xtmp.resize(n);
  }
};

struct EvalStats {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double eta_hat = -std::numeric_limits<double>::infinity();
  double grad_max = 0.0;
};

// shared forward sweep over one chunk: controller, dynamics, barrier, input
// gradients and the decay residual phi = <gamma, [f; 1]>
void chunk_forward(const neural::CertNet& barrier, const neural::CertNet& ctrl,
                   const dyn::SystemModel& sys,
                   const safeset::LabeledDataset& ds,
                   const std::uint64_t* idx, int count, ChunkBuffers& cb) {
  const int n = barrier.state_dim();
  for (int j = 0; j < count; ++j) {
    double t = 0.0;
    ds.grid().node(idx[j], cb.xtmp, t);
    cb.X.col(j) = cb.xtmp;
    cb.T[j] = t;
    cb.in_safe[static_cast<std::size_t>(j)] = ds.in_safe(idx[j]) ? 1 : 0;
  }
  neural::batch_forward(ctrl, cb.X, cb.T, count, cb.cws);
  for (int j = 0; j < count; ++j) {
    cb.V.col(j).head(n) = sys.eval_f(cb.X.col(j), cb.cws.u.col(j));
    cb.V(n, j) = 1.0;
  }
  neural::batch_forward(barrier, cb.X, cb.T, count, cb.bws);
  neural::batch_input_gradient(barrier, cb.bws);
  cb.B.head(count) = cb.bws.out.row(0).head(count);
  cb.phi.head(count) = (cb.bws.gamma.leftCols(count).array() *
                        cb.V.leftCols(count).array())
                           .colwise()
                           .sum();
}

EvalStats evaluate(const neural::CertNet& barrier,
                   const neural::CertNet& controller,
                   const dyn::SystemModel& sys,
                   const safeset::LabeledDataset& ds,
                   const std::vector<std::uint64_t>& all, double eta,
                   double lambda, double alpha) {
  const std::uint64_t n = ds.size();
  const std::size_t chunks = chunk_count(n, kChunk);
  std::vector<EvalStats> locals(chunks);

  parallel_chunks(n, kChunk, [&](std::size_t c, std::uint64_t b, std::uint64_t e) {
    thread_local ChunkBuffers cb;
    cb.resize(barrier, controller);
    const int count = static_cast<int>(e - b);
    chunk_forward(barrier, controller, sys, ds, all.data() + b, count, cb);
    EvalStats st;
    for (int j = 0; j < count; ++j) {
      const double B = cb.B[j];
      const double q3 = -cb.phi[j] - alpha * B;
      st.l3 += std::max(0.0, q3 - eta);
      double qa;
      if (cb.in_safe[static_cast<std::size_t>(j)]) {
        qa = -B;
        st.l1 += std::max(0.0, qa - eta);
      } else {
        qa = B + lambda;
        st.l2 += std::max(0.0, qa - eta);
      }
      st.eta_hat = std::max(st.eta_hat, std::max(qa, q3));
    }
    st.grad_max = cb.bws.gamma.leftCols(count).colwise().norm().maxCoeff();
    locals[c] = st;
  });

  EvalStats out;
  for (const EvalStats& st : locals) {
    out.l1 += st.l1;
    out.l2 += st.l2;
    out.l3 += st.l3;
    out.eta_hat = std::max(out.eta_hat, st.eta_hat);
    out.grad_max = std::max(out.grad_max, st.grad_max);
  }
  return out;
}

void check_finite(const neural::CertNet& net, std::span<const double> grads,
                  const char* which) {
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (std::isfinite(grads[i])) continue;
    std::size_t off = 0;
    for (int k = 0; k < net.layer_count(); ++k) {
      const std::size_t span = static_cast<std::size_t>(net.weight(k).size()) +
                               static_cast<std::size_t>(net.weight(k).rows());
      if (i < off + span) {
        throw std::runtime_error(std::string("non-finite gradient in ") + which +
                                 " layer " + std::to_string(k));
      }
      off += span;
    }
    throw std::runtime_error(std::string("non-finite gradient in ") + which);
  }
}

}  // namespace

double resolve_eta(const TrainConfig& cfg, const dyn::SystemModel& sys,
                   double epsilon) {
  if (cfg.eta) return *cfg.eta;
  certify::BoundsEstimate be;
  be.L_b = cfg.lip_targets.L_b;
  be.L_db = cfg.lip_targets.L_db;
  be.L_g = cfg.lip_targets.L_g;
  be.M_b = cfg.lip_targets.L_b;
  be.alpha = cfg.alpha;
  dyn::DynamicsBounds db;
  try {
    db = sys.analytic_bounds();
  } catch (const std::exception&) {
    throw std::invalid_argument(
        "train: system declares no analytic bounds; set eta explicitly");
  }
  be.L_x = db.L_x;
  be.L_u = db.L_u;
  be.M_f = db.M_f;
  return -certify::composite_lipschitz(be) * epsilon;
}

TrainResult train(const stl::Specification& spec,
                  const stl::ActiveSchedule& sched, const dyn::SystemModel& sys,
                  std::shared_ptr<const safeset::SampleGrid> grid,
                  neural::CertNet barrier, neural::CertNet controller,
                  const TrainConfig& cfg) {
  validate(cfg);
  if (barrier.state_dim() != sys.state_dim() ||
      controller.state_dim() != sys.state_dim() ||
      controller.out_dim() != sys.input_dim()) {
    throw std::invalid_argument("train: network/system dimension mismatch");
  }

  safeset::LabeledDataset ds = safeset::label_samples(grid, spec, sched);
  if (ds.in_safe_count() == 0) {
    throw UnsatisfiableError(
        "the sampled safe set is empty before training; the specification is "
        "unsatisfiable under the current interval policy and grid");
  }
  const double eta = resolve_eta(cfg, sys, grid->epsilon());
  const Box& X = sys.state_box();
  const double T = grid->horizon();

  const std::size_t bp = barrier.param_count();
  const std::size_t cp = controller.param_count();
  std::vector<double> bparams(bp), cparams(cp);
  barrier.get_params(bparams);
  controller.get_params(cparams);
  AdamState bstate, cstate;
  bstate.resize(bp);
  cstate.resize(cp);

  const std::uint64_t n = grid->size();
  std::vector<std::uint64_t> order(n);
  for (std::uint64_t i = 0; i < n; ++i) order[i] = i;
  std::vector<std::uint64_t> natural = order;
  Rng rng(cfg.seed);

  const std::uint64_t bs = static_cast<std::uint64_t>(cfg.batch_size);
  const std::size_t max_chunks = chunk_count(std::min<std::uint64_t>(bs, n), kChunk);
  std::vector<std::vector<double>> bchunk(max_chunks, std::vector<double>(bp));
  std::vector<std::vector<double>> cchunk(max_chunks, std::vector<double>(cp));
  std::vector<double> bgrads(bp), cgrads(cp);

  TrainResult res{std::move(barrier), std::move(controller), {}, ds, false, eta, 0};
  neural::CertNet& bnet = res.barrier;
  neural::CertNet& cnet = res.controller;

  std::vector<double> best_b = bparams, best_c = cparams;
  double best_total = std::numeric_limits<double>::infinity();
  const int ndim = bnet.state_dim();

  AdamConfig adam = cfg.adam;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    adam.lr = cfg.adam.lr *
              std::pow(cfg.lr_decay, (epoch - 1) / cfg.lr_decay_every);

    for (std::uint64_t b0 = 0; b0 < n; b0 += bs) {
      const std::uint64_t count = std::min(bs, n - b0);
      const std::size_t chunks = chunk_count(count, kChunk);
      for (std::size_t c = 0; c < chunks; ++c) {
        std::fill(bchunk[c].begin(), bchunk[c].end(), 0.0);
        std::fill(cchunk[c].begin(), cchunk[c].end(), 0.0);
      }

      parallel_chunks(count, kChunk, [&](std::size_t c, std::uint64_t cb0,
                                         std::uint64_t ce0) {
        thread_local ChunkBuffers cb;
        cb.resize(bnet, cnet);
        const int cc = static_cast<int>(ce0 - cb0);
        chunk_forward(bnet, cnet, sys, res.dataset, order.data() + b0 + cb0,
                      cc, cb);

        bool any_y = false, any_phi = false;
        cb.ey.head(cc).setZero();
        cb.ephi.head(cc).setZero();
        cb.EU.leftCols(cc).setZero();
        for (int j = 0; j < cc; ++j) {
          const double B = cb.B[j];
          double ey = 0.0;
          if (cb.in_safe[static_cast<std::size_t>(j)]) {
            if (-B - eta > 0.0) ey -= cfg.k1;
          } else {
            if (B + cfg.lambda - eta > 0.0) ey += cfg.k2;
          }
          if (-cb.phi[j] - cfg.alpha * B - eta > 0.0) {
            ey -= cfg.k3 * cfg.alpha;
            cb.ephi[j] = -cfg.k3;
            any_phi = true;
            const Eigen::MatrixXd fu =
                sys.input_jacobian(cb.X.col(j), cb.cws.u.col(j));
            cb.EU.col(j).noalias() =
                -cfg.k3 * (fu.transpose() * cb.bws.gamma.col(j).head(ndim));
          }
          cb.ey[j] = ey;
          any_y = any_y || ey != 0.0;
        }
        if (any_phi) neural::batch_tangent(bnet, cb.V, cb.bws);
        if (any_y || any_phi) {
          neural::batch_backprop_scalar(bnet, cb.ey, cb.ephi, any_phi, cb.bws,
                                        bchunk[c]);
        }
        if (any_phi) {
          neural::batch_backprop_vector(cnet, cb.EU, cb.cws, cchunk[c]);
        }
      });

      std::fill(bgrads.begin(), bgrads.end(), 0.0);
      std::fill(cgrads.begin(), cgrads.end(), 0.0);
      for (std::size_t c = 0; c < chunks; ++c) {
        for (std::size_t i = 0; i < bp; ++i) bgrads[i] += bchunk[c][i];
        for (std::size_t i = 0; i < cp; ++i) cgrads[i] += cchunk[c][i];
      }
      if (cfg.lip_weight > 0.0) {
        lipschitz_penalty_grad(bnet, cnet, X, T, cfg.lip_targets, cfg.lip_weight,
                               bgrads, cgrads);
      }
      check_finite(bnet, bgrads, "barrier");
      check_finite(cnet, cgrads, "controller");

      adam_step(bparams, bgrads, bstate, adam);
      adam_step(cparams, cgrads, cstate, adam);
      bnet.set_params(bparams);
      cnet.set_params(cparams);
    }

    const EvalStats st = evaluate(bnet, cnet, sys, res.dataset, natural, eta,
                                  cfg.lambda, cfg.alpha);
    const double pen =
        lipschitz_penalty(bnet, cnet, X, T, cfg.lip_targets, cfg.lip_weight);
    LossReport rep;
    rep.epoch = epoch;
    rep.l1 = st.l1;
    rep.l2 = st.l2;
    rep.l3 = st.l3;
    rep.lip_penalty = pen;
    rep.total = cfg.k1 * st.l1 + cfg.k2 * st.l2 + cfg.k3 * st.l3 + pen;
    rep.eta_hat = st.eta_hat;
    rep.generation = res.dataset.generation();
    rep.in_safe_count = res.dataset.in_safe_count();
    res.history.push_back(rep);
    res.epochs_run = epoch;

    // progress on stderr (off with STLCBF_QUIET=1); artifacts are unaffected
    static const bool quiet = [] {
      const char* q = std::getenv("STLCBF_QUIET");
      return q && q[0] == '1';
    }();
    if (!quiet && (epoch == 1 || epoch % 25 == 0)) {
      std::fprintf(stderr,
                   "[train] epoch %d total %.6g (L1 %.4g L2 %.4g L3 %.4g pen "
                   "%.4g) eta_hat %.4g gen %d in_safe %llu\n",
                   epoch, rep.total, rep.l1, rep.l2, rep.l3, rep.lip_penalty,
                   rep.eta_hat, rep.generation,
                   static_cast<unsigned long long>(rep.in_safe_count));
    }

    if (rep.total < best_total) {
      best_total = rep.total;
      best_b = bparams;
      best_c = cparams;
    }
    if (rep.total <= cfg.convergence_tol) {
      res.converged = true;
      break;
    }

    if (epoch % cfg.refine_every == 0 && epoch < cfg.epochs) {
      safeset::LabeledDataset refined =
          safeset::refine(res.dataset, bnet, cfg.lip_targets.L_b);
      if (refined.in_safe_count() == 0) {
        throw UnsatisfiableError(
            "safe-set refinement removed every in-safe sample at epoch " +
            std::to_string(epoch) +
            "; the specification is unsatisfiable under the current policy");
      }
      res.dataset = std::move(refined);
    }
  }

  if (!res.converged) {
    bnet.set_params(best_b);
    cnet.set_params(best_c);
  }
  return res;
}

}  // namespace stlcbf::training
