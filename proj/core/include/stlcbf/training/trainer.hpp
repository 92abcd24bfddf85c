#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stlcbf/dynamics/system.hpp"
#include "stlcbf/neural/net.hpp"
#include "stlcbf/safeset/dataset.hpp"
#include "stlcbf/stl/schedule.hpp"
#include "stlcbf/training/adam.hpp"
#include "stlcbf/training/penalty.hpp"

namespace stlcbf::training {

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 512;
  AdamConfig adam;
  double k1 = 1.0;
  double k2 = 1.0;
  double k3 = 1.0;
  double lambda = 0.1;           // strict-margin on the out-safe side
  double alpha = 1.0;            // class-K slope
  std::optional<double> eta;     // margin; defaults to -L_target * epsilon
  LipschitzTargets lip_targets;
  double lip_weight = 0.0;
  double lr_decay = 1.0;         // multiplied into the rate every lr_decay_every epochs
  int lr_decay_every = 500;
  std::uint64_t seed = 1;
  int refine_every = 50;         // epochs between safe-set refinements
  double convergence_tol = 1e-4; // within [1e-6, 1e-4]
};

struct LossReport {
  int epoch = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double lip_penalty = 0.0;
  double total = 0.0;      // k1*l1 + k2*l2 + k3*l3 + lip_penalty
  double eta_hat = 0.0;    // max active residual over the dataset
  int generation = 0;
  std::uint64_t in_safe_count = 0;
};

struct TrainResult {
  neural::CertNet barrier;
  neural::CertNet controller;
  std::vector<LossReport> history;
  safeset::LabeledDataset dataset;
  bool converged = false;
  double eta = 0.0;
  int epochs_run = 0;
};

// The in-safe sample set emptied out: no barrier can separate the remaining
// labels under the current interval policy / discretization.
struct UnsatisfiableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full training loop: label the grid, minimize the batched certificate
// losses (plus the Lipschitz penalty) with per-batch updates, refine the
// safe side every refine_every epochs, stop when the exact full-dataset
// total drops to convergence_tol. On failure returns the best parameters
// seen with converged = false.
TrainResult train(const stl::Specification& spec,
                  const stl::ActiveSchedule& sched, const dyn::SystemModel& sys,
                  std::shared_ptr<const safeset::SampleGrid> grid,
                  neural::CertNet barrier, neural::CertNet controller,
                  const TrainConfig& cfg);

// Resolve the margin: explicit value when set, else -composite_target * epsilon
// from the declared Lipschitz targets, dynamics bounds and alpha.
double resolve_eta(const TrainConfig& cfg, const dyn::SystemModel& sys,
                   double epsilon);

}  // namespace stlcbf::training
