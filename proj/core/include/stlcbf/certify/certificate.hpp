#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stlcbf/certify/bounds.hpp"
#include "stlcbf/dynamics/system.hpp"
#include "stlcbf/neural/net.hpp"
#include "stlcbf/safeset/dataset.hpp"

namespace stlcbf::certify {

// Residuals of the three barrier conditions at a sample. Inactive residuals
// (q1 off the safe side, q2 on it) are zero.
struct QValues {
  double q1 = 0.0;  // -B(s) on in-safe samples
  double q2 = 0.0;  // B(s) + lambda on out-safe samples
  double q3 = 0.0;  // -<dB/dx, f(x, g(s))> - dB/dt - alpha*B(s)
};

QValues eval_q(const neural::CertNet& barrier, const neural::CertNet& controller,
               const dyn::SystemModel& sys, const safeset::AugPoint& s,
               bool in_safe, double lambda, double alpha);

struct ViolationReport {
  double eta_hat = 0.0;       // max over samples of the active residuals
  std::uint64_t argmax = 0;   // first sample index attaining the max
  int which_q = 0;            // 1, 2 or 3
  double grad_max = 0.0;      // sampled max of ||(dB/dx, dB/dt)|| (diagnostic)
};

// Streaming max of the active residuals over the dataset. The inactive,
// identically-zero residuals do not enter the max: a literal all-k maximum
// could never drop below zero and no margin would ever certify.
ViolationReport max_violation(const neural::CertNet& barrier,
                              const neural::CertNet& controller,
                              const dyn::SystemModel& sys,
                              const safeset::LabeledDataset& ds, double lambda,
                              double alpha);

// max{L_b, L_db (M_f + 1) + M_b (L_x + L_u L_g) + alpha L_b}
double composite_lipschitz(const BoundsEstimate& b);

enum class Verdict { Valid, Invalid };

// Valid iff eta_hat + L * epsilon <= 0.
Verdict check_validity(double eta_hat, double lipschitz, double epsilon);

struct Certificate {
  double eta_hat = 0.0;
  double lipschitz = 0.0;
  double epsilon = 0.0;
  Verdict verdict = Verdict::Invalid;
  BoundsEstimate bounds;
  double sampled_grad_max = 0.0;
  std::vector<std::string> deviations;
};

Certificate make_certificate(const ViolationReport& report,
                             const BoundsEstimate& bounds, double epsilon);

std::string certificate_to_json(const Certificate& cert);
void write_certificate(const Certificate& cert, const std::string& path);

}  // namespace stlcbf::certify
