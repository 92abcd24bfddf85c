#pragma once

#include <span>

#include "stlcbf/stl/ast.hpp"

namespace stlcbf::stl {

// Robustness assigned to the `true` literal; a large finite constant keeps
// the min/max lattice arithmetic finite.
inline constexpr double kTrueRobustness = 1e9;

// rho^phi(x): atoms evaluate h(x), Not negates, And takes min, Or takes max.
double robustness_bool(const Formula& f, const Eigen::VectorXd& x,
                       double true_value = kTrueRobustness);
double robustness_bool(const FormulaPtr& f, const Eigen::VectorXd& x,
                       double true_value = kTrueRobustness);

// Robustness of one temporal block over a sampled trajectory, evaluated at
// t = 0: min (Always) or max (Eventually) of the body robustness over the
// samples with time in [a, b]. Throws when the samples do not cover [a, b].
double robustness_signal_block(const TemporalBlock& block,
                               std::span<const double> times,
                               std::span<const Eigen::VectorXd> states,
                               double true_value = kTrueRobustness);

// rho^Phi over a sampled trajectory: min over blocks.
double robustness_signal(const Specification& spec,
                         std::span<const double> times,
                         std::span<const Eigen::VectorXd> states,
                         double true_value = kTrueRobustness);

}  // namespace stlcbf::stl
