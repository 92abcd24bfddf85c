#pragma once

#include <array>
#include <optional>
#include <vector>

#include "stlcbf/common/box.hpp"
#include "stlcbf/stl/ast.hpp"

namespace stlcbf::stl {

// Placement of the certified sub-interval [t*, t*+delta] of Eventually
// blocks. Always blocks keep their full interval. When delta is unset, each
// Eventually block uses 20% of its own interval width.
struct IntervalPolicy {
  enum class Anchor { Start, Midpoint, Fraction };
  Anchor anchor = Anchor::Midpoint;
  double fraction = 0.5;  // anchor == Fraction: t* = a + fraction*(b - a - delta)
  std::optional<double> delta;
};

// One active interval per block, in block order.
struct ActiveSchedule {
  std::vector<std::array<double, 2>> intervals;

  // indices of the blocks whose interval contains t (ascending)
  std::vector<int> active_blocks(double t) const;

  // true when the union of intervals covers [0, horizon]
  bool covers(double horizon) const;
};

ActiveSchedule assign_intervals(const Specification& spec,
                                const IntervalPolicy& policy);

// When some time in [0, horizon] has no active block under the policy,
// prepends an Always block over the whole horizon holding the box predicate
// || diag(1/w) (x - c) ||_inf <= 1 built from the box center and half-widths.
// Otherwise returns the specification unchanged.
Specification ensure_coverage(const Specification& spec, const Box& box,
                              const IntervalPolicy& policy = {});

}  // namespace stlcbf::stl
