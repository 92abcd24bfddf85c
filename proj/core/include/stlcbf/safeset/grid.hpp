#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "stlcbf/common/box.hpp"

namespace stlcbf::safeset {

// A state/time sample from W = X x [0, T].
struct AugPoint {
  Eigen::VectorXd x;
  double t = 0.0;
};

// Uniform axis-aligned covering grid over W = X x [0, T]: every point of W
// lies within L2 distance epsilon of some node. Axis spacing comes from the
// cell half-diagonal, h = 2*epsilon/sqrt(n+1); endpoints are included. Nodes
// are enumerated lazily by flat index (state axes fastest, time last).
class SampleGrid {
 public:
  static SampleGrid build(const Box& X, double horizon, double epsilon);

  std::uint64_t size() const { return total_; }
  int state_dim() const { return state_box_.dim(); }
  double horizon() const { return horizon_; }
  double epsilon() const { return epsilon_; }
  const Box& state_box() const { return state_box_; }

  int axis_count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
  double axis_step(int axis) const { return step_[static_cast<std::size_t>(axis)]; }

  void node(std::uint64_t idx, Eigen::VectorXd& x, double& t) const;
  AugPoint node(std::uint64_t idx) const;

  Box augmented_box() const;  // W as an (n+1)-dim box

 private:
  Box state_box_;
  double horizon_ = 0.0;
  double epsilon_ = 0.0;
  std::vector<int> counts_;
  std::vector<double> lo_;
  std::vector<double> step_;
  std::uint64_t total_ = 0;
};

}  // namespace stlcbf::safeset
