#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stlcbf/neural/net.hpp"
#include "stlcbf/safeset/grid.hpp"
#include "stlcbf/stl/robustness.hpp"
#include "stlcbf/stl/schedule.hpp"

namespace stlcbf::safeset {

// Grid samples labeled against the time-varying safe set: a sample is
// in-safe when the minimum robustness over the temporal blocks active at its
// time is >= 0. Labels live in a bitset; points are recomputed from the grid
// on demand, so fine grids stay cheap to hold.
class LabeledDataset {
 public:
  explicit LabeledDataset(std::shared_ptr<const SampleGrid> grid);

  const SampleGrid& grid() const { return *grid_; }
  std::shared_ptr<const SampleGrid> grid_ptr() const { return grid_; }
  std::uint64_t size() const { return grid_->size(); }

  bool in_safe(std::uint64_t i) const {
    return (bits_[i >> 6] >> (i & 63)) & 1u;
  }
  void set_in_safe(std::uint64_t i) { bits_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void clear_in_safe(std::uint64_t i) { bits_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

  int generation() const { return generation_; }
  void set_generation(int g) { generation_ = g; }

  std::uint64_t in_safe_count() const;
  std::vector<std::uint64_t> in_safe_indices() const;
  std::vector<std::uint64_t> out_safe_indices() const;

  // min robustness among in-safe samples at labeling time; surfaces how thin
  // the sampled safe set is
  double min_in_safe_robustness() const { return min_in_safe_rob_; }
  void set_min_in_safe_robustness(double v) { min_in_safe_rob_ = v; }

 private:
  std::shared_ptr<const SampleGrid> grid_;
  std::vector<std::uint64_t> bits_;
  int generation_ = 0;
  double min_in_safe_rob_ = 0.0;
};

LabeledDataset label_samples(std::shared_ptr<const SampleGrid> grid,
                             const stl::Specification& spec,
                             const stl::ActiveSchedule& sched,
                             double true_value = stl::kTrueRobustness);

// One refinement pass: every in-safe sample whose barrier value is negative
// or whose input-gradient 2-norm reaches grad_bound becomes out-safe.
// Out-safe samples never return; the generation index is incremented.
LabeledDataset refine(const LabeledDataset& ds, const neural::CertNet& barrier,
                      double grad_bound);

// CSV export: x1..xn, t, label (1 = in-safe), generation.
void export_csv(const LabeledDataset& ds, const std::string& path);

}  // namespace stlcbf::safeset
