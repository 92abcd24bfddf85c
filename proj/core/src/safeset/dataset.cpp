#include "stlcbf/safeset/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "stlcbf/common/parallel.hpp"
#include "stlcbf/neural/grad.hpp"

namespace stlcbf::safeset {

namespace {
// chunks own disjoint 64-bit words of the label bitset
constexpr std::uint64_t kChunk = 4096;
}

LabeledDataset::LabeledDataset(std::shared_ptr<const SampleGrid> grid)
    : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("dataset: null grid");
  bits_.assign((grid_->size() + 63) / 64, 0);
}

std::uint64_t LabeledDataset::in_safe_count() const {
  std::uint64_t c = 0;
  for (std::uint64_t w : bits_) c += static_cast<std::uint64_t>(__builtin_popcountll(w));
  return c;
}

std::vector<std::uint64_t> LabeledDataset::in_safe_indices() const {
  std::vector<std::uint64_t> idx;
  idx.reserve(in_safe_count());
  for (std::uint64_t i = 0; i < size(); ++i) {
    if (in_safe(i)) idx.push_back(i);
  }
  return idx;
}

std::vector<std::uint64_t> LabeledDataset::out_safe_indices() const {
  std::vector<std::uint64_t> idx;
  idx.reserve(size() - in_safe_count());
  for (std::uint64_t i = 0; i < size(); ++i) {
    if (!in_safe(i)) idx.push_back(i);
  }
  return idx;
}

LabeledDataset label_samples(std::shared_ptr<const SampleGrid> grid,
                             const stl::Specification& spec,
                             const stl::ActiveSchedule& sched,
                             double true_value) {
  if (spec.blocks.size() != sched.intervals.size()) {
    throw std::invalid_argument("label_samples: schedule/spec block count mismatch");
  }
  LabeledDataset ds(grid);
  const std::uint64_t n = grid->size();
  const std::size_t chunks = chunk_count(n, kChunk);
  std::vector<double> chunk_min(chunks, std::numeric_limits<double>::infinity());

  // writes touch disjoint words per chunk (kChunk is a multiple of 64)
  parallel_chunks(n, kChunk, [&](std::size_t c, std::uint64_t b, std::uint64_t e) {
    Eigen::VectorXd x;
    double t = 0.0;
    double local_min = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = b; i < e; ++i) {
      grid->node(i, x, t);
      double rob = std::numeric_limits<double>::infinity();
      bool any = false;
      for (std::size_t blk = 0; blk < sched.intervals.size(); ++blk) {
        const auto& iv = sched.intervals[blk];
        if (t < iv[0] - 1e-9 || t > iv[1] + 1e-9) continue;
        any = true;
        rob = std::min(rob, stl::robustness_bool(*spec.blocks[blk].body, x, true_value));
        if (rob < 0.0) break;
      }
      if (!any) rob = true_value;  // vacuous conjunction
      if (rob >= 0.0) {
        ds.set_in_safe(i);
        local_min = std::min(local_min, rob);
      }
    }
    chunk_min[c] = local_min;
  });

  double m = std::numeric_limits<double>::infinity();
  for (double v : chunk_min) m = std::min(m, v);
  ds.set_min_in_safe_robustness(m);
  ds.set_generation(0);
  return ds;
}

LabeledDataset refine(const LabeledDataset& ds, const neural::CertNet& barrier,
                      double grad_bound) {
  if (barrier.state_dim() != ds.grid().state_dim()) {
    throw std::invalid_argument("refine: barrier/grid dimension mismatch");
  }
  LabeledDataset out = ds;
  out.set_generation(ds.generation() + 1);
  const std::uint64_t n = ds.size();

  parallel_chunks(n, kChunk, [&](std::size_t, std::uint64_t b, std::uint64_t e) {
    thread_local neural::NetWorkspace ws;
    ws.resize(barrier);
    Eigen::VectorXd x;
    double t = 0.0;
    for (std::uint64_t i = b; i < e; ++i) {
      if (!ds.in_safe(i)) continue;
      ds.grid().node(i, x, t);
      neural::forward_ws(barrier, x, t, ws);
      const double value = ws.out[0];
      neural::input_gradient_ws(barrier, ws);
      if (value < 0.0 || ws.gamma.norm() >= grad_bound) {
        out.clear_in_safe(i);
      }
    }
  });
  return out;
}

void export_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write dataset CSV: " + path);
  const int n = ds.grid().state_dim();
  for (int i = 1; i <= n; ++i) f << "x" << i << ",";
  f << "t,label,generation\n";
  char buf[32];
  Eigen::VectorXd x;
  double t = 0.0;
  for (std::uint64_t i = 0; i < ds.size(); ++i) {
    ds.grid().node(i, x, t);
    for (int k = 0; k < n; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x[k]);
      f << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", t);
    f << buf << "," << (ds.in_safe(i) ? 1 : 0) << "," << ds.generation() << "\n";
  }
}

}  // namespace stlcbf::safeset
