#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "stlcbf/safeset/dataset.hpp"
#include "stlcbf/stl/parse.hpp"

using namespace stlcbf;

namespace {

// exact nearest-node distance in an axis-aligned uniform grid
double nearest_node_distance(const safeset::SampleGrid& g,
                             const Eigen::VectorXd& w) {
  double d2 = 0.0;
  Eigen::VectorXd x(g.state_dim());
  double t0 = 0.0;
  g.node(0, x, t0);  // first node holds the per-axis lower corners
  for (int axis = 0; axis <= g.state_dim(); ++axis) {
    const double lo = axis < g.state_dim() ? x[axis] : t0;
    const double step = g.axis_step(axis);
    const int count = g.axis_count(axis);
    double best = std::abs(w[axis] - lo);
    if (step > 0.0) {
      const double k = std::clamp(std::round((w[axis] - lo) / step), 0.0,
                                  static_cast<double>(count - 1));
      best = std::abs(w[axis] - (lo + k * step));
    }
    d2 += best * best;
  }
  return std::sqrt(d2);
}

std::shared_ptr<const safeset::SampleGrid> point_grid(
    const Eigen::VectorXd& x, double horizon, double epsilon) {
  return std::make_shared<const safeset::SampleGrid>(
      safeset::SampleGrid::build(Box(x, x), horizon, epsilon));
}

const char* kPhi1 =
    "G[0,15](norm2(x, [0,0]) <= 1.6 and norm2(x, [1,0]) > 0.3) "
    "and G[12,15](norm2(x, [0,0]) <= 0.3)";

}  // namespace

TEST_CASE("grid: unit square example") {
  const safeset::SampleGrid g =
      safeset::SampleGrid::build(Box::cube(1, 0.0, 1.0), 1.0, 0.5);
  CHECK(g.size() == 9);
  CHECK(g.axis_count(0) == 3);
  CHECK(g.axis_count(1) == 3);
  CHECK(g.axis_step(0) == doctest::Approx(0.5));
  // spacing rule h = 2 eps / sqrt(n+1)
  CHECK(2.0 * 0.5 / std::sqrt(2.0) == doctest::Approx(0.70710678).epsilon(1e-6));
  Eigen::VectorXd x;
  double t = 0.0;
  g.node(0, x, t);
  CHECK(x[0] == 0.0);
  CHECK(t == 0.0);
  g.node(8, x, t);
  CHECK(x[0] == 1.0);
  CHECK(t == 1.0);
}

TEST_CASE("grid: single center node when epsilon dominates the half-diagonal") {
  const safeset::SampleGrid g =
      safeset::SampleGrid::build(Box::cube(1, 0.0, 1.0), 1.0, 0.75);
  CHECK(g.size() == 1);
  Eigen::VectorXd x;
  double t = 0.0;
  g.node(0, x, t);
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(t == doctest::Approx(0.5));
  // the center covers the whole box within epsilon
  CHECK(Box::cube(1, 0, 1).half_diagonal() <= 0.75);
}

TEST_CASE("grid: Monte-Carlo covering oracle never exceeds epsilon") {
  Rng rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(3));
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = rng.uniform(-2, 0);
      hi[i] = lo[i] + rng.uniform(0.5, 3.0);
    }
    const double T = rng.uniform(0.5, 5.0);
    const double eps = rng.uniform(0.1, 0.6);
    const safeset::SampleGrid g = safeset::SampleGrid::build(Box(lo, hi), T, eps);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      Eigen::VectorXd w(n + 1);
      for (int i = 0; i < n; ++i) w[i] = rng.uniform(lo[i], hi[i]);
      w[n] = rng.uniform(0.0, T);
      worst = std::max(worst, nearest_node_distance(g, w));
    }
    CHECK(worst <= eps + 1e-12);
  }
}

TEST_CASE("grid: node count overflow is detected before allocation") {
  try {
    safeset::SampleGrid::build(Box::cube(4, -1e6, 1e6), 1e6, 1e-4);
    FAIL("expected overflow error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("overflows") != std::string::npos);
  }
}

TEST_CASE("label_samples: mecanum hand cases") {
  const stl::Specification spec = stl::parse_spec(kPhi1, 2);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});

  // node (x = [0,0], t = 13): goal window active, min robustness 0.3
  auto g1 = point_grid(Eigen::VectorXd::Zero(2), 13.0, 0.5);
  const safeset::LabeledDataset d1 = safeset::label_samples(g1, spec, sched);
  CHECK(d1.in_safe(d1.size() - 1));

  // node (x = [1,0], t = 1): inside the obstacle ball
  Eigen::VectorXd xu(2);
  xu << 1.0, 0.0;
  auto g2 = point_grid(xu, 1.0, 0.5);
  const safeset::LabeledDataset d2 = safeset::label_samples(g2, spec, sched);
  CHECK_FALSE(d2.in_safe(d2.size() - 1));
}

TEST_CASE("label_samples: zero robustness is in-safe") {
  const stl::Specification spec = stl::parse_spec("G[0,1](x1 <= 1)", 1);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  Eigen::VectorXd one(1);
  one << 1.0;
  auto g = point_grid(one, 1.0, 0.4);
  const safeset::LabeledDataset ds = safeset::label_samples(g, spec, sched);
  for (std::uint64_t i = 0; i < ds.size(); ++i) CHECK(ds.in_safe(i));
  CHECK(ds.min_in_safe_robustness() == doctest::Approx(0.0));
}

TEST_CASE("label_samples: labels agree with the robustness oracle") {
  const stl::Specification spec = stl::parse_spec(kPhi1, 2);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  auto grid = std::make_shared<const safeset::SampleGrid>(
      safeset::SampleGrid::build(Box::cube(2, -2, 2), 15.0, 0.8));
  const safeset::LabeledDataset ds = safeset::label_samples(grid, spec, sched);
  CHECK(ds.generation() == 0);
  CHECK(ds.in_safe_count() > 0);
  Eigen::VectorXd x;
  double t = 0.0;
  for (std::uint64_t i = 0; i < ds.size(); ++i) {
    grid->node(i, x, t);
    double rob = std::numeric_limits<double>::infinity();
    for (int blk : sched.active_blocks(t)) {
      rob = std::min(rob, oracles::brute_robustness(
                              *spec.blocks[static_cast<std::size_t>(blk)].body, x));
    }
    CHECK(ds.in_safe(i) == (rob >= 0.0));
  }
}

TEST_CASE("label_samples: deterministic across worker counts") {
  const stl::Specification spec = stl::parse_spec(kPhi1, 2);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  auto grid = std::make_shared<const safeset::SampleGrid>(
      safeset::SampleGrid::build(Box::cube(2, -2, 2), 15.0, 0.4));
  const safeset::LabeledDataset a = safeset::label_samples(grid, spec, sched);
  setenv("STLCBF_WORKERS", "1", 1);
  const safeset::LabeledDataset b = safeset::label_samples(grid, spec, sched);
  unsetenv("STLCBF_WORKERS");
  REQUIRE(a.size() == b.size());
  for (std::uint64_t i = 0; i < a.size(); ++i) CHECK(a.in_safe(i) == b.in_safe(i));
  CHECK(a.min_in_safe_robustness() == b.min_in_safe_robustness());
}

namespace {

neural::CertNet constant_barrier(int n, double value) {
  neural::CertNet net = neural::CertNet::barrier(
      n, {}, neural::Activation::Tanh, neural::CrossCoupling::product(n));
  net.bias(0)[0] = value;
  return net;
}

}  // namespace

TEST_CASE("refine: the two removal clauses and monotonicity") {
  const stl::Specification spec = stl::parse_spec("G[0,1](norm2(x, [0]) <= 2)", 1);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  auto grid = std::make_shared<const safeset::SampleGrid>(
      safeset::SampleGrid::build(Box::cube(1, -1, 1), 1.0, 0.3));
  const safeset::LabeledDataset ds = safeset::label_samples(grid, spec, sched);
  CHECK(ds.in_safe_count() == ds.size());

  // negative barrier value empties the safe side
  const safeset::LabeledDataset r1 = safeset::refine(ds, constant_barrier(1, -0.01), 100.0);
  CHECK(r1.in_safe_count() == 0);
  CHECK(r1.generation() == 1);

  // positive value, tiny gradient: nothing removed
  const safeset::LabeledDataset r2 = safeset::refine(ds, constant_barrier(1, 0.5), 100.0);
  CHECK(r2.in_safe_count() == ds.in_safe_count());

  // gradient clause: B = 5*x1 has |dB/dx| = 5 >= 4 everywhere
  neural::CertNet steep = constant_barrier(1, 0.0);
  steep.weight(0)(0, 0) = 5.0;
  steep.bias(0)[0] = 10.0;  // keep B positive so only the gradient clause fires
  const safeset::LabeledDataset r3 = safeset::refine(ds, steep, 4.0);
  CHECK(r3.in_safe_count() == 0);

  // out-safe points never come back
  const safeset::LabeledDataset r4 = safeset::refine(r1, constant_barrier(1, 0.5), 100.0);
  CHECK(r4.in_safe_count() == 0);
  CHECK(r4.generation() == 2);
}

TEST_CASE("refine: random barriers shrink monotonically, removals justified") {
  Rng rng(42);
  const stl::Specification spec =
      stl::parse_spec("G[0,2](norm2(x, [0,0]) <= 1.5)", 2);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  auto grid = std::make_shared<const safeset::SampleGrid>(
      safeset::SampleGrid::build(Box::cube(2, -1, 1), 2.0, 0.35));
  const safeset::LabeledDataset base = safeset::label_samples(grid, spec, sched);

  for (int trial = 0; trial < 50; ++trial) {
    neural::CertNet barrier = oracles::random_barrier(
        rng, 2, {6},
        trial % 2 == 0 ? neural::CouplingKind::Product
                       : neural::CouplingKind::Exponential);
    const double mb = rng.uniform(0.2, 2.0);
    const safeset::LabeledDataset refined = safeset::refine(base, barrier, mb);
    CHECK(refined.generation() == base.generation() + 1);
    Eigen::VectorXd x;
    double t = 0.0;
    for (std::uint64_t i = 0; i < base.size(); ++i) {
      if (refined.in_safe(i)) CHECK(base.in_safe(i));  // subset
      if (base.in_safe(i)) {
        grid->node(i, x, t);
        const double B = barrier.value(x, t);
        const Eigen::VectorXd g = barrier.input_jacobian(x, t).gradient();
        const bool removed = !refined.in_safe(i);
        CHECK(removed == (B < 0.0 || g.norm() >= mb));
      }
    }
  }
}

TEST_CASE("dataset CSV export") {
  const stl::Specification spec = stl::parse_spec("G[0,1](x1 <= 0.5)", 1);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  auto grid = std::make_shared<const safeset::SampleGrid>(
      safeset::SampleGrid::build(Box::cube(1, 0, 1), 1.0, 0.4));
  const safeset::LabeledDataset ds = safeset::label_samples(grid, spec, sched);
  const std::string path =
      (std::filesystem::temp_directory_path() / "stlcbf_ds.csv").string();
  safeset::export_csv(ds, path);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "x1,t,label,generation");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == ds.size());
  std::filesystem::remove(path);
}
