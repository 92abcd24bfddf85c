#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stlcbf/stl/parse.hpp"
#include "stlcbf/stl/robustness.hpp"
#include "stlcbf/stl/schedule.hpp"

using namespace stlcbf;
using oracles::brute_robustness;

namespace {

const char* kPhi1 =
    "G[0,15](norm2(x, [0,0]) <= 1.6 and norm2(x, [1,0]) > 0.3) "
    "and G[12,15](norm2(x, [0,0]) <= 0.3)";

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("parse: mecanum spec structure") {
  const stl::Specification spec = stl::parse_spec(kPhi1, 2);
  REQUIRE(spec.blocks.size() == 2);
  CHECK(spec.horizon == doctest::Approx(15.0));
  CHECK(spec.state_dim == 2);
  CHECK(spec.blocks[0].op == stl::TemporalOp::Always);
  CHECK(spec.blocks[0].a == 0.0);
  CHECK(spec.blocks[0].b == 15.0);
  CHECK(spec.blocks[1].a == 12.0);
  CHECK(spec.blocks[1].b == 15.0);
  // first body: conjunction of the workspace ball and the negated obstacle ball
  const auto* body = std::get_if<stl::AndNode>(&spec.blocks[0].body->node);
  REQUIRE(body != nullptr);
  CHECK(body->children.size() == 2);
  CHECK(std::holds_alternative<stl::PredicateAtom>(body->children[0]->node));
  CHECK(std::holds_alternative<stl::NotNode>(body->children[1]->node));
}

TEST_CASE("parse: true literal block") {
  const stl::Specification spec = stl::parse_spec("G[0,1](true)", 1);
  REQUIRE(spec.blocks.size() == 1);
  CHECK(spec.horizon == doctest::Approx(1.0));
  CHECK(std::holds_alternative<stl::TrueNode>(spec.blocks[0].body->node));
}

TEST_CASE("parse: eventually block with affine body") {
  const stl::Specification spec =
      stl::parse_spec("F[5,8](x1 >= 0 and x1 <= 0.15)", 3);
  REQUIRE(spec.blocks.size() == 1);
  CHECK(spec.blocks[0].op == stl::TemporalOp::Eventually);
  CHECK(spec.blocks[0].a == 5.0);
  CHECK(spec.blocks[0].b == 8.0);
}

TEST_CASE("parse: pi expressions and abs sugar") {
  const stl::Specification spec =
      stl::parse_spec("G[0,16](x1 >= 0 and x1 <= pi/2 and |x2| <= 2)", 2);
  const auto* body = std::get_if<stl::AndNode>(&spec.blocks[0].body->node);
  REQUIRE(body != nullptr);
  // |x2| <= 2 expands to two atoms; robustness at [pi/4, 1.5] is
  // min(pi/4, pi/4, 0.5, 3.5) = 0.5
  const double r = stl::robustness_bool(spec.blocks[0].body, vec2(M_PI / 4, 1.5));
  CHECK(r == doctest::Approx(0.5));
}

TEST_CASE("parse: rejects outside-fragment constructs") {
  CHECK_THROWS_AS(stl::parse_spec("G[0,1](G[0,1](x1 <= 1))", 1), stl::ParseError);
  CHECK_THROWS_AS(stl::parse_spec("G[0,1](F[0,1](x1 <= 1))", 1), stl::ParseError);
  CHECK_THROWS_AS(stl::parse_spec("U[0,1](x1 <= 1)", 1, 2.0), stl::ParseError);
  CHECK_THROWS_AS(stl::parse_spec("G[0,1](x1 <= 1) and U[1,2](x1 <= 1)", 1),
                  stl::ParseError);
}

TEST_CASE("parse: errors carry location and reject bad dimensions") {
  try {
    stl::parse_spec("G[0,1](x1 <= 1 and\n x2 >= )", 2);
    FAIL("expected parse error");
  } catch (const stl::ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.col > 1);
  }
  // vector literal of the wrong length
  CHECK_THROWS_AS(stl::parse_spec("G[0,1](norm2(x, [0,0,0]) <= 1)", 2),
                  stl::ParseError);
  // state index out of range
  CHECK_THROWS_AS(stl::parse_spec("G[0,1](x3 <= 1)", 2), stl::ParseError);
  // malformed interval
  CHECK_THROWS_AS(stl::parse_spec("G[1,1](x1 <= 1)", 1), stl::ParseError);
  CHECK_THROWS_AS(stl::parse_spec("G[0-1,1](x1 <= 1)", 1), stl::ParseError);
}

TEST_CASE("robustness_bool: atom and negation") {
  const auto atom = stl::PredicateAtom::ball(vec2(0, 0), 1.6, stl::NormOrder::L2);
  CHECK(atom.eval(vec2(0, 0)) == doctest::Approx(1.6));
  const auto f = stl::make_atom(atom);
  CHECK(stl::robustness_bool(f, vec2(0, 0)) == doctest::Approx(1.6));
  CHECK(stl::robustness_bool(stl::make_not(f), vec2(0, 0)) ==
        doctest::Approx(-1.6));
}

TEST_CASE("robustness_bool: mecanum goal-window conjunction at origin") {
  const stl::Specification spec = stl::parse_spec(kPhi1, 2);
  // min(0.3 - 0, 1.6 - 0, 1 - 0.3) = 0.3
  const double r =
      std::min(stl::robustness_bool(spec.blocks[0].body, vec2(0, 0)),
               stl::robustness_bool(spec.blocks[1].body, vec2(0, 0)));
  CHECK(r == doctest::Approx(0.3));
}

TEST_CASE("robustness_bool: sign soundness on atoms") {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const auto atom = oracles::random_atom(rng, 3);
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-2.0, 2.0);
    const auto f = stl::make_atom(atom);
    CHECK((stl::robustness_bool(f, x) >= 0.0) == (atom.eval(x) >= 0.0));
  }
}

TEST_CASE("robustness_bool: De Morgan consistency, exact") {
  Rng rng(12);
  for (int k = 0; k < 200; ++k) {
    const auto a = oracles::random_formula(rng, 2, 2);
    const auto b = oracles::random_formula(rng, 2, 2);
    const Eigen::VectorXd x = vec2(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const auto lhs = stl::make_not(stl::make_and({a, b}));
    const auto rhs = stl::make_or({stl::make_not(a), stl::make_not(b)});
    CHECK(stl::robustness_bool(lhs, x) == stl::robustness_bool(rhs, x));
  }
}

TEST_CASE("robustness_bool: equals brute-force oracle exactly") {
  Rng rng(13);
  for (int k = 0; k < 500; ++k) {
    const auto f = oracles::random_formula(rng, 3, 5);
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd x(3);
      for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-3.0, 3.0);
      CHECK(stl::robustness_bool(f, x) == brute_robustness(*f, x));
    }
  }
}

TEST_CASE("robustness_signal: constant origin trajectory under the mecanum spec") {
  const stl::Specification spec = stl::parse_spec(kPhi1, 2);
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  for (int k = 0; k <= 150; ++k) {
    times.push_back(0.1 * k);
    states.push_back(vec2(0, 0));
  }
  CHECK(stl::robustness_signal(spec, times, states) == doctest::Approx(0.3));
}

TEST_CASE("robustness_signal: true spec gives the large constant") {
  const stl::Specification spec = stl::parse_spec("G[0,1](true)", 1);
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<Eigen::VectorXd> states(3, Eigen::VectorXd::Zero(1));
  CHECK(stl::robustness_signal(spec, times, states) ==
        doctest::Approx(stl::kTrueRobustness));
}

TEST_CASE("robustness_signal: eventually takes the max over samples") {
  const stl::Specification spec = stl::parse_spec("F[0,1](x1 >= 0)", 1);
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<Eigen::VectorXd> states;
  for (double t : times) {
    Eigen::VectorXd x(1);
    x << t - 0.5;
    states.push_back(x);
  }
  CHECK(stl::robustness_signal(spec, times, states) == doctest::Approx(0.5));
}

TEST_CASE("robustness_signal: rejects non-covering trajectories") {
  const stl::Specification spec = stl::parse_spec("G[0,15](x1 <= 1)", 1);
  std::vector<double> times{0.0, 1.0, 2.0};
  std::vector<Eigen::VectorXd> states(3, Eigen::VectorXd::Zero(1));
  CHECK_THROWS(stl::robustness_signal(spec, times, states));
}

TEST_CASE("robustness_signal: matches brute-force min/max over random cases") {
  Rng rng(14);
  for (int k = 0; k < 100; ++k) {
    stl::TemporalBlock blk;
    blk.op = rng.uniform() < 0.5 ? stl::TemporalOp::Always
                                 : stl::TemporalOp::Eventually;
    blk.a = rng.uniform(0.0, 2.0);
    blk.b = blk.a + rng.uniform(0.5, 3.0);
    blk.body = oracles::random_formula(rng, 2, 3);
    stl::Specification spec;
    spec.blocks = {blk};
    spec.horizon = blk.b;
    spec.state_dim = 2;

    // piecewise-constant trajectory over [0, b]
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    const int steps = 20 + static_cast<int>(rng.index(20));
    Eigen::VectorXd cur = vec2(rng.uniform(-2, 2), rng.uniform(-2, 2));
    for (int i = 0; i <= steps; ++i) {
      times.push_back(blk.b * i / steps);
      if (rng.uniform() < 0.3) cur = vec2(rng.uniform(-2, 2), rng.uniform(-2, 2));
      states.push_back(cur);
    }

    double expect = blk.op == stl::TemporalOp::Always
                        ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < blk.a || times[i] > blk.b) continue;
      const double r = brute_robustness(*blk.body, states[i]);
      expect = blk.op == stl::TemporalOp::Always ? std::min(expect, r)
                                                 : std::max(expect, r);
    }
    CHECK(stl::robustness_signal(spec, times, states) == expect);
  }
}

TEST_CASE("robustness_signal: conjunction equals min over per-block values") {
  Rng rng(15);
  for (int k = 0; k < 50; ++k) {
    stl::Specification spec;
    spec.state_dim = 2;
    const int nblocks = 2 + static_cast<int>(rng.index(3));
    double maxb = 0.0;
    for (int i = 0; i < nblocks; ++i) {
      stl::TemporalBlock blk;
      blk.op = rng.uniform() < 0.5 ? stl::TemporalOp::Always
                                   : stl::TemporalOp::Eventually;
      blk.a = rng.uniform(0.0, 2.0);
      blk.b = blk.a + rng.uniform(0.5, 2.0);
      blk.body = oracles::random_formula(rng, 2, 2);
      maxb = std::max(maxb, blk.b);
      spec.blocks.push_back(blk);
    }
    spec.horizon = maxb;

    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    for (int i = 0; i <= 40; ++i) {
      times.push_back(maxb * i / 40);
      states.push_back(vec2(rng.uniform(-2, 2), rng.uniform(-2, 2)));
    }
    double expect = std::numeric_limits<double>::infinity();
    for (const auto& blk : spec.blocks) {
      expect =
          std::min(expect, stl::robustness_signal_block(blk, times, states));
    }
    CHECK(stl::robustness_signal(spec, times, states) == expect);
  }
}

TEST_CASE("assign_intervals: always keeps, eventually follows the anchor") {
  const stl::Specification phi4 =
      stl::parse_spec("G[0,15](norminf(x, [0,0,0]) <= 0.2) and "
                      "F[5,8](x1 >= 0 and x1 <= 0.15)",
                      3);
  stl::IntervalPolicy mid;
  mid.anchor = stl::IntervalPolicy::Anchor::Midpoint;
  mid.delta = 1.0;
  const stl::ActiveSchedule s1 = stl::assign_intervals(phi4, mid);
  CHECK(s1.intervals[0][0] == doctest::Approx(0.0));
  CHECK(s1.intervals[0][1] == doctest::Approx(15.0));
  CHECK(s1.intervals[1][0] == doctest::Approx(6.0));
  CHECK(s1.intervals[1][1] == doctest::Approx(7.0));

  stl::IntervalPolicy start;
  start.anchor = stl::IntervalPolicy::Anchor::Start;
  start.delta = 0.5;
  const stl::ActiveSchedule s2 = stl::assign_intervals(phi4, start);
  CHECK(s2.intervals[1][0] == doctest::Approx(5.0));
  CHECK(s2.intervals[1][1] == doctest::Approx(5.5));

  stl::IntervalPolicy bad;
  bad.delta = 4.0;  // does not fit [5, 8]
  CHECK_THROWS(stl::assign_intervals(phi4, bad));
}

TEST_CASE("assign_intervals: default delta is 20% of the interval width") {
  const stl::Specification spec = stl::parse_spec("F[5,8](x1 >= 0)", 1);
  const stl::ActiveSchedule s = stl::assign_intervals(spec, {});
  CHECK(s.intervals[0][1] - s.intervals[0][0] == doctest::Approx(0.6));
}

TEST_CASE("active_blocks: mecanum schedule") {
  const stl::Specification spec = stl::parse_spec(kPhi1, 2);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  CHECK(sched.active_blocks(13.0) == std::vector<int>{0, 1});
  CHECK(sched.active_blocks(5.0) == std::vector<int>{0});
}

TEST_CASE("active_blocks: empty outside every interval") {
  const stl::Specification spec = stl::parse_spec("G[2,3](x1 <= 1)", 1, 10.0);
  const stl::ActiveSchedule sched = stl::assign_intervals(spec, {});
  CHECK(sched.active_blocks(5.0).empty());
  CHECK_FALSE(sched.covers(spec.horizon));
}

TEST_CASE("ensure_coverage: gap triggers the box block") {
  // blocks on [0,3] and [5,10] leave a gap on (3,5)
  const stl::Specification spec =
      stl::parse_spec("G[0,3](x1 <= 1) and G[5,10](x1 <= 1)", 2, 10.0);
  const Box box = Box::cube(2, -2.0, 2.0);
  const stl::Specification cov = stl::ensure_coverage(spec, box);
  REQUIRE(cov.blocks.size() == 3);
  CHECK(cov.blocks[0].a == 0.0);
  CHECK(cov.blocks[0].b == 10.0);
  const auto* atom = std::get_if<stl::PredicateAtom>(&cov.blocks[0].body->node);
  REQUIRE(atom != nullptr);
  CHECK(atom->kind == stl::PredicateAtom::Kind::Norm);
  CHECK(atom->order == stl::NormOrder::LInf);
  CHECK(atom->radius == doctest::Approx(1.0));
  CHECK(atom->scale[0] == doctest::Approx(0.5));
  CHECK(atom->scale[1] == doctest::Approx(0.5));
  CHECK(atom->center.norm() == doctest::Approx(0.0));
  // h(x) = 1 - ||diag(0.5) x||_inf: zero exactly on the box boundary
  CHECK(atom->eval(vec2(2.0, 0.0)) == doctest::Approx(0.0));
  CHECK(atom->eval(vec2(0.0, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("ensure_coverage: covered spec unchanged; empty spec gets one block") {
  const stl::Specification phi1 = stl::parse_spec(kPhi1, 2);
  const Box box = Box::cube(2, -2.0, 2.0);
  CHECK(stl::ensure_coverage(phi1, box).blocks.size() == 2);

  stl::Specification empty;
  empty.horizon = 4.0;
  empty.state_dim = 2;
  const stl::Specification cov = stl::ensure_coverage(empty, box);
  REQUIRE(cov.blocks.size() == 1);
  CHECK(cov.blocks[0].b == doctest::Approx(4.0));
}

TEST_CASE("ensure_coverage + assign_intervals: schedule covers the horizon") {
  Rng rng(16);
  const stl::Specification spec =
      stl::parse_spec("G[2,3](x1 <= 1) and F[6,9](x1 >= 0)", 2, 12.0);
  const stl::Specification cov =
      stl::ensure_coverage(spec, Box::cube(2, -1.0, 1.0));
  const stl::ActiveSchedule sched = stl::assign_intervals(cov, {});
  int bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const double t = rng.uniform(0.0, cov.horizon);
    if (sched.active_blocks(t).empty()) ++bad;
  }
  CHECK(bad == 0);
}
