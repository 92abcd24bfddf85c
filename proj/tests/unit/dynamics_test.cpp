#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stlcbf/certify/bounds.hpp"
#include "stlcbf/dynamics/system.hpp"

using namespace stlcbf;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("builtin: published constants") {
  const dyn::SystemModel mec = dyn::builtin("mecanum");
  CHECK(mec.input_box().lo[0] == doctest::Approx(-0.2));
  CHECK(mec.input_box().hi[1] == doctest::Approx(0.2));
  CHECK(mec.state_box().lo[0] == doctest::Approx(-2.0));

  const dyn::SystemModel pend = dyn::builtin("pendulum");
  CHECK(pend.input_box().lo[0] == doctest::Approx(-12.0));
  CHECK(pend.input_box().hi[0] == doctest::Approx(12.0));
  CHECK(pend.state_box().lo[0] == doctest::Approx(-0.15));
  CHECK(pend.state_box().hi[0] == doctest::Approx(M_PI / 2 + 0.15));
  CHECK(pend.state_box().hi[1] == doctest::Approx(2.15));
  // damping b = 0.1 shows up in f2 at x = [0, 1], u = 0: -b/(m l^2) = -0.8
  const Eigen::VectorXd f = pend.eval_f(vec({0.0, 1.0}), vec({0.0}));
  CHECK(f[1] == doctest::Approx(-0.8));

  const dyn::SystemModel sc = dyn::builtin("spacecraft");
  CHECK(sc.state_dim() == 3);
  CHECK(sc.input_box().hi[2] == doctest::Approx(20.0));
  CHECK(sc.state_box().hi[0] == doctest::Approx(0.25));
  // inertias (200, 200, 100) through the input path
  const Eigen::MatrixXd J = sc.input_jacobian(vec({0, 0, 0}), vec({0, 0, 0}));
  CHECK(J(0, 0) == doctest::Approx(1.0 / 200));
  CHECK(J(1, 1) == doctest::Approx(1.0 / 200));
  CHECK(J(2, 2) == doctest::Approx(1.0 / 100));

  CHECK_THROWS(dyn::builtin("unicycle"));
}

TEST_CASE("eval_f: pendulum equilibrium and gravity term") {
  const dyn::SystemModel pend = dyn::builtin("pendulum");
  const Eigen::VectorXd f0 = pend.eval_f(vec({0.0, 0.0}), vec({0.0}));
  CHECK(f0.norm() == doctest::Approx(0.0));
  const Eigen::VectorXd f1 = pend.eval_f(vec({M_PI / 2, 0.0}), vec({0.0}));
  CHECK(f1[0] == doctest::Approx(0.0));
  CHECK(f1[1] == doctest::Approx(-19.6));
}

TEST_CASE("eval_f: spacecraft input path") {
  const dyn::SystemModel sc = dyn::builtin("spacecraft");
  const Eigen::VectorXd f = sc.eval_f(vec({0, 0, 0}), vec({20, 0, 0}));
  CHECK(f[0] == doctest::Approx(0.1));
  CHECK(f[1] == doctest::Approx(0.0));
  CHECK(f[2] == doctest::Approx(0.0));
}

TEST_CASE("eval_f: dimension mismatch is an error") {
  const dyn::SystemModel mec = dyn::builtin("mecanum");
  CHECK_THROWS(mec.eval_f(vec({0, 0, 0}), vec({0, 0})));
  CHECK_THROWS(mec.eval_f(vec({0, 0}), vec({0})));
}

TEST_CASE("mecanum dynamics are state-independent") {
  const dyn::SystemModel mec = dyn::builtin("mecanum");
  Rng rng(21);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd u = vec({rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
    const Eigen::VectorXd x1 = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    const Eigen::VectorXd x2 = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    CHECK(mec.eval_f(x1, u) == mec.eval_f(x2, u));
  }
}

TEST_CASE("analytic bounds dominate Monte-Carlo estimates") {
  for (const char* name : {"mecanum", "pendulum", "spacecraft"}) {
    const dyn::SystemModel sys = dyn::builtin(name);
    const certify::DynamicsBoundsReport rep = certify::estimate_dynamics_bounds(
        sys, sys.state_box(), sys.input_box(), 10000);
    INFO(name);
    // sampled slopes may sit exactly on the bound up to division rounding
    const double slack = 1e-9;
    CHECK(rep.analytic.L_x >= rep.monte_carlo.L_x - slack);
    CHECK(rep.analytic.L_u >= rep.monte_carlo.L_u - slack);
    CHECK(rep.analytic.M_f >= rep.monte_carlo.M_f - slack);
  }
}

TEST_CASE("analytic bounds: mecanum closed forms") {
  const dyn::SystemModel mec = dyn::builtin("mecanum");
  const dyn::DynamicsBounds b = mec.analytic_bounds();
  CHECK(b.L_x == doctest::Approx(0.0));
  CHECK(b.L_u == doctest::Approx(1.0));
  CHECK(b.M_f == doctest::Approx(0.2 * std::sqrt(2.0)));
}

TEST_CASE("analytic bounds: pendulum gravity slope enters L_x") {
  const dyn::SystemModel pend = dyn::builtin("pendulum");
  const dyn::DynamicsBounds b = pend.analytic_bounds();
  CHECK(b.L_x >= 19.6);
  CHECK(std::isfinite(b.L_x));
  CHECK(b.L_u == doctest::Approx(8.0));
}

TEST_CASE("static system has zero bounds") {
  auto zero = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size()));
  };
  dyn::SystemModel sys("static", Box::cube(2, -1, 1), Box::cube(1, -1, 1), zero);
  sys = sys.with_declared_bounds({0.0, 0.0, 0.0});
  const dyn::DynamicsBounds b = sys.analytic_bounds();
  CHECK(b.L_x == 0.0);
  CHECK(b.L_u == 0.0);
  CHECK(b.M_f == 0.0);
}

TEST_CASE("with_boxes recomputes analytic bounds") {
  const dyn::SystemModel mec = dyn::builtin("mecanum");
  const dyn::SystemModel small =
      mec.with_boxes(std::nullopt, Box::cube(2, -0.1, 0.1));
  CHECK(small.analytic_bounds().M_f == doctest::Approx(0.1 * std::sqrt(2.0)));
}

TEST_CASE("registry: user-defined systems are reachable by name") {
  auto f = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(1);
    dx[0] = -x[0] + u[0];
    return dx;
  };
  dyn::register_system("leaky", dyn::SystemModel("leaky", Box::cube(1, -1, 1),
                                                 Box::cube(1, -1, 1), f));
  CHECK(dyn::is_registered("leaky"));
  const dyn::SystemModel sys = dyn::lookup_system("leaky");
  CHECK(sys.eval_f(vec({0.5}), vec({0.25}))[0] == doctest::Approx(-0.25));
  // numerical input jacobian fallback
  const Eigen::MatrixXd J = sys.input_jacobian(vec({0.5}), vec({0.0}));
  CHECK(J(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  // no declared bounds: certificates must refuse
  CHECK_THROWS(sys.analytic_bounds());
}
