// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "bgklim/kinetic_analysis.hpp"

using namespace bgklim;

namespace {

// two-cell, two-speed trajectory with hand-checkable defect values
Trajectory toy_trajectory(double f_lo, double f_hi) {
  Grid g = Grid::make(-0.5, 0.5, 2, 2, 1.0, 1.0);
  Trajectory traj;
  traj.grid = g;
  traj.times = {0.0, 1.0};
  KineticDensity f0 = KineticDensity::equilibrium(MacroField::constant(g, 0.5));
  KineticDensity f1 = KineticDensity::zeros(g);
  for (int i = 0; i < g.n_x; ++i) {
    f1.at(i, 0) = f_lo;
    f1.at(i, 1) = f_hi;
  }
  traj.fs = {f0, f1};
  traj.us = {moments(f0), moments(f1)};
  return traj;
}

} // namespace

TEST_CASE("defect values on a hand-worked trajectory") {
  // second snapshot holds f = (1/2, 1/2) per cell, so u = 1/2 and
  // chi - f = (+1/2, -1/2): the running xi-sum peaks at the midpoint
  Trajectory traj = toy_trajectory(0.5, 0.5);
  DefectMeasure m = defect_measure(traj, 1.0);
  REQUIRE(m.n_snapshots() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(m.at(0, i, 0) == 0.0);
    CHECK(m.at(0, i, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(m.at(0, i, 2) == Catch::Approx(0.0).margin(1e-15));
    CHECK(m.at(1, i, 0) == 0.0);
    CHECK(m.at(1, i, 1) == Catch::Approx(0.25));
    CHECK(m.at(1, i, 2) == Catch::Approx(0.0).margin(1e-15));
  }
  CHECK(defect_mass(m) == Catch::Approx(0.0625));

  // halving eps doubles the density and the mass
  DefectMeasure m2 = defect_measure(traj, 0.5);
  CHECK(m2.at(1, 0, 1) == Catch::Approx(0.5));
  CHECK(defect_mass(m2) == Catch::Approx(0.125));

  CHECK_THROWS_AS(defect_measure(traj, 0.0), config_error);
}

TEST_CASE("defect rejects densities above the equilibrium envelope") {
  // f = (3/2, 1/2) has u = 1, chi = (1, 1), so the first partial sum is
  // negative: not a valid distance-from-equilibrium configuration
  Trajectory traj = toy_trajectory(1.5, 0.5);
  CHECK_THROWS_AS(defect_measure(traj, 1.0), integrity_error);
}

TEST_CASE("interface corrections for the coefficient jump") {
  const VelocityModel vel = VelocityModel::burgers();
  Trajectory traj = toy_trajectory(0.5, 0.5);
  DefectMeasure m = defect_measure(traj, 1.0);

  SECTION("decreasing jump adds mass on the minus side") {
    const Coefficient k = Coefficient::make(2.0, 1.0);
    DefectMeasure minus = interface_correction(m, k, vel, SignCase::minus);
    REQUIRE(minus.atom.size() == 3);
    // (kL - kR)^+ A(xi) at xi in {0, 1/2, 1}
    CHECK(minus.atom[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(minus.atom[1] == Catch::Approx(0.25));
    CHECK(minus.atom[2] == Catch::Approx(0.0).margin(1e-15));
    CHECK(minus.atom_nonneg);

    DefectMeasure plus = interface_correction(m, k, vel, SignCase::plus);
    CHECK(plus.atom[1] == Catch::Approx(-0.25));
    CHECK_FALSE(plus.atom_nonneg); // flagged, not fatal
  }

  SECTION("increasing jump contributes nothing") {
    const Coefficient k = Coefficient::make(1.0, 2.0);
    for (SignCase sc : {SignCase::plus, SignCase::minus}) {
      DefectMeasure c = interface_correction(m, k, vel, sc);
      for (double v : c.atom) CHECK(v == 0.0);
      CHECK(c.atom_nonneg);
    }
  }

  // the correction leaves the cell part untouched
  DefectMeasure c = interface_correction(m, Coefficient::make(2.0, 1.0), vel, SignCase::minus);
  CHECK(c.at(1, 0, 1) == m.at(1, 0, 1));
}

TEST_CASE("test family is fixed, compact and versioned") {
  Grid g = Grid::make(-2.0, 2.0, 64, 16, 0.01, 1.0);
  const double T = 1.0;
  std::vector<TestFunction> fam = make_test_family(g, T);
  REQUIRE(fam.size() == 16);

  std::set<std::string> ids;
  for (const TestFunction& tf : fam) {
    ids.insert(tf.id);
    CHECK(tf.id.rfind("fam-v1/", 0) == 0);
    // final-time and boundary values vanish so no boundary terms are dropped
    CHECK(tf.theta.f(T) == 0.0);
    CHECK(tf.theta.f(1.5 * T) == 0.0);
    CHECK(tf.phi.f(g.x_min) == 0.0);
    CHECK(tf.phi.f(g.x_max) == 0.0);
    CHECK(tf.mu.f(0.5) != 0.0);
  }
  CHECK(ids.size() == fam.size()); // no duplicates

  // the interface-cutoff variants vanish at x = 0
  for (const TestFunction& tf : fam)
    if (tf.id.find("xcut") != std::string::npos) {
      CHECK(tf.phi.f(0.0) == 0.0);
      CHECK(tf.phi.f(4.1 * g.dx) != 0.0);
    }
}

TEST_CASE("weak residual vanishes identically on degenerate states") {
  const VelocityModel vel = VelocityModel::burgers();
  const Coefficient k = Coefficient::make(1.0, 1.0);
  const double T = 0.25;
  Grid g = Grid::make(-1.0, 1.0, 32, 8, 0.01, T);
  std::vector<TestFunction> fam = make_test_family(g, T);

  // u = 0: chi vanishes, so the plus-side integrand is identically zero
  BgkConfig cfg = BgkConfig::make(0.1, Splitting::strang, g.dt, T);
  Trajectory t0 = bgk_run(MacroField::constant(g, 0.0), cfg, k, vel, 4);
  DefectMeasure m0 = defect_measure(t0, cfg.eps);
  for (double r : kinetic_residual(t0.times, t0.us, m0, fam, SignCase::plus, k, vel))
    CHECK(std::abs(r) <= 1e-15);

  // u = 1: chi - 1 vanishes, so the minus side is identically zero
  Trajectory t1 = bgk_run(MacroField::constant(g, 1.0), cfg, k, vel, 4);
  DefectMeasure m1 = defect_measure(t1, cfg.eps);
  for (double r : kinetic_residual(t1.times, t1.us, m1, fam, SignCase::minus, k, vel))
    CHECK(std::abs(r) <= 1e-15);
}

TEST_CASE("weak residual input validation") {
  const VelocityModel vel = VelocityModel::burgers();
  const Coefficient k = Coefficient::make(1.0, 1.0);
  Trajectory traj = toy_trajectory(0.5, 0.5);
  DefectMeasure m = defect_measure(traj, 1.0);
  std::vector<TestFunction> fam = make_test_family(traj.grid, 1.0);

  std::vector<double> short_times = {0.0};
  CHECK_THROWS_AS(kinetic_residual(short_times, traj.us, m, fam, SignCase::plus, k, vel),
                  config_error);
  std::vector<MacroField> short_us = {traj.us.front()};
  CHECK_THROWS_AS(kinetic_residual(traj.times, short_us, m, fam, SignCase::plus, k, vel),
                  config_error);
}

TEST_CASE("defect stays nonnegative along a genuine solver run") {
  const VelocityModel vel = VelocityModel::burgers();
  const Coefficient k = Coefficient::make(1.0, 1.0);
  const double T = 0.25, eps = 0.02;
  Grid g = Grid::make(-2.0, 2.0, 128, 32, 2.0 * 4.0 / 128, T);
  const MacroField u0 = MacroField::riemann(g, 0.8, 0.2);
  Trajectory traj = bgk_run(u0, BgkConfig::make(eps, Splitting::strang, g.dt, T), k, vel, 8);
  DefectMeasure m = defect_measure(traj, eps); // would throw on a negative value
  const double mass = defect_mass(m);
  CHECK(mass >= 0.0);
  CHECK(mass <= u0.l1() + 10.0 * (g.dx + g.dt));
}

TEST_CASE("positive-part comparison functional") {
  Grid g = Grid::make(-2.0, 2.0, 32, 1, 0.1, 1.0);
  std::vector<double> times = {0.0, 0.5, 1.0};
  std::vector<MacroField> us(3, MacroField::constant(g, 0.7));
  std::vector<MacroField> vs(3, MacroField::constant(g, 0.3));

  SECTION("hand-computed value for ordered constants") {
    ComparePlusResult r = compare_plus(times, us, vs, 0.5, 1.0, 1.0);
    // 8 cells inside |x| < 1/2, 24 inside |x| < 3/2, gap 0.4, dx = 1/8
    CHECK(r.lhs == Catch::Approx(0.4));
    CHECK(r.rhs == Catch::Approx(1.2));
    CHECK(r.lhs <= r.rhs);
  }

  SECTION("identical trajectories give zero on both sides") {
    ComparePlusResult r = compare_plus(times, us, us, 0.5, 1.0, 1.0);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
  }

  SECTION("reversed order only counts on the rhs of the swap") {
    ComparePlusResult r = compare_plus(times, vs, us, 0.5, 1.0, 1.0);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
  }

  SECTION("domain must contain the expanded window") {
    CHECK_THROWS_AS(compare_plus(times, us, vs, 1.9, 1.0, 1.0), config_error);
  }

  SECTION("trajectories must align") {
    std::vector<MacroField> shorter(2, MacroField::constant(g, 0.3));
    CHECK_THROWS_AS(compare_plus(times, us, shorter, 0.5, 1.0, 1.0), config_error);
  }
}
