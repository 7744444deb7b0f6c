// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <random>

#include "bgklim/model.hpp"

using namespace bgklim;

TEST_CASE("coefficient validation and derived ratios") {
  Coefficient k = Coefficient::make(1.0, 2.0);
  CHECK(k.at(-0.5) == 1.0);
  CHECK(k.at(0.5) == 2.0);
  CHECK(k.at(0.0) == 2.0); // x = 0 belongs to the right trace
  CHECK(k.jump_ratio() == 2.0);
  CHECK(Coefficient::make(2.0, 1.0).jump_ratio() == 2.0);
  CHECK(Coefficient::make(0.5, 0.5).jump_ratio() == 1.0);

  // alpha scales x < 0, beta scales x > 0; both are 1 at the interface
  CHECK(k.alpha(-1.0) == 2.0);
  CHECK(k.alpha(1.0) == 1.0);
  CHECK(k.alpha(0.0) == 1.0);
  CHECK(k.beta(1.0) == 0.5);
  CHECK(k.beta(-1.0) == 1.0);
  CHECK(k.beta(0.0) == 1.0);

  CHECK_THROWS_AS(Coefficient::make(1.0, 0.0), hypothesis_error);
  CHECK_THROWS_AS(Coefficient::make(-1.0, 2.0), hypothesis_error);
  CHECK_THROWS_AS(Coefficient::make(0.0, 0.0), hypothesis_error);
  CHECK_NOTHROW(Coefficient::make(-2.0, -0.5)); // both negative is allowed
}

TEST_CASE("burgers velocity tables") {
  VelocityModel vel = VelocityModel::burgers();
  CHECK(vel.a(0.0) == Catch::Approx(1.0));
  CHECK(vel.a(0.25) == Catch::Approx(0.5));
  CHECK(vel.a(0.5) == Catch::Approx(0.0).margin(1e-15));
  CHECK(vel.a(1.0) == Catch::Approx(-1.0));
  CHECK(vel.a(-0.2) == 0.0); // zero outside [0,1]
  CHECK(vel.a(1.2) == 0.0);

  CHECK(vel.A(0.25) == Catch::Approx(0.1875));
  CHECK(vel.A(0.5) == Catch::Approx(0.25));
  CHECK(vel.A(1.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(vel.A(2.0) == Catch::Approx(0.0).margin(1e-15));

  CHECK(vel.A_pos(0.3) == Catch::Approx(0.21));
  CHECK(vel.A_pos(1.0) == Catch::Approx(0.25));
  CHECK(vel.A_neg(1.0) == Catch::Approx(-0.25));
  CHECK(vel.A_neg(0.3) == Catch::Approx(0.0).margin(1e-15));
  // split is exact: A = A_pos + A_neg
  for (double u : {0.1, 0.37, 0.5, 0.62, 0.93})
    CHECK(vel.A(u) == Catch::Approx(vel.A_pos(u) + vel.A_neg(u)).margin(1e-15));

  CHECK(vel.max_abs_a() == Catch::Approx(1.0));
  CHECK(vel.strictly_decreasing());
  CHECK(vel.invert_a(0.0) == Catch::Approx(0.5));
  CHECK(vel.invert_a(1.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(vel.invert_a(-1.0) == Catch::Approx(1.0));
  CHECK(vel.invert_a(0.5) == Catch::Approx(0.25));
}

TEST_CASE("velocity model validation") {
  // valid but not strictly decreasing: rises then falls, area still zero
  VelocityModel nonmono = VelocityModel::from_nodes({0.0, 0.5, 1.0}, {0.5, 1.0, -2.5});
  CHECK_FALSE(nonmono.strictly_decreasing());
  CHECK(nonmono.A(1.0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(nonmono.A(0.5) == Catch::Approx(0.375));

  // profile must span [0,1]
  CHECK_THROWS_AS(VelocityModel::from_nodes({0.0, 0.5}, {1.0, -1.0}), hypothesis_error);
  CHECK_THROWS_AS(VelocityModel::from_nodes({0.1, 1.0}, {1.0, -1.0}), hypothesis_error);
  // A(1) must vanish
  CHECK_THROWS_AS(VelocityModel::from_nodes({0.0, 1.0}, {1.0, 1.0}), hypothesis_error);
  // A must stay nonnegative
  CHECK_THROWS_AS(VelocityModel::from_nodes({0.0, 1.0}, {-1.0, 1.0}), hypothesis_error);
  // nodes must be strictly increasing
  CHECK_THROWS_AS(VelocityModel::from_nodes({0.0, 0.5, 0.5, 1.0}, {1.0, 0.0, 0.0, -1.0}),
                  hypothesis_error);
}

TEST_CASE("velocity csv round trip") {
  const std::string path = "velocity_roundtrip.csv";
  {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    REQUIRE(fp != nullptr);
    std::fprintf(fp, "xi,a\n0,1\n0.5,0\n1,-1\n");
    std::fclose(fp);
  }
  VelocityModel vel = VelocityModel::from_csv(path);
  VelocityModel ref = VelocityModel::burgers();
  for (double u : {0.0, 0.2, 0.5, 0.77, 1.0}) {
    CHECK(vel.a(u) == Catch::Approx(ref.a(u)).margin(1e-15));
    CHECK(vel.A(u) == Catch::Approx(ref.A(u)).margin(1e-15));
  }
  std::remove(path.c_str());
}

TEST_CASE("grid pins the interface to a cell boundary") {
  Grid g = Grid::make(-2.0, 2.0, 128, 32, 0.01, 0.5);
  CHECK(g.dx == Catch::Approx(1.0 / 32));
  CHECK(g.n_left == 64);
  CHECK(g.x_min == Catch::Approx(-2.0));
  CHECK(g.x_center(63) == Catch::Approx(-g.dx / 2));
  CHECK(g.x_center(64) == Catch::Approx(g.dx / 2));

  Grid asym = Grid::make(-1.0, 3.0, 8, 4, 0.01, 0.5);
  CHECK(asym.dx == Catch::Approx(0.5));
  CHECK(asym.n_left == 2);

  // off-lattice bounds are shifted so a cell edge lands exactly on x = 0
  Grid snap = Grid::make(-0.9, 1.1, 4, 2, 0.01, 0.5);
  CHECK(snap.dx == Catch::Approx(0.5));
  CHECK(snap.n_left == 2);
  CHECK(snap.x_min == Catch::Approx(-1.0));
  CHECK(snap.x_max == Catch::Approx(1.0));

  CHECK_THROWS_AS(Grid::make(1.0, 2.0, 8, 4, 0.01, 0.5), config_error);
  CHECK_THROWS_AS(Grid::make(-1.0, 1.0, 1, 4, 0.01, 0.5), config_error);
  CHECK_THROWS_AS(Grid::make(-1.0, 1.0, 8, 0, 0.01, 0.5), config_error);
  CHECK_THROWS_AS(Grid::make(-1.0, 1.0, 8, 4, 0.0, 0.5), config_error);
}

TEST_CASE("cell-averaged equilibrium profile") {
  const double dxi = 0.25;
  CHECK(chi_entry(0.3, 0, dxi) == Catch::Approx(1.0));
  CHECK(chi_entry(0.3, 1, dxi) == Catch::Approx(0.2));
  CHECK(chi_entry(0.3, 2, dxi) == 0.0);
  CHECK(chi_entry(0.0, 0, dxi) == 0.0);
  CHECK(chi_entry(-0.5, 0, dxi) == 0.0); // negative states truncate to zero here
  CHECK(chi_entry(1.0, 3, dxi) == Catch::Approx(1.0));

  // the xi-sum of the column reproduces u exactly for u in [0,1]
  Grid g = Grid::make(-1.0, 1.0, 2, 8, 0.1, 1.0);
  for (double u : {0.0, 0.13, 0.5, 0.871, 1.0}) {
    double s = 0.0;
    for (int j = 0; j < g.n_xi; ++j) s += chi_entry(u, j, g.dxi) * g.dxi;
    CHECK(s == Catch::Approx(u).margin(1e-15));
  }
}

TEST_CASE("macroscopic and kinetic containers") {
  Grid g = Grid::make(-1.0, 1.0, 8, 4, 0.1, 1.0);
  MacroField r = MacroField::riemann(g, 1.0, 0.25);
  CHECK(r.v[0] == 1.0);
  CHECK(r.v[3] == 1.0);  // last center left of 0
  CHECK(r.v[4] == 0.25); // first center right of 0
  CHECK(r.l1() == Catch::Approx(0.25 * (1.0 * 4 + 0.25 * 4)));

  std::mt19937_64 rng(7);
  MacroField u = MacroField::zeros(g);
  for (double& v : u.v) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  KineticDensity f = KineticDensity::equilibrium(u);
  MacroField back = moments(f);
  for (int i = 0; i < g.n_x; ++i)
    CHECK(back.v[static_cast<std::size_t>(i)] ==
          Catch::Approx(u.v[static_cast<std::size_t>(i)]).margin(1e-15));

  KineticDensity h = KineticDensity::zeros(g);
  // |f - 0| integrates to dx * sum u
  CHECK(l1_distance(f, h) == Catch::Approx(u.l1()).margin(1e-14));
}
