// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bgklim/reference.hpp"

using namespace bgklim;

namespace {
double rand01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
} // namespace

TEST_CASE("face flux values for the quadratic flux") {
  const VelocityModel vel = VelocityModel::burgers(); // A(u) = u - u^2

  // split-flux values computed by hand from A_pos/A_neg
  CHECK(eo_flux(1.0, 0.3, 0.7, vel) == Catch::Approx(0.17));
  CHECK(eo_flux(1.0, 1.0, 0.0, vel) == Catch::Approx(0.25));
  CHECK(eo_flux(1.0, 0.0, 1.0, vel) == Catch::Approx(-0.25));
  CHECK(eo_flux(-1.0, 0.3, 0.7, vel) == Catch::Approx(-0.25));
  CHECK(eo_flux(2.0, 0.3, 0.3, vel) == Catch::Approx(2.0 * vel.A(0.3)));

  CHECK(godunov_flux(1.0, 0.3, 0.7, vel) == Catch::Approx(0.21));
  CHECK(godunov_flux(1.0, 1.0, 0.0, vel) == Catch::Approx(0.25)); // max at the crest
  CHECK(godunov_flux(1.0, 0.0, 1.0, vel) == Catch::Approx(0.0).margin(1e-15));
  CHECK(godunov_flux(-1.0, 0.0, 1.0, vel) == Catch::Approx(-0.25));
  CHECK(godunov_flux(0.7, 0.4, 0.4, vel) == Catch::Approx(0.7 * vel.A(0.4)));

  // the two fluxes genuinely differ away from the diagonal
  CHECK(std::abs(godunov_flux(1.0, 0.0, 1.0, vel) - eo_flux(1.0, 0.0, 1.0, vel)) > 0.2);
}

TEST_CASE("both face fluxes are monotone and consistent") {
  const VelocityModel vel = VelocityModel::burgers();
  const int n = 21;
  const double h = 1.0 / (n - 1);
  for (double kf : {0.5, 1.0, 2.0, -0.5, -1.0, -2.0}) {
    for (FluxKind kind : {FluxKind::engquist_osher, FluxKind::godunov}) {
      for (int i = 0; i < n; ++i) {
        const double ul = i * h;
        CHECK(face_flux(kind, kf, ul, ul, vel) == Catch::Approx(kf * vel.A(ul)).margin(1e-14));
        for (int j = 0; j < n; ++j) {
          const double ur = j * h;
          const double f = face_flux(kind, kf, ul, ur, vel);
          if (i + 1 < n) // nondecreasing in the left state
            CHECK(face_flux(kind, kf, ul + h, ur, vel) >= f - 1e-12);
          if (j + 1 < n) // nonincreasing in the right state
            CHECK(face_flux(kind, kf, ul, ur + h, vel) <= f + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("coefficient regularization ramp") {
  const Coefficient k = Coefficient::make(1.0, 3.0);
  CHECK(regularize_k(k, 0.5, -0.7) == 1.0);
  CHECK(regularize_k(k, 0.5, -0.5) == 1.0);
  CHECK(regularize_k(k, 0.5, 0.5) == 3.0);
  CHECK(regularize_k(k, 0.5, 1.2) == 3.0);
  CHECK(regularize_k(k, 0.5, 0.0) == Catch::Approx(2.0));
  CHECK(regularize_k(k, 0.5, 0.25) == Catch::Approx(2.5));
  CHECK_THROWS_AS(regularize_k(k, 0.0, 0.1), config_error);
  CHECK_THROWS_AS(RegularizedCoefficient::make(k, -1.0), config_error);
  CHECK(RegularizedCoefficient::make(k, 0.5).at(0.25) == Catch::Approx(2.5));
}

TEST_CASE("finite-volume scheme conserves mass up to the boundary flux") {
  const VelocityModel vel = VelocityModel::burgers();
  const Coefficient k = Coefficient::make(1.0, 2.0);
  Grid g = Grid::make(-1.0, 1.0, 64, 1, 0.01, 0.2);
  const MacroField u0 = MacroField::riemann(g, 0.8, 0.2);
  FvConfig cfg = FvConfig::make(0.9, FluxKind::engquist_osher, 2.0);
  MacroTrajectory traj = fv_run(u0, cfg, k, vel, 0.2, 4);
  REQUIRE(traj.times.size() == 5);

  double mass0 = 0.0, mass1 = 0.0;
  for (int i = 0; i < g.n_x; ++i) {
    mass0 += u0.v[static_cast<std::size_t>(i)] * g.dx;
    mass1 += traj.us.back().v[static_cast<std::size_t>(i)] * g.dx;
  }
  CHECK(mass1 - mass0 == Catch::Approx(traj.boundary_flux_in).margin(1e-12));
}

TEST_CASE("finite-volume scheme contracts in L1") {
  const VelocityModel vel = VelocityModel::burgers();
  FvConfig cfg = FvConfig::make(0.9, FluxKind::engquist_osher, 2.0);
  std::mt19937_64 rng(77);
  for (const Coefficient& k :
       {Coefficient::make(1.0, 1.0), Coefficient::make(1.0, 2.0), Coefficient::make(2.0, 0.5)}) {
    Grid g = Grid::make(-1.0, 1.0, 64, 1, 0.01, 0.1);
    MacroField u0 = MacroField::zeros(g), v0 = MacroField::zeros(g);
    for (int i = 0; i < g.n_x; ++i) {
      u0.v[static_cast<std::size_t>(i)] = rand01(rng);
      v0.v[static_cast<std::size_t>(i)] = rand01(rng);
    }
    MacroTrajectory tu = fv_run(u0, cfg, k, vel, 0.1, 2);
    MacroTrajectory tv = fv_run(v0, cfg, k, vel, 0.1, 2);
    double d0 = 0.0, dT = 0.0;
    for (int i = 0; i < g.n_x; ++i) {
      std::size_t ii = static_cast<std::size_t>(i);
      d0 += std::abs(u0.v[ii] - v0.v[ii]) * g.dx;
      dT += std::abs(tu.us.back().v[ii] - tv.us.back().v[ii]) * g.dx;
    }
    CHECK(dT <= d0 + 1e-12);
  }
}

TEST_CASE("Godunov keeps the standing shock exactly steady") {
  const VelocityModel vel = VelocityModel::burgers();
  const Coefficient k = Coefficient::make(1.0, 1.0);
  Grid g = Grid::make(-1.0, 1.0, 32, 1, 0.01, 0.25);
  const MacroField u0 = MacroField::riemann(g, 0.0, 1.0);
  FvConfig cfg = FvConfig::make(0.9, FluxKind::godunov, 1.0);
  MacroTrajectory traj = fv_run(u0, cfg, k, vel, 0.25, 4);
  for (const MacroField& u : traj.us)
    for (int i = 0; i < g.n_x; ++i)
      CHECK(u.v[static_cast<std::size_t>(i)] ==
            Catch::Approx(u0.v[static_cast<std::size_t>(i)]).margin(1e-14));
}

TEST_CASE("exact Riemann solution") {
  const VelocityModel vel = VelocityModel::burgers();
  const double k = 1.0;

  SECTION("decreasing data opens a rarefaction fan") {
    CHECK(riemann_exact(1.0, 0.0, k, vel, -2.0) == 1.0);
    CHECK(riemann_exact(1.0, 0.0, k, vel, -1.0) == 1.0);
    CHECK(riemann_exact(1.0, 0.0, k, vel, 0.0) == Catch::Approx(0.5));
    CHECK(riemann_exact(1.0, 0.0, k, vel, 0.5) == Catch::Approx(0.25));
    CHECK(riemann_exact(1.0, 0.0, k, vel, 1.0) == 0.0);
    // narrower fan: speeds k*a(0.8) = -0.6 to k*a(0.2) = 0.6
    CHECK(riemann_exact(0.8, 0.2, k, vel, -0.61) == 0.8);
    CHECK(riemann_exact(0.8, 0.2, k, vel, 0.0) == Catch::Approx(0.5));
    CHECK(riemann_exact(0.8, 0.2, k, vel, 0.61) == 0.2);
    // scaling in k only stretches the fan
    CHECK(riemann_exact(0.8, 0.2, 2.0, vel, 0.6) == Catch::Approx(riemann_exact(0.8, 0.2, 1.0, vel, 0.3)));
  }

  SECTION("increasing data is an admissible shock") {
    // equal flux values: the (0,1) shock stands still
    CHECK(riemann_exact(0.0, 1.0, k, vel, -1e-9) == 0.0);
    CHECK(riemann_exact(0.0, 1.0, k, vel, 1e-9) == 1.0);
    // s = (A(0.9) - A(0.2)) / 0.7 = -0.1
    const double s = (vel.A(0.9) - vel.A(0.2)) / 0.7;
    CHECK(s == Catch::Approx(-0.1));
    CHECK(riemann_exact(0.2, 0.9, k, vel, s - 1e-9) == 0.2);
    CHECK(riemann_exact(0.2, 0.9, k, vel, s + 1e-9) == 0.9);
  }

  SECTION("constant data stays constant") {
    CHECK(riemann_exact(0.4, 0.4, k, vel, 0.3) == 0.4);
  }

  SECTION("hypothesis checks") {
    CHECK_THROWS_AS(riemann_exact(1.0, 0.0, 0.0, vel, 0.0), config_error);
    CHECK_THROWS_AS(riemann_exact(1.0, 0.0, -1.0, vel, 0.0), config_error);
    const VelocityModel bump =
        VelocityModel::from_nodes({0.0, 0.5, 1.0}, {0.5, 1.0, -2.5});
    CHECK_FALSE(bump.strictly_decreasing());
    CHECK_THROWS_AS(riemann_exact(1.0, 0.0, 1.0, bump, 0.0), hypothesis_error);
  }
}

TEST_CASE("finite-volume solution converges to the exact rarefaction") {
  const VelocityModel vel = VelocityModel::burgers();
  const Coefficient k = Coefficient::make(1.0, 1.0);
  FvConfig cfg = FvConfig::make(0.9, FluxKind::engquist_osher, 1.0);
  const double T = 0.5;
  auto l1_err = [&](int n_x) {
    Grid g = Grid::make(-2.0, 2.0, n_x, 1, 0.01, T);
    MacroTrajectory traj = fv_run(MacroField::riemann(g, 0.8, 0.2), cfg, k, vel, T, 2);
    double e = 0.0;
    for (int i = 0; i < g.n_x; ++i)
      e += std::abs(traj.us.back().v[static_cast<std::size_t>(i)] -
                    riemann_exact(0.8, 0.2, 1.0, vel, g.x_center(i) / T)) *
           g.dx;
    return e;
  };
  const double e64 = l1_err(64), e256 = l1_err(256);
  CHECK(e64 < 0.05);
  CHECK(e256 < 0.6 * e64);
}

TEST_CASE("block averaging onto a coarser grid") {
  Grid gf = Grid::make(-1.0, 1.0, 8, 1, 0.1, 1.0);
  Grid gc = Grid::make(-1.0, 1.0, 4, 1, 0.1, 1.0);
  MacroField fine = MacroField::zeros(gf);
  for (int i = 0; i < 8; ++i) fine.v[static_cast<std::size_t>(i)] = i / 8.0;
  MacroField coarse = downsample(fine, gc);
  CHECK(coarse.v[0] == Catch::Approx(0.5 / 8.0));
  CHECK(coarse.v[1] == Catch::Approx(2.5 / 8.0));
  CHECK(coarse.v[2] == Catch::Approx(4.5 / 8.0));
  CHECK(coarse.v[3] == Catch::Approx(6.5 / 8.0));

  Grid g3 = Grid::make(-1.0, 1.0, 3, 1, 0.1, 1.0);
  CHECK_THROWS_AS(downsample(fine, g3), config_error);
  Grid gwide = Grid::make(-2.0, 2.0, 4, 1, 0.1, 1.0);
  CHECK_THROWS_AS(downsample(fine, gwide), config_error);
}

TEST_CASE("solver configuration validation") {
  CHECK_THROWS_AS(FvConfig::make(0.0, FluxKind::godunov, 2.0), config_error);
  CHECK_THROWS_AS(FvConfig::make(1.5, FluxKind::godunov, 2.0), config_error);
  CHECK_THROWS_AS(FvConfig::make(0.9, FluxKind::godunov, 0.5), config_error);
  const VelocityModel vel = VelocityModel::burgers();
  Grid g = Grid::make(-1.0, 1.0, 8, 1, 0.1, 1.0);
  FvConfig cfg = FvConfig::make(0.9, FluxKind::godunov, 2.0);
  CHECK_THROWS_AS(fv_run(MacroField::constant(g, 0.5), cfg, Coefficient::make(1.0, 1.0),
                         vel, -1.0, 4),
                  config_error);
}
