// SPDX-License-Identifier: Apache-2.0
//
// Reference entropy solutions for d/dt u + d/dx (k(x) A(u)) = 0:
//  - monotone finite-volume scheme on a regularized coefficient (Engquist-Osher
//    or Godunov face flux),
//  - exact Riemann solution for constant k and strictly concave A.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bgklim/common.hpp"
#include "bgklim/model.hpp"

namespace bgklim {

// Monotone (piecewise-linear) regularization of the two-sided coefficient:
// k_left for x <= -width, k_right for x >= width, linear ramp between.
inline double regularize_k(const Coefficient& k, double width, double x) {
  if (!(width > 0.0)) throw config_error("regularize_k: width must be positive");
  if (x <= -width) return k.k_left;
  if (x >= width) return k.k_right;
  double t = (x + width) / (2.0 * width);
  return k.k_left + t * (k.k_right - k.k_left);
}

struct RegularizedCoefficient {
  Coefficient base;
  double width = 0.0;

  static RegularizedCoefficient make(const Coefficient& base, double width) {
    if (!(width > 0.0)) throw config_error("regularized coefficient: width must be positive");
    return RegularizedCoefficient{base, width};
  }
  double at(double x) const { return regularize_k(base, width, x); }
};

enum class FluxKind { engquist_osher, godunov };

struct FvConfig {
  double cfl = 0.9;
  FluxKind flux_kind = FluxKind::engquist_osher;
  double width_ratio = 2.0; // regularization width = width_ratio * dx

  static FvConfig make(double cfl, FluxKind flux_kind, double width_ratio) {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw config_error("fv: cfl must lie in (0,1]");
    if (!(width_ratio >= 1.0)) throw config_error("fv: width_ratio must be >= 1");
    return FvConfig{cfl, flux_kind, width_ratio};
  }
};

// Engquist-Osher flux for q(u) = k_face * A(u):
//   q_plus(u_l) + q_minus(u_r),  q'_pm = (k a)^pm.
// For k_face > 0 this is k (A_pos(u_l) + A_neg(u_r)); a negative k swaps the
// roles of the split parts.
inline double eo_flux(double k_face, double u_l, double u_r, const VelocityModel& vel) {
  if (k_face >= 0.0) return k_face * (vel.A_pos(u_l) + vel.A_neg(u_r));
  return k_face * (vel.A_neg(u_l) + vel.A_pos(u_r));
}

// Godunov flux for q(u) = k_face * A(u):
//   u_l <= u_r: min over [u_l, u_r] of q;  u_l > u_r: max.
// Extrema of A are attained at the endpoints or at sign changes of a, so the
// candidate list is finite and exact for the piecewise-linear velocity.
inline double godunov_flux(double k_face, double u_l, double u_r, const VelocityModel& vel) {
  double lo = std::min(u_l, u_r), hi = std::max(u_l, u_r);
  double amin = vel.A(lo), amax = vel.A(lo);
  auto consider = [&](double u) {
    double v = vel.A(u);
    amin = std::min(amin, v);
    amax = std::max(amax, v);
  };
  consider(hi);
  const std::vector<double>& xs = vel.nodes();
  const std::vector<double>& as = vel.node_values();
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    // node itself
    if (xs[s] > lo && xs[s] < hi) consider(xs[s]);
    // interior zero of a on segment s
    double a0 = as[s], a1 = as[s + 1];
    if ((a0 > 0.0 && a1 < 0.0) || (a0 < 0.0 && a1 > 0.0)) {
      double xstar = xs[s] + a0 * (xs[s + 1] - xs[s]) / (a0 - a1);
      if (xstar > lo && xstar < hi) consider(xstar);
    }
  }
  if (xs.back() > lo && xs.back() < hi) consider(xs.back());
  double qmin = k_face >= 0.0 ? k_face * amin : k_face * amax;
  double qmax = k_face >= 0.0 ? k_face * amax : k_face * amin;
  return u_l <= u_r ? qmin : qmax;
}

inline double face_flux(FluxKind kind, double k_face, double u_l, double u_r,
                        const VelocityModel& vel) {
  return kind == FluxKind::engquist_osher ? eo_flux(k_face, u_l, u_r, vel)
                                          : godunov_flux(k_face, u_l, u_r, vel);
}

struct MacroTrajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<MacroField> us;
  double boundary_flux_in = 0.0; // time-integrated (F_left_edge - F_right_edge)
};

// Explicit conservative update with the regularized face coefficient and
// copy (zero-gradient) ghost cells. The time step is cfl * dx / max|k a|,
// nudged to land snapshots exactly.
inline MacroTrajectory fv_run(const MacroField& u0, const FvConfig& cfg, const Coefficient& k,
                              const VelocityModel& vel, double t_final, int n_snapshots = 32) {
  const Grid& g = u0.grid;
  if (!(t_final > 0.0)) throw config_error("fv_run: t_final must be positive");
  if (n_snapshots < 1) throw config_error("fv_run: n_snapshots must be >= 1");
  const double width = cfg.width_ratio * g.dx;
  const double vmax =
      std::max(std::abs(k.k_left), std::abs(k.k_right)) * std::max(vel.max_abs_a(), 1e-300);
  const double dt0 = cfg.cfl * g.dx / vmax;

  // face coefficients, faces at x_min + i*dx for i = 0..n_x
  std::vector<double> kf(static_cast<std::size_t>(g.n_x) + 1);
  for (int i = 0; i <= g.n_x; ++i) kf[static_cast<std::size_t>(i)] =
      regularize_k(k, width, g.x_min + i * g.dx);

  MacroTrajectory traj;
  traj.grid = g;
  MacroField u = u0;
  traj.times.push_back(0.0);
  traj.us.push_back(u);

  const double interval = t_final / n_snapshots;
  std::vector<double> flux(static_cast<std::size_t>(g.n_x) + 1);
  for (int s = 1; s <= n_snapshots; ++s) {
    const int n_sub = std::max(1, static_cast<int>(std::ceil(interval / dt0 - 1e-12)));
    const double h = interval / n_sub;
    for (int q = 0; q < n_sub; ++q) {
      for (int i = 0; i <= g.n_x; ++i) {
        const double ul = u.v[static_cast<std::size_t>(std::max(i - 1, 0))];
        const double ur = u.v[static_cast<std::size_t>(std::min(i, g.n_x - 1))];
        flux[static_cast<std::size_t>(i)] =
            face_flux(cfg.flux_kind, kf[static_cast<std::size_t>(i)], ul, ur, vel);
      }
      const double lam = h / g.dx;
      for (int i = 0; i < g.n_x; ++i) {
        std::size_t ii = static_cast<std::size_t>(i);
        u.v[ii] -= lam * (flux[ii + 1] - flux[ii]);
        if (!(u.v[ii] >= -1e-12 && u.v[ii] <= 1.0 + 1e-12))
          throw integrity_error("fv_run: invariant region violated at x=" +
                                std::to_string(g.x_center(i)) + " u=" + std::to_string(u.v[ii]));
      }
      traj.boundary_flux_in += h * (flux.front() - flux.back());
    }
    traj.times.push_back(s * interval);
    traj.us.push_back(u);
  }
  return traj;
}

// Exact entropy solution of the constant-coefficient Riemann problem for
// strictly concave A (a strictly decreasing): increasing jumps are admissible
// shocks, decreasing jumps open rarefaction fans.
inline double riemann_exact(double u_l, double u_r, double k, const VelocityModel& vel,
                            double x_over_t) {
  if (!(k > 0.0)) throw config_error("riemann_exact: k must be positive");
  if (!vel.strictly_decreasing())
    throw hypothesis_error("riemann_exact: requires strictly decreasing velocity (concave flux)");
  if (u_l == u_r) return u_l;
  if (u_l < u_r) {
    const double s = k * (vel.A(u_r) - vel.A(u_l)) / (u_r - u_l);
    return x_over_t < s ? u_l : u_r;
  }
  // rarefaction: characteristic speed k a(u), increasing across the fan
  const double lo = k * vel.a(u_l), hi = k * vel.a(u_r);
  if (x_over_t <= lo) return u_l;
  if (x_over_t >= hi) return u_r;
  return std::clamp(vel.invert_a(x_over_t / k), std::min(u_l, u_r), std::max(u_l, u_r));
}

// Block-average a fine macroscopic field onto a coarser layout covering the
// same domain; n_x must divide evenly.
inline MacroField downsample(const MacroField& fine, const Grid& coarse) {
  const Grid& gf = fine.grid;
  if (gf.n_x % coarse.n_x != 0)
    throw config_error("downsample: fine n_x must be a multiple of coarse n_x");
  if (std::abs(gf.x_min - coarse.x_min) > 1e-12 || std::abs(gf.x_max - coarse.x_max) > 1e-12)
    throw config_error("downsample: grids must cover the same interval");
  const int r = gf.n_x / coarse.n_x;
  MacroField out = MacroField::zeros(coarse);
  for (int i = 0; i < coarse.n_x; ++i) {
    double s = 0.0;
    for (int q = 0; q < r; ++q) s += fine.v[static_cast<std::size_t>(i * r + q)];
    out.v[static_cast<std::size_t>(i)] = s / r;
  }
  return out;
}

} // namespace bgklim
