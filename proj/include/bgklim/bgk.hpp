// SPDX-License-Identifier: Apache-2.0
//
// BGK relaxation solver: exact relaxation sub-flow, Lie/Strang splitting with
// the semi-Lagrangian transport, trajectory recording with invariant checks,
// and an independent Duhamel/Picard integrator used as a fidelity oracle.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bgklim/common.hpp"
#include "bgklim/model.hpp"
#include "bgklim/transport.hpp"

namespace bgklim {

enum class Splitting { lie, strang };

struct BgkConfig {
  double eps = 1.0;
  Splitting splitting = Splitting::strang;
  double dt = 0.0;      // 0 selects the default min(eps, dx / max|k a|)
  double t_final = 1.0;

  static BgkConfig make(double eps, Splitting s, double dt, double t_final) {
    if (!(eps > 0.0)) throw config_error("bgk: eps must be positive");
    if (!(dt > 0.0)) throw config_error("bgk: dt must be positive");
    if (!(t_final >= dt)) throw config_error("bgk: t_final must be >= dt");
    return BgkConfig{eps, s, dt, t_final};
  }
};

inline double default_dt(double eps, const Grid& g, const Coefficient& k,
                         const VelocityModel& vel) {
  double vmax = std::max(std::abs(k.k_left), std::abs(k.k_right)) * vel.max_abs_a();
  if (vmax <= 0.0) return eps;
  // With a coefficient jump, keep every backward foot strictly on its own side
  // of x = 0 (|k a| dt < dx/2): cell centers then never land in the Jacobian
  // fan, so constant equilibria stay exactly steady and 0 <= f <= 1 is exact.
  const double courant = k.k_left == k.k_right ? 1.0 : 0.45;
  return std::min(eps, courant * g.dx / vmax);
}

// Exact relaxation over dt: f' = chi(u) + exp(-dt/eps) (f - chi(u)) with
// u = moment(f), evaluated in the expm1 form so dt << eps stays accurate.
// The moment of each column is left unchanged.
inline KineticDensity relax_step(const KineticDensity& f, double dt, double eps) {
  if (!(dt >= 0.0) || !(eps > 0.0)) throw config_error("relax_step: need dt >= 0, eps > 0");
  const Grid& g = f.grid;
  KineticDensity out = f;
  const double blend = -std::expm1(-dt / eps); // 1 - exp(-dt/eps)
  for (int i = 0; i < g.n_x; ++i) {
    const double u = moment(f, i);
    for (int j = 0; j < g.n_xi; ++j) {
      const double c = chi_entry(u, j, g.dxi);
      out.at(i, j) = f.at(i, j) + blend * (c - f.at(i, j));
    }
  }
  return out;
}

// One splitting step of size dt.
inline KineticDensity bgk_step(const KineticDensity& f, double dt, const BgkConfig& cfg,
                               const Coefficient& k, const VelocityModel& vel) {
  if (cfg.splitting == Splitting::lie)
    return relax_step(transport_apply(f, dt, k, vel), dt, cfg.eps);
  KineticDensity h = relax_step(f, 0.5 * dt, cfg.eps);
  h = transport_apply(h, dt, k, vel);
  return relax_step(h, 0.5 * dt, cfg.eps);
}

struct Trajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<KineticDensity> fs;
  std::vector<MacroField> us;
};

namespace detail {

inline void check_invariants(const KineticDensity& f, double t, double tol = 1e-12) {
  const Grid& g = f.grid;
  for (int j = 0; j < g.n_xi; ++j)
    for (int i = 0; i < g.n_x; ++i) {
      const double v = f.at(i, j);
      if (!(v >= -tol && v <= 1.0 + tol))
        throw integrity_error("bgk_run: kinetic bound 0<=f<=1 violated at t=" +
                              std::to_string(t) + " x=" + std::to_string(g.x_center(i)) +
                              " xi=" + std::to_string(g.xi_center(j)) +
                              " f=" + std::to_string(v));
    }
  for (int i = 0; i < g.n_x; ++i) {
    const double u = moment(f, i);
    if (!(u >= -tol && u <= 1.0 + tol))
      throw integrity_error("bgk_run: macroscopic bound 0<=u<=1 violated at t=" +
                            std::to_string(t) + " x=" + std::to_string(g.x_center(i)) +
                            " u=" + std::to_string(u));
  }
}

} // namespace detail

// March a given initial kinetic density to t_final, recording n_snapshots+1
// uniformly spaced snapshots (including t=0). Each step re-checks the
// invariant region and aborts with a diagnostic on violation.
inline Trajectory bgk_run_from(const KineticDensity& f0, const BgkConfig& cfg,
                               const Coefficient& k, const VelocityModel& vel,
                               int n_snapshots = 32) {
  if (n_snapshots < 1) throw config_error("bgk_run: n_snapshots must be >= 1");
  Trajectory traj;
  traj.grid = f0.grid;
  KineticDensity f = f0;
  detail::check_invariants(f, 0.0);
  traj.times.push_back(0.0);
  traj.fs.push_back(f);
  traj.us.push_back(moments(f));
  const double interval = cfg.t_final / n_snapshots;
  for (int s = 1; s <= n_snapshots; ++s) {
    const int n_sub = std::max(1, static_cast<int>(std::ceil(interval / cfg.dt - 1e-12)));
    const double h = interval / n_sub;
    for (int q = 0; q < n_sub; ++q) {
      f = bgk_step(f, h, cfg, k, vel);
      detail::check_invariants(f, (s - 1) * interval + (q + 1) * h);
    }
    traj.times.push_back(s * interval);
    traj.fs.push_back(f);
    traj.us.push_back(moments(f));
  }
  return traj;
}

// Standard entry point: equilibrium initial data f = chi(u0).
inline Trajectory bgk_run(const MacroField& u0, const BgkConfig& cfg, const Coefficient& k,
                          const VelocityModel& vel, int n_snapshots = 32) {
  return bgk_run_from(KineticDensity::equilibrium(u0), cfg, k, vel, n_snapshots);
}

// dx * dxi * sum |f - chi(moment(f))|
inline double equilibrium_distance(const KineticDensity& f) {
  const Grid& g = f.grid;
  double s = 0.0;
  for (int i = 0; i < g.n_x; ++i) {
    const double u = moment(f, i);
    for (int j = 0; j < g.n_xi; ++j) s += std::abs(f.at(i, j) - chi_entry(u, j, g.dxi));
  }
  return s * g.dx * g.dxi;
}

struct PicardResult {
  KineticDensity f;            // iterate at t = T
  int iterations = 0;
  std::vector<double> ratios;  // successive sup-norm contraction ratios
};

namespace detail {

// chi(u) per xi-row as a piecewise-constant x-profile over the grid cells.
inline PwcProfile chi_row_profile(const std::vector<double>& u, const Grid& g, int j) {
  PwcProfile q;
  q.xs.reserve(static_cast<std::size_t>(g.n_x) + 1);
  q.vals.reserve(static_cast<std::size_t>(g.n_x) + 1);
  for (int i = 0; i < g.n_x; ++i) {
    q.xs.push_back(g.x_min + i * g.dx);
    q.vals.push_back(chi_entry(u[static_cast<std::size_t>(i)], j, g.dxi));
  }
  q.xs.push_back(g.x_max);
  q.vals.push_back(0.0);
  return q;
}

} // namespace detail

// Fixed-point solver for the integral (Duhamel) form of the relaxation
// equation with eps = 1 on [0, T], T <= 2:
//   f(t) = e^{ -t} S(t) f0 + \int_0^t e^{-s} S(s) chi_{u(t-s)} ds,
// with S the exact piecewise-constant transport. The s-integral uses a
// composite midpoint rule; u at midpoint times is interpolated linearly.
// Independent of the splitting solver's interpolation path.
inline PicardResult picard_solve(const MacroField& u0, double T, double tol,
                                 const Coefficient& k, const VelocityModel& vel) {
  const Grid& g = u0.grid;
  if (!(T > 0.0 && T <= 2.0)) throw config_error("picard_solve: require 0 < T <= 2");
  if (!(tol > 0.0)) throw config_error("picard_solve: tol must be positive");

  const int M = std::max(1, static_cast<int>(std::lround(T / g.dt)));
  const double dt = T / M;

  // per-row velocity parameters and the initial profiles
  std::vector<CharParams> params;
  params.reserve(static_cast<std::size_t>(g.n_xi));
  for (int j = 0; j < g.n_xi; ++j) params.push_back(CharParams{k, vel.a(g.xi_center(j))});

  auto field_at = [&](const std::vector<std::vector<double>>& u_hist, double t) {
    // linear interpolation of the u history at time t
    double s = t / dt;
    int m0 = std::clamp(static_cast<int>(std::floor(s)), 0, M - 1);
    double w = std::clamp(s - m0, 0.0, 1.0);
    std::vector<double> u(static_cast<std::size_t>(g.n_x));
    for (int i = 0; i < g.n_x; ++i) {
      std::size_t ii = static_cast<std::size_t>(i);
      u[ii] = (1.0 - w) * u_hist[static_cast<std::size_t>(m0)][ii] +
              w * u_hist[static_cast<std::size_t>(m0) + 1][ii];
    }
    return u;
  };

  // iterate storage: kinetic fields at the M+1 grid times
  auto zero_field = [&] { return KineticDensity::zeros(g); };
  std::vector<KineticDensity> f_prev(static_cast<std::size_t>(M) + 1, zero_field());
  std::vector<std::vector<double>> u_prev(static_cast<std::size_t>(M) + 1,
                                          std::vector<double>(static_cast<std::size_t>(g.n_x)));
  // start from the equilibrium of the initial datum, constant in time
  for (int m = 0; m <= M; ++m) {
    f_prev[static_cast<std::size_t>(m)] = KineticDensity::equilibrium(u0);
    u_prev[static_cast<std::size_t>(m)] = u0.v;
  }

  PicardResult res;
  double prev_delta = -1.0;
  int violations = 0;
  const double ratio_bound = (1.0 - std::exp(-T)) + 0.05;

  for (int it = 0; it < 200; ++it) {
    std::vector<KineticDensity> f_next(static_cast<std::size_t>(M) + 1, zero_field());
    f_next[0] = KineticDensity::equilibrium(u0);
    std::vector<std::vector<double>> u_next(static_cast<std::size_t>(M) + 1, u0.v);

    for (int m = 1; m <= M; ++m) {
      const double t = m * dt;
      KineticDensity acc = KineticDensity::zeros(g);
      for (int j = 0; j < g.n_xi; ++j) {
        // transported initial layer
        PwcProfile q0 = detail::chi_row_profile(u0.v, g, j);
        PwcProfile q0t = transport_exact_pwc(q0, t, params[static_cast<std::size_t>(j)]);
        double* dst = acc.row(j);
        const double w0 = std::exp(-t);
        for (int i = 0; i < g.n_x; ++i) dst[i] += w0 * pwc_eval(q0t, g.x_center(i));
        // Duhamel integral, composite midpoint in s
        for (int l = 0; l < m; ++l) {
          const double s_mid = (l + 0.5) * dt;
          std::vector<double> u_at = field_at(u_prev, t - s_mid);
          PwcProfile qc = detail::chi_row_profile(u_at, g, j);
          PwcProfile qct = transport_exact_pwc(qc, s_mid, params[static_cast<std::size_t>(j)]);
          const double w = std::exp(-s_mid) * dt;
          for (int i = 0; i < g.n_x; ++i) dst[i] += w * pwc_eval(qct, g.x_center(i));
        }
      }
      f_next[static_cast<std::size_t>(m)] = acc;
      for (int i = 0; i < g.n_x; ++i)
        u_next[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] = moment(acc, i);
    }

    double delta = 0.0;
    for (int m = 0; m <= M; ++m)
      delta = std::max(delta, l1_distance(f_next[static_cast<std::size_t>(m)],
                                          f_prev[static_cast<std::size_t>(m)]));
    res.iterations = it + 1;
    if (prev_delta > 0.0) {
      const double ratio = delta / prev_delta;
      res.ratios.push_back(ratio);
      if (ratio > ratio_bound) {
        if (++violations >= 3)
          throw integrity_error("picard_solve: contraction ratio " + std::to_string(ratio) +
                                " exceeded bound " + std::to_string(ratio_bound) +
                                " for 3 consecutive iterations");
      } else {
        violations = 0;
      }
    }
    f_prev = std::move(f_next);
    u_prev = std::move(u_next);
    if (delta < tol) break;
    prev_delta = delta;
  }
  res.f = f_prev[static_cast<std::size_t>(M)];
  return res;
}

} // namespace bgklim
