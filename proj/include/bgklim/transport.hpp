// SPDX-License-Identifier: Apache-2.0
//
// Free transport across the coefficient jump: exact characteristics, the
// conservative Jacobian weight, a semi-Lagrangian row update, and an exact
// pushforward for piecewise-constant profiles (the reference path).
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bgklim/common.hpp"
#include "bgklim/model.hpp"

namespace bgklim {

struct CharParams {
  Coefficient coeff;
  double a_val = 0.0;
};

// Position after moving forward by `elapsed >= 0` along the characteristic
// through x. Speed is k_left * a on x<0 and k_right * a on x>0; a crossing
// switches branches at the interface. The branch is picked by the sign of
// the transport speed k * a, not of a alone: both coefficients share a sign,
// so k_left * a < 0 means leftward motion even when a > 0.
inline double char_forward(double x, double elapsed, const CharParams& p) {
  const double kl = p.coeff.k_left, kr = p.coeff.k_right, a = p.a_val;
  if (kl * a >= 0.0)
    return pos_part(p.coeff.alpha(x) * x + elapsed * kr * a) -
           neg_part(x + elapsed * kl * a);
  return pos_part(x + elapsed * kr * a) -
         neg_part(p.coeff.beta(x) * x + elapsed * kl * a);
}

// Foot of the characteristic arriving at x after `elapsed >= 0` units:
// char_forward(char_backward(x, t, p), t, p) == x away from fan boundaries.
inline double char_backward(double x, double elapsed, const CharParams& p) {
  const double kl = p.coeff.k_left, kr = p.coeff.k_right, a = p.a_val;
  if (kl * a >= 0.0)
    return pos_part(x - elapsed * kr * a) -
           neg_part(p.coeff.beta(x) * x - elapsed * kl * a);
  return pos_part(p.coeff.alpha(x) * x - elapsed * kr * a) -
         neg_part(x - elapsed * kl * a);
}

// Conservative weight J(t, x): the derivative of the backward foot map, i.e.
// k_left/k_right on the downstream fan [0, t k_right a) for rightward motion
// and k_right/k_left on (t k_left a, 0) for leftward; 1 elsewhere. The ray
// whose foot lands exactly on the interface is excluded on both sides so the
// weight agrees with the interpolation tie-break, which keeps such a foot on
// the destination's side of the jump.
inline double jacobian(double t, double x, const CharParams& p) {
  const double kl = p.coeff.k_left, kr = p.coeff.k_right, a = p.a_val;
  if (kl * a > 0.0) {
    const double fan = t * kr * a;
    return (x >= 0.0 && x < fan) ? kl / kr : 1.0;
  }
  const double fan = t * kl * a;
  return (x > fan && x < 0.0) ? kr / kl : 1.0;
}

struct TransportOptions {
  // Test hook: drop the conservative weight (J forced to 1). Breaks mass
  // conservation on purpose; used by the verification suite's canary.
  bool unit_jacobian = false;
};

namespace detail {

// Linear interpolation of cell-center samples, restricted to one side of the
// interface; feet past the outermost same-side center read that center's
// value (constant extension). `dest_right` breaks the tie at y == 0.
inline double interp_one_sided(const double* row, double y, const Grid& g, bool dest_right) {
  const bool right = y > 0.0 ? true : (y < 0.0 ? false : dest_right);
  const int lo = right ? g.n_left : 0;
  const int hi = right ? g.n_x - 1 : g.n_left - 1;
  if (y <= g.x_center(lo)) return row[lo];
  if (y >= g.x_center(hi)) return row[hi];
  double t = (y - g.x_min) / g.dx - 0.5;
  int i0 = static_cast<int>(std::floor(t));
  i0 = std::clamp(i0, lo, hi - 1);
  double w = std::clamp(t - i0, 0.0, 1.0);
  return (1.0 - w) * row[i0] + w * row[i0 + 1];
}

} // namespace detail

// Semi-Lagrangian transport over `elapsed`: each xi-row moves along its own
// characteristics, new value = J * f(foot). Interpolation never crosses the
// interface; feet outside the domain read the boundary cell.
inline KineticDensity transport_apply(const KineticDensity& f, double elapsed,
                                      const Coefficient& k, const VelocityModel& vel,
                                      TransportOptions opts = {}) {
  if (elapsed == 0.0) return f;
  if (elapsed < 0.0) throw config_error("transport_apply: elapsed must be >= 0");
  const Grid& g = f.grid;
  KineticDensity out = KineticDensity::zeros(g);
  for (int j = 0; j < g.n_xi; ++j) {
    const CharParams p{k, vel.a(g.xi_center(j))};
    const double* src = f.row(j);
    double* dst = out.row(j);
    if (p.a_val == 0.0) {
      std::copy(src, src + g.n_x, dst);
      continue;
    }
    for (int i = 0; i < g.n_x; ++i) {
      const double x = g.x_center(i);
      const double y = char_backward(x, elapsed, p);
      const double J = opts.unit_jacobian ? 1.0 : jacobian(elapsed, x, p);
      dst[i] = J * detail::interp_one_sided(src, y, g, x > 0.0);
    }
  }
  return out;
}

// Piecewise-constant profile: value vals[i] on [xs[i], xs[i+1]), vals.back()
// on [xs.back(), inf), zero before xs.front(). Empty profile == zero.
struct PwcProfile {
  std::vector<double> xs;
  std::vector<double> vals;
};

inline void validate(const PwcProfile& q) {
  if (q.xs.size() != q.vals.size())
    throw config_error("pwc profile: breakpoint/value arrays must have equal length");
  for (std::size_t i = 0; i + 1 < q.xs.size(); ++i)
    if (!(q.xs[i] < q.xs[i + 1]))
      throw config_error("pwc profile: breakpoints must be strictly increasing");
}

inline double pwc_eval(const PwcProfile& q, double x) {
  if (q.xs.empty() || x < q.xs.front()) return 0.0;
  auto it = std::upper_bound(q.xs.begin(), q.xs.end(), x);
  return q.vals[static_cast<std::size_t>(it - q.xs.begin()) - 1];
}

// Mass of the compactly supported part (requires a trailing zero value).
inline double pwc_mass(const PwcProfile& q) {
  if (q.xs.empty()) return 0.0;
  if (q.vals.back() != 0.0)
    throw config_error("pwc profile: mass requires a trailing zero value");
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < q.xs.size(); ++i)
    m += q.vals[i] * (q.xs[i + 1] - q.xs[i]);
  return m;
}

namespace detail {

inline void pwc_insert(PwcProfile& q, double x) {
  if (q.xs.empty()) return; // zero profile stays zero
  auto it = std::lower_bound(q.xs.begin(), q.xs.end(), x);
  if (it != q.xs.end() && *it == x) return;
  std::size_t pos = static_cast<std::size_t>(it - q.xs.begin());
  double val = pos == 0 ? 0.0 : q.vals[pos - 1];
  q.xs.insert(q.xs.begin() + static_cast<std::ptrdiff_t>(pos), x);
  q.vals.insert(q.vals.begin() + static_cast<std::ptrdiff_t>(pos), val);
}

} // namespace detail

// Exact pushforward of a piecewise-constant profile by the conservative flow
// over `elapsed`: breakpoints move along forward characteristics, values pick
// up the Jacobian weight of their image region. Used as the transport oracle
// and by the Duhamel integrator.
inline PwcProfile transport_exact_pwc(const PwcProfile& q, double elapsed,
                                      const CharParams& p, TransportOptions opts = {}) {
  validate(q);
  if (elapsed < 0.0) throw config_error("transport_exact_pwc: elapsed must be >= 0");
  if (q.xs.empty() || elapsed == 0.0 || p.a_val == 0.0) return q;

  PwcProfile r = q;
  // Split plateaus at the preimages of the Jacobian discontinuities so that
  // every refined plateau maps into a single J region.
  const double kl = p.coeff.k_left, kr = p.coeff.k_right, a = p.a_val;
  if (kl * a > 0.0) {
    detail::pwc_insert(r, -elapsed * kl * a);
    detail::pwc_insert(r, 0.0);
  } else {
    detail::pwc_insert(r, 0.0);
    detail::pwc_insert(r, -elapsed * kr * a);
  }

  PwcProfile out;
  out.xs.resize(r.xs.size());
  out.vals.resize(r.vals.size());
  for (std::size_t i = 0; i < r.xs.size(); ++i)
    out.xs[i] = char_forward(r.xs[i], elapsed, p);
  for (std::size_t i = 0; i < r.vals.size(); ++i) {
    const double left = out.xs[i];
    const double right = i + 1 < out.xs.size() ? out.xs[i + 1] : left + 1.0;
    const double mid = 0.5 * (left + right);
    const double J = opts.unit_jacobian ? 1.0 : jacobian(elapsed, mid, p);
    out.vals[i] = J * r.vals[i];
  }
  return out;
}

} // namespace bgklim
