// SPDX-License-Identifier: Apache-2.0
//
// Model data types: two-sided coefficient k(x), velocity profile a(xi) with
// its flux primitive A, the space/velocity grid, and kinetic/macroscopic
// fields with the equilibrium (chi) and moment operations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bgklim/common.hpp"

namespace bgklim {

// Piecewise-constant coefficient k = k_left on x<0, k_right on x>0.
// Both values must have the same sign (k_left * k_right > 0).
struct Coefficient {
  double k_left = 1.0;
  double k_right = 1.0;

  static Coefficient make(double k_left, double k_right) {
    if (!(k_left * k_right > 0.0))
      throw hypothesis_error("coefficient: k_left*k_right must be positive, got k_left=" +
                             std::to_string(k_left) + " k_right=" + std::to_string(k_right));
    return Coefficient{k_left, k_right};
  }

  double at(double x) const { return x < 0.0 ? k_left : k_right; }

  // Jump ratio M_k = max(k_left/k_right, k_right/k_left) >= 1.
  double jump_ratio() const {
    return std::max(k_left / k_right, k_right / k_left);
  }

  // alpha_k: 1 on x>0, k_right/k_left on x<0; alpha_k(0) = 1.
  double alpha(double x) const { return x < 0.0 ? k_right / k_left : 1.0; }

  // beta_k: k_left/k_right on x>0, 1 on x<0; beta_k(0) = 1.
  double beta(double x) const { return x > 0.0 ? k_left / k_right : 1.0; }
};

// Continuous velocity a(xi) on [0,1], stored as a piecewise-linear
// interpolant, with exact integrals of the interpolant:
//   A(u)     = integral_0^u a           (clamped outside [0,1])
//   A_pos(u) = integral_0^u max(a, 0)
//   A_neg(u) = integral_0^u min(a, 0)
// Sign conditions enforced at construction: A >= -tol on a dense scan and
// |A(1)| <= tol.
class VelocityModel {
public:
  // a(xi) = 1 - 2 xi. The two-node table reproduces it exactly, so the
  // closed form and the table path share one code path.
  static VelocityModel burgers() {
    return from_nodes({0.0, 1.0}, {1.0, -1.0}, 1e-12);
  }

  static VelocityModel from_nodes(std::vector<double> xi, std::vector<double> a,
                                  double quadrature_tol = 1e-8) {
    VelocityModel v;
    v.xi_ = std::move(xi);
    v.a_ = std::move(a);
    v.tol_ = quadrature_tol;
    v.validate_and_build();
    return v;
  }

  // Two-column CSV (xi, a) with a header line; xi strictly increasing,
  // spanning [0,1].
  static VelocityModel from_csv(const std::string& path, double quadrature_tol = 1e-8) {
    std::ifstream in(path);
    if (!in) throw config_error("velocity table: cannot open '" + path + "'");
    std::string line;
    std::vector<double> xi, a;
    bool header_skipped = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (!header_skipped) { header_skipped = true; continue; }
      std::istringstream row(line);
      std::string sx, sa;
      if (!std::getline(row, sx, ',') || !std::getline(row, sa))
        throw config_error("velocity table: malformed row '" + line + "' in " + path);
      xi.push_back(std::stod(sx));
      a.push_back(std::stod(sa));
    }
    if (xi.size() < 2) throw config_error("velocity table: need at least two rows in " + path);
    return from_nodes(std::move(xi), std::move(a), quadrature_tol);
  }

  // supported on [0,1]: zero outside, node values at the endpoints
  double a(double s) const {
    if (s < 0.0 || s > 1.0) return 0.0;
    std::size_t k = segment_of(s);
    double t = (s - xi_[k]) / (xi_[k + 1] - xi_[k]);
    return a_[k] + t * (a_[k + 1] - a_[k]);
  }

  double A(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return Aint_.back();
    std::size_t k = segment_of(u);
    return Aint_[k] + seg_integral(k, u);
  }

  double A_pos(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return Apos_.back();
    std::size_t k = segment_of(u);
    return Apos_[k] + seg_pos_integral(k, u);
  }

  double A_neg(double u) const { return A(u) - A_pos(u); }

  double max_abs_a() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  bool strictly_decreasing() const {
    for (std::size_t k = 0; k + 1 < a_.size(); ++k)
      if (!(a_[k + 1] < a_[k])) return false;
    return true;
  }

  // Solve a(xi) = target for strictly decreasing a; clamps to [0,1] when the
  // target is out of range.
  double invert_a(double target) const {
    if (!strictly_decreasing())
      throw hypothesis_error("velocity: invert_a requires strictly decreasing a");
    if (target >= a_.front()) return 0.0;
    if (target <= a_.back()) return 1.0;
    for (std::size_t k = 0; k + 1 < xi_.size(); ++k) {
      if (target <= a_[k] && target >= a_[k + 1]) {
        double t = (target - a_[k]) / (a_[k + 1] - a_[k]);
        return xi_[k] + t * (xi_[k + 1] - xi_[k]);
      }
    }
    return 1.0;
  }

  double quadrature_tol() const { return tol_; }
  const std::vector<double>& nodes() const { return xi_; }
  const std::vector<double>& node_values() const { return a_; }

private:
  std::vector<double> xi_, a_;
  std::vector<double> Aint_, Apos_; // prefix integrals at nodes, Aint_[0] = 0
  double tol_ = 1e-8;

  std::size_t segment_of(double s) const {
    auto it = std::upper_bound(xi_.begin(), xi_.end(), s);
    std::size_t k = static_cast<std::size_t>(it - xi_.begin());
    if (k == 0) return 0;
    if (k >= xi_.size()) return xi_.size() - 2;
    return k - 1;
  }

  // integral of the interpolant over [xi_[k], x], x inside segment k
  double seg_integral(std::size_t k, double x) const {
    double L = xi_[k + 1] - xi_[k], d = x - xi_[k];
    return a_[k] * d + 0.5 * (a_[k + 1] - a_[k]) * d * d / L;
  }

  // integral of max(a,0) over [xi_[k], x]
  double seg_pos_integral(std::size_t k, double x) const {
    double a0 = a_[k], a1 = a_[k + 1];
    if (a0 >= 0.0 && a1 >= 0.0) return seg_integral(k, x);
    if (a0 <= 0.0 && a1 <= 0.0) return 0.0;
    double L = xi_[k + 1] - xi_[k];
    double xstar = xi_[k] + a0 * L / (a0 - a1); // root of the segment
    if (a0 > 0.0) // positive then negative
      return x <= xstar ? seg_integral(k, x) : seg_integral(k, xstar);
    // negative then positive
    return x <= xstar ? 0.0 : seg_integral(k, x) - seg_integral(k, xstar);
  }

  void validate_and_build() {
    if (xi_.size() != a_.size() || xi_.size() < 2)
      throw hypothesis_error("velocity: node/value arrays must match, length >= 2");
    for (std::size_t k = 0; k + 1 < xi_.size(); ++k)
      if (!(xi_[k + 1] > xi_[k]))
        throw hypothesis_error("velocity: nodes must be strictly increasing at xi=" +
                               std::to_string(xi_[k + 1]));
    if (std::abs(xi_.front()) > 1e-12 || std::abs(xi_.back() - 1.0) > 1e-12)
      throw hypothesis_error("velocity: nodes must span [0,1], got [" +
                             std::to_string(xi_.front()) + ", " + std::to_string(xi_.back()) + "]");
    xi_.front() = 0.0;
    xi_.back() = 1.0;

    Aint_.assign(xi_.size(), 0.0);
    Apos_.assign(xi_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < xi_.size(); ++k) {
      Aint_[k + 1] = Aint_[k] + seg_integral(k, xi_[k + 1]);
      Apos_[k + 1] = Apos_[k] + seg_pos_integral(k, xi_[k + 1]);
    }

    if (std::abs(Aint_.back()) > tol_)
      throw hypothesis_error("velocity: integral of a over [0,1] must vanish, got A(1)=" +
                             std::to_string(Aint_.back()));
    // dense nonnegativity scan of the primitive, plus the nodes themselves
    const int n_scan = 1024;
    for (int i = 0; i <= n_scan; ++i) {
      double u = static_cast<double>(i) / n_scan;
      double v = A(u);
      if (v < -tol_)
        throw hypothesis_error("velocity: A(u) must be >= 0 on [0,1]; A(" +
                               std::to_string(u) + ") = " + std::to_string(v));
    }
    for (double u : xi_) {
      double v = A(u);
      if (v < -tol_)
        throw hypothesis_error("velocity: A(u) must be >= 0 on [0,1]; A(" +
                               std::to_string(u) + ") = " + std::to_string(v));
    }
  }
};

// Uniform grid: x-cells on [x_min, x_max] with a cell interface exactly at
// x = 0 (bounds are nudged onto the lattice at construction), xi-cells on
// [0,1], plus the run's time step and horizon.
struct Grid {
  double x_min = -1.0, x_max = 1.0;
  int n_x = 2, n_xi = 1;
  double dx = 1.0, dxi = 1.0;
  double dt = 1.0, t_final = 1.0;
  int n_left = 1; // number of x-cells left of the interface

  static Grid make(double x_min, double x_max, int n_x, int n_xi, double dt, double t_final) {
    if (!(x_min < 0.0 && 0.0 < x_max)) throw config_error("grid: require x_min < 0 < x_max");
    if (n_x < 2) throw config_error("grid: n_x must be >= 2");
    if (n_xi < 1) throw config_error("grid: n_xi must be >= 1");
    if (!(dt > 0.0)) throw config_error("grid: dt must be positive");
    if (!(t_final > 0.0)) throw config_error("grid: t_final must be positive");
    Grid g;
    g.n_x = n_x;
    g.n_xi = n_xi;
    g.dx = (x_max - x_min) / n_x;
    g.dxi = 1.0 / n_xi;
    g.dt = dt;
    g.t_final = t_final;
    // pin the interface to a cell boundary: shift bounds onto the lattice
    int n_left = static_cast<int>(std::lround(-x_min / g.dx));
    n_left = std::clamp(n_left, 1, n_x - 1);
    g.n_left = n_left;
    g.x_min = -n_left * g.dx;
    g.x_max = g.x_min + n_x * g.dx;
    return g;
  }

  double x_center(int i) const { return x_min + (i + 0.5) * dx; }
  double xi_center(int j) const { return (j + 0.5) * dxi; }
  double xi_edge(int j) const { return j * dxi; }

  bool same_layout(const Grid& o) const {
    return n_x == o.n_x && n_xi == o.n_xi && x_min == o.x_min && x_max == o.x_max;
  }
};

// Cell-averaged equilibrium column: entry j is |[xi_j, xi_{j+1}] ∩ [0,u]| / dxi
// (signed analogue for u < 0, which is identically zero on the [0,1] grid).
inline double chi_entry(double u, int j, double dxi) {
  if (u <= 0.0) return 0.0;
  return clamp01((u - j * dxi) / dxi);
}

inline std::vector<double> chi(double u, const Grid& g) {
  std::vector<double> col(static_cast<std::size_t>(g.n_xi));
  for (int j = 0; j < g.n_xi; ++j) col[static_cast<std::size_t>(j)] = chi_entry(u, j, g.dxi);
  return col;
}

// Macroscopic field: one value per x-cell (point samples at cell centers).
struct MacroField {
  Grid grid;
  std::vector<double> v;

  static MacroField zeros(const Grid& g) {
    return MacroField{g, std::vector<double>(static_cast<std::size_t>(g.n_x), 0.0)};
  }
  static MacroField constant(const Grid& g, double c) {
    return MacroField{g, std::vector<double>(static_cast<std::size_t>(g.n_x), c)};
  }
  static MacroField riemann(const Grid& g, double u_left, double u_right) {
    MacroField u = zeros(g);
    for (int i = 0; i < g.n_x; ++i)
      u.v[static_cast<std::size_t>(i)] = g.x_center(i) < 0.0 ? u_left : u_right;
    return u;
  }

  double l1() const {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s * grid.dx;
  }
};

inline double l1_distance(const MacroField& u, const MacroField& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.v.size(); ++i) s += std::abs(u.v[i] - w.v[i]);
  return s * u.grid.dx;
}

// Kinetic density: cell averages in xi, point samples at x-cell centers.
// Stored xi-row-major so each xi-row is contiguous for transport.
struct KineticDensity {
  Grid grid;
  std::vector<double> v; // index j * n_x + i

  static KineticDensity zeros(const Grid& g) {
    return KineticDensity{g, std::vector<double>(
        static_cast<std::size_t>(g.n_x) * static_cast<std::size_t>(g.n_xi), 0.0)};
  }

  static KineticDensity equilibrium(const MacroField& u) {
    KineticDensity f = zeros(u.grid);
    const Grid& g = u.grid;
    for (int j = 0; j < g.n_xi; ++j)
      for (int i = 0; i < g.n_x; ++i)
        f.at(i, j) = chi_entry(u.v[static_cast<std::size_t>(i)], j, g.dxi);
    return f;
  }

  double& at(int i, int j) {
    return v[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.n_x) +
             static_cast<std::size_t>(i)];
  }
  double at(int i, int j) const {
    return v[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.n_x) +
             static_cast<std::size_t>(i)];
  }
  const double* row(int j) const {
    return v.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.n_x);
  }
  double* row(int j) {
    return v.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.n_x);
  }
};

// dxi * sum_j f(i, j)
inline double moment(const KineticDensity& f, int i) {
  double s = 0.0;
  for (int j = 0; j < f.grid.n_xi; ++j) s += f.at(i, j);
  return s * f.grid.dxi;
}

inline MacroField moments(const KineticDensity& f) {
  MacroField u = MacroField::zeros(f.grid);
  for (int i = 0; i < f.grid.n_x; ++i) u.v[static_cast<std::size_t>(i)] = moment(f, i);
  return u;
}

// L1(x, xi) distance between kinetic densities on one grid.
inline double l1_distance(const KineticDensity& f, const KineticDensity& h) {
  double s = 0.0;
  for (std::size_t n = 0; n < f.v.size(); ++n) s += std::abs(f.v[n] - h.v[n]);
  return s * f.grid.dx * f.grid.dxi;
}

} // namespace bgklim
