// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment harness: flat key=value configuration, BGK-vs-reference runs,
// eps/grid convergence ladders, the randomized verification suite, and CSV +
// JSON report emission.  Everything here is plumbing around the solver
// headers; the quantities it reports are defined there.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bgklim/bgk.hpp"
#include "bgklim/common.hpp"
#include "bgklim/kinetic_analysis.hpp"
#include "bgklim/model.hpp"
#include "bgklim/reference.hpp"
#include "bgklim/transport.hpp"

namespace bgklim {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
}

} // namespace detail

struct ExperimentConfig {
  double k_left = 1.0;
  double k_right = 1.0;

  std::string velocity_model = "burgers"; // "burgers" | "table"
  std::string velocity_table;             // csv path when model == "table"

  std::string initial_kind = "riemann";   // "riemann" | "table"
  double u_left = 1.0;
  double u_right = 0.0;
  std::string initial_table;

  int n_x = 128;
  int n_xi = 32;
  double x_min = -2.0;
  double x_max = 2.0;
  double t_final = 0.5;

  double eps = 0.05;
  double dt = 0.0;                        // 0 -> default_dt policy
  std::string splitting = "strang";       // "lie" | "strang"

  double cfl = 0.9;
  std::string flux_kind = "engquist_osher"; // "engquist_osher" | "godunov"
  double width_ratio = 2.0;
  int refine = 4;                         // reference resolution multiplier

  std::string out_dir;                    // empty -> no files written
  int snapshots = 32;
  long long seed = 1234;

  void apply(const std::string& key, const std::string& value) {
    using detail::parse_double;
    using detail::parse_int;
    if (key == "coefficient.k_left") k_left = parse_double(key, value);
    else if (key == "coefficient.k_right") k_right = parse_double(key, value);
    else if (key == "velocity.model") {
      if (value != "burgers" && value != "table")
        throw config_error("config: velocity.model must be 'burgers' or 'table'");
      velocity_model = value;
    } else if (key == "velocity.table") {
      velocity_table = value;
      velocity_model = "table";
    } else if (key == "initial.kind") {
      if (value != "riemann" && value != "table")
        throw config_error("config: initial.kind must be 'riemann' or 'table'");
      initial_kind = value;
    } else if (key == "initial.u_left") u_left = parse_double(key, value);
    else if (key == "initial.u_right") u_right = parse_double(key, value);
    else if (key == "initial.table") {
      initial_table = value;
      initial_kind = "table";
    } else if (key == "grid.n_x") n_x = static_cast<int>(parse_int(key, value));
    else if (key == "grid.n_xi") n_xi = static_cast<int>(parse_int(key, value));
    else if (key == "grid.x_min") x_min = parse_double(key, value);
    else if (key == "grid.x_max") x_max = parse_double(key, value);
    else if (key == "grid.t_final") t_final = parse_double(key, value);
    else if (key == "bgk.eps") eps = parse_double(key, value);
    else if (key == "bgk.dt") dt = parse_double(key, value);
    else if (key == "bgk.splitting") {
      if (value != "lie" && value != "strang")
        throw config_error("config: bgk.splitting must be 'lie' or 'strang'");
      splitting = value;
    } else if (key == "reference.cfl") cfl = parse_double(key, value);
    else if (key == "reference.flux_kind") {
      if (value != "engquist_osher" && value != "godunov")
        throw config_error("config: reference.flux_kind must be 'engquist_osher' or 'godunov'");
      flux_kind = value;
    } else if (key == "reference.width_ratio") width_ratio = parse_double(key, value);
    else if (key == "reference.refine") refine = static_cast<int>(parse_int(key, value));
    else if (key == "output.directory") out_dir = value;
    else if (key == "output.snapshots") snapshots = static_cast<int>(parse_int(key, value));
    else if (key == "seed") seed = parse_int(key, value);
    else throw config_error("config: unknown key '" + key + "'");
  }

  static ExperimentConfig from_string(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error("config: line " + std::to_string(lineno) +
                           " is not 'key = value': '" + line + "'");
      cfg.apply(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
  }

  Coefficient coefficient() const { return Coefficient::make(k_left, k_right); }

  VelocityModel velocity() const {
    if (velocity_model == "burgers") return VelocityModel::burgers();
    if (velocity_model == "table") {
      if (velocity_table.empty())
        throw config_error("config: velocity.model=table requires velocity.table");
      return VelocityModel::from_csv(velocity_table);
    }
    throw config_error("config: velocity.model must be 'burgers' or 'table'");
  }

  Splitting splitting_enum() const {
    if (splitting == "lie") return Splitting::lie;
    if (splitting == "strang") return Splitting::strang;
    throw config_error("config: bgk.splitting must be 'lie' or 'strang'");
  }

  FluxKind flux_enum() const {
    if (flux_kind == "engquist_osher") return FluxKind::engquist_osher;
    if (flux_kind == "godunov") return FluxKind::godunov;
    throw config_error("config: reference.flux_kind must be 'engquist_osher' or 'godunov'");
  }

  FvConfig fv() const { return FvConfig::make(cfl, flux_enum(), width_ratio); }

  double dt_effective(const Coefficient& k, const VelocityModel& vel) const {
    if (dt > 0.0) return dt;
    Grid probe = Grid::make(x_min, x_max, n_x, n_xi, 1.0, t_final);
    return default_dt(eps, probe, k, vel);
  }

  // Builds the grid and enforces the cone condition: the domain must contain
  // the influence cone of the interface plus a margin, so boundary effects
  // (constant extension of the outermost cells) never reach x = 0.
  Grid grid(const Coefficient& k, const VelocityModel& vel) const {
    if (snapshots < 1) throw config_error("config: output.snapshots must be >= 1");
    if (refine < 4) throw config_error("config: reference.refine must be >= 4");
    Grid g = Grid::make(x_min, x_max, n_x, n_xi, dt_effective(k, vel), t_final);
    const double speed = std::max(std::abs(k.k_left), std::abs(k.k_right)) * vel.max_abs_a();
    const double need = speed * g.t_final + 4.0 * g.dx;
    if (!(std::min(-g.x_min, g.x_max) > need))
      throw config_error("config: domain too small: need |x_min|, x_max > " +
                         std::to_string(need) + " (max speed " + std::to_string(speed) +
                         ", t_final " + std::to_string(g.t_final) + ")");
    return g;
  }

  MacroField initial(const Grid& g) const {
    if (initial_kind == "riemann") {
      if (u_left < 0.0 || u_left > 1.0 || u_right < 0.0 || u_right > 1.0)
        throw config_error("config: initial.u_left/u_right must lie in [0,1]");
      return MacroField::riemann(g, u_left, u_right);
    }
    if (initial_kind == "table") return initial_from_table(g);
    throw config_error("config: initial.kind must be 'riemann' or 'table'");
  }

  BgkConfig bgk(const Grid& g) const {
    return BgkConfig::make(eps, splitting_enum(), g.dt, t_final);
  }

  json to_json() const {
    json j;
    j["coefficient.k_left"] = k_left;
    j["coefficient.k_right"] = k_right;
    j["velocity.model"] = velocity_model;
    if (!velocity_table.empty()) j["velocity.table"] = velocity_table;
    j["initial.kind"] = initial_kind;
    if (initial_kind == "riemann") {
      j["initial.u_left"] = u_left;
      j["initial.u_right"] = u_right;
    }
    if (!initial_table.empty()) j["initial.table"] = initial_table;
    j["grid.n_x"] = n_x;
    j["grid.n_xi"] = n_xi;
    j["grid.x_min"] = x_min;
    j["grid.x_max"] = x_max;
    j["grid.t_final"] = t_final;
    j["bgk.eps"] = eps;
    j["bgk.dt"] = dt;
    j["bgk.splitting"] = splitting;
    j["reference.cfl"] = cfl;
    j["reference.flux_kind"] = flux_kind;
    j["reference.width_ratio"] = width_ratio;
    j["reference.refine"] = refine;
    j["output.directory"] = out_dir;
    j["output.snapshots"] = snapshots;
    j["seed"] = seed;
    return j;
  }

private:
  MacroField initial_from_table(const Grid& g) const {
    if (initial_table.empty())
      throw config_error("config: initial.kind=table requires initial.table");
    std::ifstream in(initial_table);
    if (!in) throw config_error("config: cannot open initial table '" + initial_table + "'");
    std::vector<double> xs, us;
    std::string line;
    while (std::getline(in, line)) {
      line = detail::trim(line);
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string a, b;
      if (!std::getline(row, a, ',') || !std::getline(row, b))
        throw config_error("config: initial table rows must be 'x,u'");
      char* end = nullptr;
      double x = std::strtod(a.c_str(), &end);
      if (end == a.c_str()) continue; // header row
      xs.push_back(x);
      us.push_back(detail::parse_double("initial.table value", detail::trim(b)));
    }
    if (xs.size() < 2) throw config_error("config: initial table needs at least two rows");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1]))
        throw config_error("config: initial table x column must be strictly increasing");
    for (double u : us)
      if (u < -1e-12 || u > 1.0 + 1e-12)
        throw config_error("config: initial table values must lie in [0,1]");
    MacroField out = MacroField::zeros(g);
    for (int i = 0; i < g.n_x; ++i) {
      const double x = g.x_center(i);
      double u;
      if (x <= xs.front()) u = us.front();
      else if (x >= xs.back()) u = us.back();
      else {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
        u = us[hi - 1] + w * (us[hi] - us[hi - 1]);
      }
      out.v[static_cast<std::size_t>(i)] = clamp01(u);
    }
    return out;
  }
};

struct CheckResult {
  std::string name;
  std::string anchor;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

namespace detail {

inline json checks_to_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const CheckResult& c : checks) {
    json j;
    j["name"] = c.name;
    j["anchor"] = c.anchor;
    j["value"] = c.value;
    j["bound"] = c.bound;
    j["pass"] = c.pass;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline bool all_pass(const std::vector<CheckResult>& checks) {
  for (const CheckResult& c : checks)
    if (!c.pass) return false;
  return true;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw config_error("output: cannot create directory '" + dir + "': " + ec.message());
}

class CsvFile {
public:
  CsvFile(const std::string& dir, const std::string& name, const std::string& header) {
    path_ = dir + "/" + name;
    fp_ = std::fopen(path_.c_str(), "w");
    if (!fp_) throw config_error("output: cannot write '" + path_ + "'");
    std::fprintf(fp_, "%s\n", header.c_str());
  }
  ~CsvFile() {
    if (fp_) std::fclose(fp_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  void row(std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
      std::fprintf(fp_, first ? "%.17g" : ",%.17g", v);
      first = false;
    }
    std::fprintf(fp_, "\n");
  }
  void row(const std::string& prefix, std::initializer_list<double> vals) {
    std::fprintf(fp_, "%s", prefix.c_str());
    for (double v : vals) std::fprintf(fp_, ",%.17g", v);
    std::fprintf(fp_, "\n");
  }

private:
  std::string path_;
  std::FILE* fp_ = nullptr;
};

inline void write_json(const std::string& dir, const std::string& name, const json& j) {
  const std::string path = dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw config_error("output: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline double rand01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Random piecewise-constant data in [0,1] with a few plateaus; breakpoints on
// cell boundaries so the field is exactly representable.
inline MacroField random_plateaus(const Grid& g, std::mt19937_64& rng, int n_plateaus = 4) {
  std::vector<int> cuts;
  for (int p = 1; p < n_plateaus; ++p)
    cuts.push_back(1 + static_cast<int>(rng() % static_cast<unsigned long long>(g.n_x - 1)));
  cuts.push_back(0);
  cuts.push_back(g.n_x);
  std::sort(cuts.begin(), cuts.end());
  MacroField out = MacroField::zeros(g);
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double val = rand01(rng);
    for (int i = cuts[seg]; i < cuts[seg + 1]; ++i) out.v[static_cast<std::size_t>(i)] = val;
  }
  return out;
}

inline double pos_distance(const KineticDensity& f, const KineticDensity& h) {
  if (!f.grid.same_layout(h.grid))
    throw config_error("pos_distance: grids must share a layout");
  double s = 0.0;
  for (std::size_t n = 0; n < f.v.size(); ++n) s += pos_part(f.v[n] - h.v[n]);
  return s * f.grid.dx * f.grid.dxi;
}

inline double pos_distance(const MacroField& u, const MacroField& w) {
  if (!u.grid.same_layout(w.grid))
    throw config_error("pos_distance: grids must share a layout");
  double s = 0.0;
  for (std::size_t n = 0; n < u.v.size(); ++n) s += pos_part(u.v[n] - w.v[n]);
  return s * u.grid.dx;
}

// Least-squares slope of log(y) against log(x); y values are floored to keep
// exact zeros (constant data) from poisoning the fit.
inline double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw config_error("fit_slope: need matching samples, at least two");
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(std::max(ys[i], 1e-300));
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

inline double max_range_violation(const KineticDensity& f) {
  double worst = 0.0;
  for (double v : f.v) worst = std::max(worst, std::max(-v, v - 1.0));
  return worst;
}

} // namespace detail

// Reference macroscopic solution sampled at the BGK snapshot times on the BGK
// grid.  Uses the closed-form Riemann solution when it applies (constant
// positive k, Riemann data, strictly decreasing velocity); otherwise runs the
// monotone finite-volume scheme on a refined grid and box-averages down.
struct ReferenceSolution {
  std::string kind; // "exact-riemann" | "finite-volume"
  std::vector<MacroField> us;
};

inline ReferenceSolution compute_reference(const ExperimentConfig& cfg, const Grid& g,
                                           const Coefficient& k, const VelocityModel& vel,
                                           const std::vector<double>& times) {
  ReferenceSolution ref;
  const bool exact = k.k_left == k.k_right && k.k_left > 0.0 &&
                     cfg.initial_kind == "riemann" && vel.strictly_decreasing();
  if (exact) {
    ref.kind = "exact-riemann";
    for (double t : times) {
      MacroField u = MacroField::zeros(g);
      for (int i = 0; i < g.n_x; ++i) {
        const double x = g.x_center(i);
        u.v[static_cast<std::size_t>(i)] =
            t == 0.0 ? (x < 0.0 ? cfg.u_left : cfg.u_right)
                     : riemann_exact(cfg.u_left, cfg.u_right, k.k_left, vel, x / t);
      }
      ref.us.push_back(std::move(u));
    }
    return ref;
  }
  ref.kind = "finite-volume";
  Grid fine = Grid::make(g.x_min, g.x_max, g.n_x * cfg.refine, 1, g.dt, g.t_final);
  ExperimentConfig fine_cfg = cfg;
  fine_cfg.n_x = fine.n_x;
  MacroTrajectory fv = fv_run(fine_cfg.initial(fine), cfg.fv(), k, vel, g.t_final,
                              static_cast<int>(times.size()) - 1);
  for (std::size_t s = 0; s < times.size(); ++s)
    ref.us.push_back(downsample(fv.us[s], g));
  return ref;
}

struct RunOutput {
  ExperimentConfig cfg; // with dt resolved
  Trajectory traj;
  ReferenceSolution ref;
  DefectMeasure defect;
  DefectMeasure defect_minus; // with the interface atom, when k jumps
  DefectMeasure defect_plus;
  double u0_l1 = 0.0;
  double l1_error = 0.0;          // time-averaged L1 distance to the reference
  double eq_distance_mean = 0.0;  // time-averaged distance to equilibrium
  double eq_distance_final = 0.0;
  double defect_total = 0.0;
  double defect_bound = 0.0;
  std::vector<std::string> test_ids;
  std::vector<double> residual_plus;
  std::vector<double> residual_minus;
  std::vector<CheckResult> checks;
  bool pass = false;
  json report;
};

namespace detail {

inline void write_run_csvs(const RunOutput& out) {
  const std::string& dir = out.cfg.out_dir;
  const Grid& g = out.traj.grid;
  ensure_dir(dir);
  {
    CsvFile f(dir, "macro_0.csv", "t,x,u");
    for (std::size_t s = 0; s < out.traj.times.size(); ++s)
      for (int i = 0; i < g.n_x; ++i)
        f.row({out.traj.times[s], g.x_center(i), out.traj.us[s].v[static_cast<std::size_t>(i)]});
  }
  {
    CsvFile f(dir, "macro_1.csv", "t,x,u");
    for (std::size_t s = 0; s < out.traj.times.size(); ++s)
      for (int i = 0; i < g.n_x; ++i)
        f.row({out.traj.times[s], g.x_center(i), out.ref.us[s].v[static_cast<std::size_t>(i)]});
  }
  {
    CsvFile f(dir, "kinetic_0.csv", "t,x,xi,f");
    for (std::size_t s = 0; s < out.traj.times.size(); ++s)
      for (int i = 0; i < g.n_x; ++i)
        for (int j = 0; j < g.n_xi; ++j)
          f.row({out.traj.times[s], g.x_center(i), g.xi_center(j), out.traj.fs[s].at(i, j)});
  }
  {
    // cumulative defect at the final snapshot, on xi cell edges
    CsvFile f(dir, "defect.csv", "t,x,xi,m");
    const int s = out.defect.n_snapshots() - 1;
    for (int i = 0; i < g.n_x; ++i)
      for (int j = 0; j <= g.n_xi; ++j)
        f.row({out.defect.times[static_cast<std::size_t>(s)], g.x_center(i), g.xi_edge(j),
               out.defect.at(s, i, j)});
  }
  {
    CsvFile f(dir, "residuals.csv", "test_id,sign,residual");
    for (std::size_t t = 0; t < out.test_ids.size(); ++t) {
      f.row(out.test_ids[t] + ",plus", {out.residual_plus[t]});
      f.row(out.test_ids[t] + ",minus", {out.residual_minus[t]});
    }
  }
  write_json(dir, "report.json", out.report);
}

} // namespace detail

inline RunOutput run_experiment(const ExperimentConfig& cfg_in) {
  RunOutput out;
  out.cfg = cfg_in;
  const Coefficient k = out.cfg.coefficient();
  const VelocityModel vel = out.cfg.velocity();
  const Grid g = out.cfg.grid(k, vel);
  out.cfg.dt = g.dt;
  const MacroField u0 = out.cfg.initial(g);
  out.u0_l1 = u0.l1();

  out.traj = bgk_run(u0, out.cfg.bgk(g), k, vel, out.cfg.snapshots);
  out.ref = compute_reference(out.cfg, g, k, vel, out.traj.times);

  const std::vector<double> tw = detail::trapezoid_weights(out.traj.times);
  const double T = g.t_final;
  for (std::size_t s = 0; s < out.traj.times.size(); ++s) {
    out.l1_error += tw[s] * l1_distance(out.traj.us[s], out.ref.us[s]) / T;
    out.eq_distance_mean += tw[s] * equilibrium_distance(out.traj.fs[s]) / T;
  }
  out.eq_distance_final = equilibrium_distance(out.traj.fs.back());

  out.defect = defect_measure(out.traj, out.cfg.eps);
  out.defect_total = defect_mass(out.defect);
  out.defect_bound = out.u0_l1 + 10.0 * (g.dx + g.dt);
  const bool jump = k.k_left != k.k_right;
  out.defect_minus = interface_correction(out.defect, k, vel, SignCase::minus);
  out.defect_plus = interface_correction(out.defect, k, vel, SignCase::plus);

  std::vector<TestFunction> tests = make_test_family(g, T);
  for (const TestFunction& t : tests) out.test_ids.push_back(t.id);
  out.residual_plus = kinetic_residual(out.traj.times, out.traj.us,
                                       jump ? out.defect_plus : out.defect, tests,
                                       SignCase::plus, k, vel);
  out.residual_minus = kinetic_residual(out.traj.times, out.traj.us,
                                        jump ? out.defect_minus : out.defect, tests,
                                        SignCase::minus, k, vel);

  double range_violation = 0.0;
  for (const KineticDensity& f : out.traj.fs)
    range_violation = std::max(range_violation, detail::max_range_violation(f));
  double defect_min = 0.0;
  for (double v : out.defect.cumulative) defect_min = std::min(defect_min, v);
  double atom_minus_min = 0.0, atom_plus_min = 0.0;
  for (double v : out.defect_minus.atom) atom_minus_min = std::min(atom_minus_min, v);
  for (double v : out.defect_plus.atom) atom_plus_min = std::min(atom_plus_min, v);

  out.checks.push_back({"invariant-region", "wellposed-invariant-region", range_violation,
                        1e-12, range_violation <= 1e-12});
  out.checks.push_back({"defect-nonneg", "entropy-defect-nonneg", defect_min, -1e-9,
                        defect_min >= -1e-9});
  out.checks.push_back({"defect-mass-bound", "entropy-defect-mass", out.defect_total,
                        out.defect_bound, out.defect_total <= out.defect_bound});
  if (jump)
    out.checks.push_back({"interface-weight-minus", "entropy-interface-weight", atom_minus_min,
                          -1e-10, out.defect_minus.atom_nonneg});
  out.pass = detail::all_pass(out.checks);

  double res_max_plus = 0.0, res_max_minus = 0.0;
  for (double r : out.residual_plus) res_max_plus = std::max(res_max_plus, std::abs(r));
  for (double r : out.residual_minus) res_max_minus = std::max(res_max_minus, std::abs(r));

  json metrics;
  metrics["u0_l1"] = out.u0_l1;
  metrics["l1_error_time_avg"] = out.l1_error;
  metrics["eq_distance_mean"] = out.eq_distance_mean;
  metrics["eq_distance_final"] = out.eq_distance_final;
  metrics["defect_mass"] = out.defect_total;
  metrics["defect_mass_bound"] = out.defect_bound;
  metrics["residual_max_plus"] = res_max_plus;
  metrics["residual_max_minus"] = res_max_minus;

  json flags;
  flags["reference"] = out.ref.kind;
  flags["dt_effective"] = g.dt;
  flags["subgrid_interface_step"] =
      g.dt * std::max(std::abs(k.k_left), std::abs(k.k_right)) * vel.max_abs_a() < 0.5 * g.dx;
  if (jump) {
    // The plus-side interface weight is sign-indefinite when k_left > k_right;
    // reported, not gated.
    flags["interface_weight_plus_min"] = atom_plus_min;
    flags["interface_weight_plus_nonneg"] = out.defect_plus.atom_nonneg;
  }

  out.report["command"] = "run";
  out.report["config"] = out.cfg.to_json();
  out.report["metrics"] = metrics;
  out.report["flags"] = flags;
  out.report["checks"] = detail::checks_to_json(out.checks);
  out.report["pass"] = out.pass;

  if (!out.cfg.out_dir.empty()) detail::write_run_csvs(out);
  return out;
}

struct LadderRow {
  double eps = 0.0;
  double l1_error = 0.0;
  double eq_distance = 0.0;
  double defect_mass = 0.0;
  double defect_bound = 0.0;
};

struct EpsLadderOutput {
  std::vector<LadderRow> rows;
  double eq_slope = 0.0;
  double l1_slope = 0.0;
  std::string reference_kind;
  std::vector<CheckResult> checks;
  bool pass = false;
  json report;
};

// eps-refinement study at fixed grid and fixed dt.  The reference is computed
// once; rungs run as independent parallel jobs and are assembled in order.
inline EpsLadderOutput converge_eps(const ExperimentConfig& cfg_in,
                                    const std::vector<double>& ladder) {
  if (ladder.size() < 4) throw config_error("converge-eps: ladder needs at least 4 entries");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] < ladder[i - 1]))
      throw config_error("converge-eps: ladder must be strictly decreasing");
  if (!(ladder.back() > 0.0)) throw config_error("converge-eps: eps must be positive");

  ExperimentConfig cfg = cfg_in;
  const Coefficient k = cfg.coefficient();
  const VelocityModel vel = cfg.velocity();
  if (cfg.dt <= 0.0) {
    // pin one dt across the ladder so only eps varies
    ExperimentConfig probe = cfg;
    probe.eps = ladder.front();
    cfg.dt = probe.dt_effective(k, vel);
  }
  const Grid g = cfg.grid(k, vel);
  const MacroField u0 = cfg.initial(g);
  const double u0_l1 = u0.l1();

  std::vector<double> times;
  for (int s = 0; s <= cfg.snapshots; ++s)
    times.push_back(s * g.t_final / cfg.snapshots);
  const ReferenceSolution ref = compute_reference(cfg, g, k, vel, times);
  const std::vector<double> tw = detail::trapezoid_weights(times);

  auto rung = [&](double eps) {
    ExperimentConfig rc = cfg;
    rc.eps = eps;
    Trajectory traj = bgk_run(u0, rc.bgk(g), k, vel, rc.snapshots);
    LadderRow row;
    row.eps = eps;
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
      row.l1_error += tw[s] * l1_distance(traj.us[s], ref.us[s]) / g.t_final;
      row.eq_distance += tw[s] * equilibrium_distance(traj.fs[s]) / g.t_final;
    }
    row.defect_mass = defect_mass(defect_measure(traj, eps));
    row.defect_bound = u0_l1 + 10.0 * (g.dx + g.dt);
    return row;
  };

  std::vector<std::future<LadderRow>> jobs;
  for (double eps : ladder)
    jobs.push_back(std::async(std::launch::async, rung, eps));
  EpsLadderOutput out;
  out.reference_kind = ref.kind;
  for (auto& j : jobs) out.rows.push_back(j.get());

  std::vector<double> epses, eqs, l1s;
  for (const LadderRow& r : out.rows) {
    epses.push_back(r.eps);
    eqs.push_back(r.eq_distance);
    l1s.push_back(r.l1_error);
  }
  out.eq_slope = detail::fit_slope(epses, eqs);
  out.l1_slope = detail::fit_slope(epses, l1s);

  out.checks.push_back({"eq-distance-slope", "relaxation-limit-eq-distance", out.eq_slope, 0.8,
                        out.eq_slope >= 0.8});
  double worst_ratio = 0.0;
  for (std::size_t r = 1; r < out.rows.size(); ++r) {
    const double prev = std::max(out.rows[r - 1].l1_error, 1e-300);
    worst_ratio = std::max(worst_ratio, out.rows[r].l1_error / prev);
  }
  out.checks.push_back({"l1-nonincreasing", "relaxation-limit-l1", worst_ratio, 1.05,
                        worst_ratio <= 1.05});
  double worst_defect_margin = -1e300;
  for (const LadderRow& r : out.rows)
    worst_defect_margin = std::max(worst_defect_margin, r.defect_mass - r.defect_bound);
  out.checks.push_back({"defect-mass-bound", "entropy-defect-mass", worst_defect_margin, 0.0,
                        worst_defect_margin <= 0.0});
  if (ref.kind == "exact-riemann")
    out.checks.push_back({"l1-final", "relaxation-limit-l1", out.rows.back().l1_error,
                          0.05 * u0_l1, out.rows.back().l1_error <= 0.05 * u0_l1});
  out.pass = detail::all_pass(out.checks);

  json rows = json::array();
  for (const LadderRow& r : out.rows) {
    json jr;
    jr["eps"] = r.eps;
    jr["l1_error"] = r.l1_error;
    jr["eq_distance"] = r.eq_distance;
    jr["defect_mass"] = r.defect_mass;
    jr["defect_bound"] = r.defect_bound;
    rows.push_back(std::move(jr));
  }
  out.report["command"] = "converge-eps";
  out.report["config"] = cfg.to_json();
  out.report["rows"] = rows;
  out.report["metrics"] = {{"eq_slope", out.eq_slope},
                           {"l1_slope", out.l1_slope},
                           {"reference", ref.kind}};
  out.report["checks"] = detail::checks_to_json(out.checks);
  out.report["pass"] = out.pass;

  if (!cfg.out_dir.empty()) {
    detail::ensure_dir(cfg.out_dir);
    detail::CsvFile f(cfg.out_dir, "converge_eps.csv",
                      "eps,l1_error,eq_distance,defect_mass,defect_bound");
    for (const LadderRow& r : out.rows)
      f.row({r.eps, r.l1_error, r.eq_distance, r.defect_mass, r.defect_bound});
    detail::write_json(cfg.out_dir, "report.json", out.report);
  }
  return out;
}

struct GridRow {
  int level = 0;
  int n_x = 0;
  int n_xi = 0;
  double dt = 0.0;
  double cauchy = 0.0; // time-averaged L1 distance to the previous level
};

struct GridLadderOutput {
  std::vector<GridRow> rows;
  double rate = 0.0;
  std::vector<CheckResult> checks;
  bool pass = false;
  json report;
};

// Dyadic grid-refinement study at fixed eps: n_x and n_xi double per level and
// dt follows the default policy (proportional to dx once below eps).
// Convergence is measured by Cauchy differences between consecutive levels.
inline GridLadderOutput converge_grid(const ExperimentConfig& cfg_in, int levels) {
  if (levels < 2) throw config_error("converge-grid: need at least 2 levels");
  const Coefficient k = cfg_in.coefficient();
  const VelocityModel vel = cfg_in.velocity();

  auto level_cfg = [&](int lvl) {
    ExperimentConfig rc = cfg_in;
    rc.n_x = cfg_in.n_x << lvl;
    rc.n_xi = cfg_in.n_xi << lvl;
    if (cfg_in.dt > 0.0) rc.dt = cfg_in.dt / static_cast<double>(1 << lvl);
    return rc;
  };

  auto rung = [&](int lvl) {
    ExperimentConfig rc = level_cfg(lvl);
    const Grid g = rc.grid(k, vel);
    Trajectory traj = bgk_run(rc.initial(g), rc.bgk(g), k, vel, rc.snapshots);
    GridRow row;
    row.level = lvl;
    row.n_x = g.n_x;
    row.n_xi = g.n_xi;
    row.dt = g.dt;
    return std::make_pair(row, std::move(traj.us));
  };

  std::vector<std::future<std::pair<GridRow, std::vector<MacroField>>>> jobs;
  for (int lvl = 0; lvl < levels; ++lvl)
    jobs.push_back(std::async(std::launch::async, rung, lvl));

  GridLadderOutput out;
  std::vector<std::vector<MacroField>> solutions;
  for (auto& j : jobs) {
    auto [row, us] = j.get();
    out.rows.push_back(row);
    solutions.push_back(std::move(us));
  }

  std::vector<double> dists;
  for (int lvl = 1; lvl < levels; ++lvl) {
    const Grid& coarse = solutions[static_cast<std::size_t>(lvl - 1)].front().grid;
    std::vector<double> times;
    for (std::size_t s = 0; s < solutions[static_cast<std::size_t>(lvl)].size(); ++s)
      times.push_back(static_cast<double>(s) * cfg_in.t_final / cfg_in.snapshots);
    const std::vector<double> tw = detail::trapezoid_weights(times);
    double d = 0.0;
    for (std::size_t s = 0; s < times.size(); ++s)
      d += tw[s] *
           l1_distance(downsample(solutions[static_cast<std::size_t>(lvl)][s], coarse),
                       solutions[static_cast<std::size_t>(lvl - 1)][s]) /
           cfg_in.t_final;
    out.rows[static_cast<std::size_t>(lvl)].cauchy = d;
    dists.push_back(d);
  }
  out.rows.front().cauchy = std::numeric_limits<double>::quiet_NaN();

  if (dists.size() >= 2) {
    std::vector<double> hs;
    for (int lvl = 1; lvl < levels; ++lvl)
      hs.push_back(1.0 / static_cast<double>(out.rows[static_cast<std::size_t>(lvl)].n_x));
    out.rate = detail::fit_slope(hs, dists);
  }
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < dists.size(); ++i)
    worst_ratio = std::max(worst_ratio, dists[i] / std::max(dists[i - 1], 1e-300));
  const bool have_ratio = dists.size() >= 2;
  out.checks.push_back({"cauchy-decreasing", "grid-self-convergence",
                        have_ratio ? worst_ratio : 0.0, 1.05,
                        !have_ratio || worst_ratio <= 1.05});
  out.pass = detail::all_pass(out.checks);

  json rows = json::array();
  for (const GridRow& r : out.rows) {
    json jr;
    jr["level"] = r.level;
    jr["n_x"] = r.n_x;
    jr["n_xi"] = r.n_xi;
    jr["dt"] = r.dt;
    if (r.level > 0) jr["cauchy_to_prev"] = r.cauchy;
    rows.push_back(std::move(jr));
  }
  out.report["command"] = "converge-grid";
  out.report["config"] = cfg_in.to_json();
  out.report["rows"] = rows;
  out.report["metrics"] = {{"rate", out.rate}};
  out.report["checks"] = detail::checks_to_json(out.checks);
  out.report["pass"] = out.pass;

  if (!cfg_in.out_dir.empty()) {
    detail::ensure_dir(cfg_in.out_dir);
    detail::CsvFile f(cfg_in.out_dir, "converge_grid.csv", "level,n_x,n_xi,dt,cauchy_to_prev");
    for (const GridRow& r : out.rows)
      f.row({static_cast<double>(r.level), static_cast<double>(r.n_x),
             static_cast<double>(r.n_xi), r.dt, r.cauchy});
    detail::write_json(cfg_in.out_dir, "report.json", out.report);
  }
  return out;
}

struct VerifyOutput {
  std::vector<CheckResult> checks;
  bool pass = false;
  json report;
};

namespace detail {

// Integral of a piecewise-constant profile against a smooth function,
// Simpson's rule per plateau (plateaus are O(dx) wide, so the quadrature
// error is far below the duality tolerance).
inline double integrate_pwc_against(const PwcProfile& q,
                                    const std::function<double(double)>& fn) {
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < q.xs.size(); ++p) {
    const double a = q.xs[p], b = q.xs[p + 1];
    s += q.vals[p] * (b - a) / 6.0 * (fn(a) + 4.0 * fn(0.5 * (a + b)) + fn(b));
  }
  return s;
}

inline PwcProfile random_profile(std::mt19937_64& rng, double lo, double hi, double step,
                                 int n_plateaus) {
  const int n_steps = static_cast<int>(std::lround((hi - lo) / step));
  std::vector<int> cuts;
  cuts.push_back(0);
  cuts.push_back(n_steps);
  for (int p = 1; p < n_plateaus; ++p)
    cuts.push_back(1 + static_cast<int>(rng() % static_cast<unsigned long long>(n_steps - 1)));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  PwcProfile q;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    q.xs.push_back(lo + cuts[c] * step);
    q.vals.push_back(rand01(rng));
  }
  q.xs.push_back(lo + cuts.back() * step);
  q.vals.push_back(0.0); // profiles vanish to the right
  return q;
}

} // namespace detail

// Randomized and deterministic invariant checks over a fixed configuration
// matrix.  Every check is seeded from the given seed, so reports are
// reproducible bit for bit.
inline VerifyOutput verify_suite(long long seed, const std::string& out_dir = "") {
  VerifyOutput out;
  const VelocityModel vel = VelocityModel::burgers();
  const std::vector<Coefficient> k_cycle = {
      Coefficient::make(1.0, 1.0), Coefficient::make(1.0, 2.0), Coefficient::make(2.0, 1.0),
      Coefficient::make(0.5, 0.5)};

  auto add = [&](std::string name, std::string anchor, double value, double bound, bool pass) {
    out.checks.push_back({std::move(name), std::move(anchor), value, bound, pass});
  };

  // constant data stays exactly at equilibrium, jump and flow variants
  {
    const Coefficient k = Coefficient::make(1.0, 2.0);
    const Grid g = Grid::make(-1.0, 1.0, 64, 16, default_dt(0.5, Grid::make(-1, 1, 64, 16, 1, 0.25), k, vel), 0.25);
    const MacroField u0 = MacroField::constant(g, 0.4);
    const KineticDensity f0 = KineticDensity::equilibrium(u0);
    Trajectory traj = bgk_run(u0, BgkConfig::make(0.5, Splitting::strang, g.dt, g.t_final), k, vel, 8);
    double worst = 0.0;
    for (const KineticDensity& f : traj.fs) worst = std::max(worst, l1_distance(f, f0));
    add("constant-steady-jump", "wellposed-constant-equilibria", worst, 1e-12, worst <= 1e-12);
  }
  {
    const Coefficient k = k_cycle[0];
    const double dx = 2.0 / 64;
    const Grid g = Grid::make(-1.0, 1.0, 64, 16, 2.0 * dx, 0.25);
    const MacroField u0 = MacroField::constant(g, 0.7);
    const KineticDensity f0 = KineticDensity::equilibrium(u0);
    Trajectory traj = bgk_run(u0, BgkConfig::make(0.05, Splitting::strang, g.dt, g.t_final), k, vel, 8);
    double worst = 0.0;
    for (const KineticDensity& f : traj.fs) worst = std::max(worst, l1_distance(f, f0));
    add("constant-steady-flow", "wellposed-constant-equilibria", worst, 1e-12, worst <= 1e-12);
  }

  // invariant region on a genuinely moving solution
  {
    const Coefficient k = k_cycle[0];
    const double dx = 4.0 / 128;
    const Grid g = Grid::make(-2.0, 2.0, 128, 32, 2.0 * dx, 0.5);
    Trajectory traj = bgk_run(MacroField::riemann(g, 1.0, 0.0),
                              BgkConfig::make(0.02, Splitting::strang, g.dt, g.t_final), k, vel, 8);
    double worst = 0.0;
    for (const KineticDensity& f : traj.fs)
      worst = std::max(worst, detail::max_range_violation(f));
    add("invariant-region", "wellposed-invariant-region", worst, 1e-12, worst <= 1e-12);
  }

  // positive-part contraction over seeded random pairs
  {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed) ^ 0x636f6e74ULL);
    double worst_margin = -1e300;
    for (int p = 0; p < 16; ++p) {
      const Coefficient k = k_cycle[static_cast<std::size_t>(p % 4)];
      const double eps = 0.1, T = 0.2;
      const Grid probe = Grid::make(-1.0, 1.0, 64, 16, 1.0, T);
      const Grid g = Grid::make(-1.0, 1.0, 64, 16, default_dt(eps, probe, k, vel), T);
      const MacroField a0 = detail::random_plateaus(g, rng);
      const MacroField b0 = detail::random_plateaus(g, rng);
      const BgkConfig bc = BgkConfig::make(eps, Splitting::strang, g.dt, T);
      Trajectory ta = bgk_run(a0, bc, k, vel, 4);
      Trajectory tb = bgk_run(b0, bc, k, vel, 4);
      const double m_k = std::max(k.k_left / k.k_right, k.k_right / k.k_left);
      const double lhs = detail::pos_distance(ta.fs.back(), tb.fs.back());
      const double rhs0 = detail::pos_distance(KineticDensity::equilibrium(a0),
                                               KineticDensity::equilibrium(b0));
      worst_margin = std::max(worst_margin, lhs - m_k * rhs0 - 10.0 * (g.dx + g.dt));
    }
    add("contraction-positive-part", "wellposed-contraction", worst_margin, 0.0,
        worst_margin <= 0.0);
  }

  // ordered data stay ordered, pointwise
  {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed) ^ 0x6f726465ULL);
    double worst = 0.0;
    for (int p = 0; p < 8; ++p) {
      const Coefficient k = p % 2 == 0 ? k_cycle[0] : k_cycle[2];
      const double eps = 0.1, T = 0.2;
      const Grid probe = Grid::make(-1.0, 1.0, 64, 16, 1.0, T);
      const Grid g = Grid::make(-1.0, 1.0, 64, 16, default_dt(eps, probe, k, vel), T);
      const MacroField a0 = detail::random_plateaus(g, rng);
      MacroField b0 = a0;
      const double lift = 0.5 * detail::rand01(rng);
      for (double& v : b0.v) v = std::min(1.0, v + lift);
      const BgkConfig bc = BgkConfig::make(eps, Splitting::strang, g.dt, T);
      Trajectory ta = bgk_run(a0, bc, k, vel, 4);
      Trajectory tb = bgk_run(b0, bc, k, vel, 4);
      for (std::size_t s = 0; s < ta.us.size(); ++s)
        for (std::size_t i = 0; i < ta.us[s].v.size(); ++i)
          worst = std::max(worst, ta.us[s].v[i] - tb.us[s].v[i]);
    }
    add("ordered-preserved", "wellposed-comparison", worst, 1e-12, worst <= 1e-12);
  }

  // finite-speed positive-part comparison over a truncated cone
  {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed) ^ 0x636d7073ULL);
    double worst_margin = -1e300;
    for (int p = 0; p < 16; ++p) {
      const Coefficient k = k_cycle[0];
      const double eps = 0.1, T = 0.25;
      const Grid probe = Grid::make(-2.0, 2.0, 64, 16, 1.0, T);
      const Grid g = Grid::make(-2.0, 2.0, 64, 16, default_dt(eps, probe, k, vel), T);
      const MacroField a0 = detail::random_plateaus(g, rng);
      const MacroField b0 = detail::random_plateaus(g, rng);
      const BgkConfig bc = BgkConfig::make(eps, Splitting::strang, g.dt, T);
      Trajectory ta = bgk_run(a0, bc, k, vel, 4);
      Trajectory tb = bgk_run(b0, bc, k, vel, 4);
      const double speed = vel.max_abs_a() * std::max(k.k_left, k.k_right);
      ComparePlusResult cp = compare_plus(ta.times, ta.us, tb.us, 1.25, speed, T);
      worst_margin =
          std::max(worst_margin, cp.lhs - cp.rhs - 10.0 * (g.dx + g.dt + eps));
    }
    add("compare-plus", "wellposed-comparison", worst_margin, 0.0, worst_margin <= 0.0);
  }

  // collision step: distance to equilibrium shrinks by exactly exp(-dt/eps)
  // and the xi-moment is untouched
  {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed) ^ 0x72656c61ULL);
    const Grid g = Grid::make(-1.0, 1.0, 64, 16, 0.1, 1.0);
    const double dt = 0.1, eps = 0.07;
    double worst_dissipation = 0.0, worst_moment = 0.0;
    for (int p = 0; p < 16; ++p) {
      KineticDensity f = KineticDensity::zeros(g);
      for (double& v : f.v) v = detail::rand01(rng);
      KineticDensity r = relax_step(f, dt, eps);
      worst_dissipation =
          std::max(worst_dissipation, std::abs(equilibrium_distance(r) -
                                               std::exp(-dt / eps) * equilibrium_distance(f)));
      for (int i = 0; i < g.n_x; ++i)
        worst_moment = std::max(worst_moment, std::abs(moment(r, i) - moment(f, i)));
    }
    add("collision-dissipation", "wellposed-collision", worst_dissipation, 1e-12,
        worst_dissipation <= 1e-12);
    add("relax-moment-conservation", "wellposed-collision", worst_moment, 1e-14,
        worst_moment <= 1e-14);
  }

  // entropy defect structure on a moving two-wave solution
  {
    const Coefficient k = k_cycle[0];
    const double dx = 4.0 / 128, eps = 0.05;
    const Grid g = Grid::make(-2.0, 2.0, 128, 32, 2.0 * dx, 0.5);
    Trajectory traj = bgk_run(MacroField::riemann(g, 0.8, 0.2),
                              BgkConfig::make(eps, Splitting::strang, g.dt, g.t_final), k, vel, 8);
    DefectMeasure m = defect_measure(traj, eps);
    double mmin = 0.0;
    for (double v : m.cumulative) mmin = std::min(mmin, v);
    const double mass = defect_mass(m);
    const double bound = traj.us.front().l1() + 10.0 * (g.dx + g.dt);
    add("defect-nonneg", "entropy-defect-nonneg", mmin, -1e-9, mmin >= -1e-9);
    add("defect-mass-bound", "entropy-defect-mass", mass, bound, mass <= bound);
  }

  // exact transport conserves mass for piecewise-constant profiles
  {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed) ^ 0x70776d73ULL);
    double worst = 0.0;
    for (int p = 0; p < 16; ++p) {
      const Coefficient k = k_cycle[static_cast<std::size_t>(p % 4)];
      PwcProfile q = detail::random_profile(rng, -2.0, 2.0, 1.0 / 32, 4);
      CharParams cp{k, (detail::rand01(rng) < 0.5 ? -1.0 : 1.0) * (0.25 + detail::rand01(rng))};
      const double tau = 0.1 + 0.4 * detail::rand01(rng);
      PwcProfile r = transport_exact_pwc(q, tau, cp);
      worst = std::max(worst, std::abs(pwc_mass(r) - pwc_mass(q)));
    }
    add("transport-mass-conservation", "transport-mass", worst, 1e-12, worst <= 1e-12);
  }

  // duality: <T_t f, psi> = <f, psi o X_t> for smooth psi
  {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed) ^ 0x6475616cULL);
    const double dx = 1.0 / 32;
    const ScalarFn psi = detail::bump(-1.5, 1.5);
    double lip = 0.0;
    for (int s = 0; s <= 3000; ++s)
      lip = std::max(lip, std::abs(psi.df(-1.5 + 3.0 * s / 3000.0)));
    double worst = 0.0;
    for (int p = 0; p < 8; ++p) {
      const Coefficient k = k_cycle[static_cast<std::size_t>(p % 4)];
      PwcProfile q = detail::random_profile(rng, -2.0, 2.0, dx, 5);
      CharParams cp{k, (p % 2 == 0 ? 1.0 : -1.0) * (0.25 + detail::rand01(rng))};
      const double tau = 0.1 + 0.4 * detail::rand01(rng);
      PwcProfile moved = transport_exact_pwc(q, tau, cp);
      const double lhs = detail::integrate_pwc_against(moved, psi.f);
      PwcProfile split = q;
      detail::pwc_insert(split, 0.0);
      detail::pwc_insert(split, char_backward(0.0, tau, cp)); // forward-image kink preimage
      const double rhs = detail::integrate_pwc_against(
          split, [&](double y) { return psi.f(char_forward(y, tau, cp)); });
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    add("transport-duality", "transport-duality", worst, 5.0 * dx * lip, worst <= 5.0 * dx * lip);
  }

  // characteristic semigroup and inverse identities
  {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed) ^ 0x63686172ULL);
    double worst = 0.0;
    for (int p = 0; p < 4; ++p) {
      const Coefficient k = k_cycle[static_cast<std::size_t>(p)];
      for (int n = 0; n < 1000; ++n) {
        CharParams cp{k, 2.0 * detail::rand01(rng) - 1.0};
        const double x = 8.0 * detail::rand01(rng) - 4.0;
        const double t = detail::rand01(rng), s = detail::rand01(rng);
        const double comp = char_forward(char_forward(x, t, cp), s, cp);
        const double direct = char_forward(x, t + s, cp);
        worst = std::max(worst, std::abs(comp - direct));
        worst = std::max(worst, std::abs(char_backward(char_forward(x, t, cp), t, cp) - x));
      }
    }
    add("characteristics-identities", "characteristics-identities", worst, 1e-12,
        worst <= 1e-12);
  }

  // integral-equation oracle: contraction ratio and agreement with splitting
  {
    const Coefficient k = k_cycle[0];
    const double T = 1.0;
    const Grid g = Grid::make(-2.0, 2.0, 32, 16, 0.125, T);
    const MacroField u0 = MacroField::riemann(g, 0.7, 0.2);
    PicardResult pr = picard_solve(u0, T, 1e-9, k, vel);
    double worst_ratio = 0.0;
    for (double r : pr.ratios) worst_ratio = std::max(worst_ratio, r);
    const double ratio_bound = 1.0 - std::exp(-T) + 0.05;
    add("picard-ratio", "picard-contraction", worst_ratio, ratio_bound,
        worst_ratio <= ratio_bound);
    Trajectory traj = bgk_run(u0, BgkConfig::make(1.0, Splitting::strang, g.dt, T), k, vel, 8);
    const double dist = l1_distance(moments(pr.f), traj.us.back());
    const double bound = 5.0 * (g.dt + g.dx);
    add("picard-vs-split", "picard-contraction", dist, bound, dist <= bound);
  }

  // mutation canary: dropping the Jacobian weight must break mass conservation
  {
    PwcProfile q;
    q.xs = {-1.0, -0.2, 0.5};
    q.vals = {1.0, 0.6, 0.0};
    CharParams cp{Coefficient::make(1.0, 2.0), 1.0};
    TransportOptions sabotage;
    sabotage.unit_jacobian = true;
    PwcProfile r = transport_exact_pwc(q, 0.5, cp, sabotage);
    const double drift = std::abs(pwc_mass(r) - pwc_mass(q));
    add("jacobian-canary", "mutation-canary", drift, 1e-6, drift > 1e-6);
  }

  out.pass = detail::all_pass(out.checks);
  out.report["command"] = "verify";
  out.report["seed"] = seed;
  out.report["checks"] = detail::checks_to_json(out.checks);
  out.report["pass"] = out.pass;
  if (!out_dir.empty()) {
    detail::ensure_dir(out_dir);
    detail::write_json(out_dir, "report.json", out.report);
  }
  return out;
}

} // namespace bgklim
