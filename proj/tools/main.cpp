// SPDX-License-Identifier: Apache-2.0

// Command-line harness around the bgklim headers: single experiments,
// eps/grid convergence ladders, the verification suite, and an exact Riemann
// solution sampler.  Exit code 0 means every gated check passed; 2 flags a
// configuration problem; 1 is any runtime or check failure.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bgklim/experiment.hpp"

namespace {

std::vector<double> parse_ladder(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = bgklim::detail::trim(item);
    if (item.empty()) continue;
    out.push_back(bgklim::detail::parse_double("--eps-ladder", item));
  }
  return out;
}

void print_checks(const std::vector<bgklim::CheckResult>& checks) {
  for (const auto& c : checks)
    std::printf("[%s] %-28s value=%.6g bound=%.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.value, c.bound);
}

bgklim::ExperimentConfig load_config(const std::string& path, const std::string& out_dir,
                                     long long seed, bool seed_set) {
  bgklim::ExperimentConfig cfg =
      path.empty() ? bgklim::ExperimentConfig{} : bgklim::ExperimentConfig::from_file(path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed_set) cfg.seed = seed;
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"BGK solver and verification harness for a conservation law with a "
               "discontinuous coefficient"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::string ladder_text = "0.1,0.05,0.025,0.0125";
  long long seed = 1234;
  int levels = 3;
  double u_left = 1.0, u_right = 0.0, k_const = 1.0, range = 2.0;
  int samples = 81;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file, 'key = value' lines");
    cmd->add_option("--out", out_dir, "directory for CSV outputs and report.json");
    cmd->add_option("--seed", seed, "seed for randomized checks");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one BGK experiment against a reference");
  add_common(run_cmd);
  CLI::App* eps_cmd =
      app.add_subcommand("converge-eps", "relaxation ladder at fixed grid, varying eps");
  add_common(eps_cmd);
  eps_cmd->add_option("--eps-ladder", ladder_text, "comma-separated decreasing eps values");
  CLI::App* grid_cmd =
      app.add_subcommand("converge-grid", "dyadic grid refinement at fixed eps");
  add_common(grid_cmd);
  grid_cmd->add_option("--levels", levels, "number of refinement levels");
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the full invariant verification suite");
  add_common(verify_cmd);
  CLI::App* riemann_cmd =
      app.add_subcommand("riemann", "sample the exact Riemann solution u(x/t)");
  riemann_cmd->add_option("--u-left", u_left, "left state in [0,1]");
  riemann_cmd->add_option("--u-right", u_right, "right state in [0,1]");
  riemann_cmd->add_option("--k", k_const, "constant coefficient, k > 0");
  riemann_cmd->add_option("--range", range, "sample x/t in [-range, range]");
  riemann_cmd->add_option("--samples", samples, "number of sample points");
  riemann_cmd->add_option("--config", config_path, "take the velocity model from this config");
  riemann_cmd->add_option("--out", out_dir, "write riemann.csv here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  const bool seed_set = run_cmd->count("--seed") || eps_cmd->count("--seed") ||
                        grid_cmd->count("--seed") || verify_cmd->count("--seed");

  try {
    if (run_cmd->parsed()) {
      bgklim::RunOutput out = run_experiment(load_config(config_path, out_dir, seed, seed_set));
      std::printf("reference=%s dt=%.6g\n", out.ref.kind.c_str(), out.cfg.dt);
      std::printf("l1_error=%.6g eq_distance_mean=%.6g defect_mass=%.6g (bound %.6g)\n",
                  out.l1_error, out.eq_distance_mean, out.defect_total, out.defect_bound);
      print_checks(out.checks);
      std::printf("%s\n", out.pass ? "PASS" : "FAIL");
      return out.pass ? 0 : 1;
    }
    if (eps_cmd->parsed()) {
      bgklim::EpsLadderOutput out =
          converge_eps(load_config(config_path, out_dir, seed, seed_set), parse_ladder(ladder_text));
      std::printf("%-10s %-12s %-12s %-12s\n", "eps", "l1_error", "eq_distance", "defect_mass");
      for (const bgklim::LadderRow& r : out.rows)
        std::printf("%-10.4g %-12.6g %-12.6g %-12.6g\n", r.eps, r.l1_error, r.eq_distance,
                    r.defect_mass);
      std::printf("eq_slope=%.4g l1_slope=%.4g reference=%s\n", out.eq_slope, out.l1_slope,
                  out.reference_kind.c_str());
      print_checks(out.checks);
      std::printf("%s\n", out.pass ? "PASS" : "FAIL");
      return out.pass ? 0 : 1;
    }
    if (grid_cmd->parsed()) {
      bgklim::GridLadderOutput out =
          converge_grid(load_config(config_path, out_dir, seed, seed_set), levels);
      std::printf("%-6s %-8s %-8s %-12s %-12s\n", "level", "n_x", "n_xi", "dt", "cauchy");
      for (const bgklim::GridRow& r : out.rows)
        std::printf("%-6d %-8d %-8d %-12.6g %-12.6g\n", r.level, r.n_x, r.n_xi, r.dt, r.cauchy);
      std::printf("rate=%.4g\n", out.rate);
      print_checks(out.checks);
      std::printf("%s\n", out.pass ? "PASS" : "FAIL");
      return out.pass ? 0 : 1;
    }
    if (verify_cmd->parsed()) {
      long long s = seed_set ? seed : load_config(config_path, "", 0, false).seed;
      bgklim::VerifyOutput out = bgklim::verify_suite(s, out_dir);
      print_checks(out.checks);
      std::printf("%s\n", out.pass ? "PASS" : "FAIL");
      return out.pass ? 0 : 1;
    }
    if (riemann_cmd->parsed()) {
      bgklim::VelocityModel vel = bgklim::VelocityModel::burgers();
      if (!config_path.empty()) {
        bgklim::ExperimentConfig cfg = bgklim::ExperimentConfig::from_file(config_path);
        vel = cfg.velocity();
      }
      if (samples < 2) throw bgklim::config_error("riemann: --samples must be >= 2");
      std::FILE* fp = stdout;
      if (!out_dir.empty()) {
        bgklim::detail::ensure_dir(out_dir);
        const std::string path = out_dir + "/riemann.csv";
        fp = std::fopen(path.c_str(), "w");
        if (!fp) throw bgklim::config_error("riemann: cannot write '" + path + "'");
      }
      std::fprintf(fp, "x_over_t,u\n");
      for (int s = 0; s < samples; ++s) {
        const double xt = -range + 2.0 * range * s / (samples - 1);
        std::fprintf(fp, "%.17g,%.17g\n", xt,
                     bgklim::riemann_exact(u_left, u_right, k_const, vel, xt));
      }
      if (fp != stdout) std::fclose(fp);
      return 0;
    }
  } catch (const bgklim::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const bgklim::hypothesis_error& e) {
    std::fprintf(stderr, "hypothesis error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
