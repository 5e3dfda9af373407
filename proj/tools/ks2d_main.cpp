// Command-line surface. Exit codes for `run`: 0 the horizon was reached,
// 2 blowup was detected, 1 anything else went wrong.

#include "ks2d/experiment.hpp"
#include "ks2d/inequalities.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace {

using namespace ks2d;

int workers_from_env() {
  const char* raw = std::getenv("KS2D_WORKERS");
  if (!raw) return 1;
  const int w = std::atoi(raw);
  return w >= 1 ? w : 1;
}

int cmd_run(const std::string& config, const std::string& out_dir) {
  const Scenario sc = parse_config(config);
  const GridSpec g = sc.grid();
  const InitialData init = make_initial_data(sc, g);
  const RunResult res = run(init.u0, init.v0, sc.run_config());
  emit_outputs(sc, init, res, out_dir);

  std::printf("%s: grid %dx%d, mass %.6g\n", sc.name.c_str(), sc.n, sc.n, init.u0_mass);
  if (res.status == RunStatus::completed) {
    std::printf("completed to t = %.6g, sup u = %.6g, mass drift %.3g\n", res.t_final,
                res.rows.empty() ? 0.0 : res.rows.back().u_sup, res.max_mass_drift_rel);
  } else {
    std::printf("%s at t* = %.6g (last accepted t = %.6g)\n  %s\n",
                res.status == RunStatus::blown_up ? "blowup" : "failed", res.t_star,
                res.t_final, res.reason.c_str());
  }
  std::printf("outputs in %s\n", out_dir.c_str());
  return res.status == RunStatus::completed ? 0 : res.status == RunStatus::blown_up ? 2 : 1;
}

int cmd_sweep(const std::string& config, const std::string& masses,
              const std::string& out_dir) {
  const Scenario base = parse_config(config);
  std::vector<std::string> tokens;
  {
    std::string tok;
    for (char c : masses + ",") {
      if (c == ',') {
        if (!tok.empty()) tokens.push_back(tok);
        tok.clear();
      } else if (c != ' ') {
        tok += c;
      }
    }
  }
  const SweepResult sweep = sweep_mass(base, tokens, out_dir, workers_from_env());
  bool any_failed = false;
  for (const SweepEntry& e : sweep.entries) {
    if (e.status == "blowup")
      std::printf("%-10s %-10s t* = %-10.6g sup u = %.6g\n", e.label.c_str(),
                  e.status.c_str(), e.t_star, e.final_sup_u);
    else
      std::printf("%-10s %-10s sup u = %-10.6g min free energy = %.6g\n", e.label.c_str(),
                  e.status.c_str(), e.final_sup_u, e.min_fm);
    if (e.status == "failed") {
      any_failed = true;
      std::printf("           %s\n", e.detail.c_str());
    }
  }
  std::printf("sweep table: %s/sweep.csv\n", out_dir.c_str());
  return any_failed ? 1 : 0;
}

int cmd_verify(const std::string& family, int trials, std::uint64_t seed,
               const std::string& out, int n, double box) {
  OracleConfig cfg;
  cfg.grid = make_grid(n, box);
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.family = family;
  const auto reports = run_inequality_suite(cfg);

  bool clean = true;
  bool sharpness_seen = false, sharpness_bites = false;
  std::printf("%-24s %7s %6s %13s %12s\n", "inequality", "trials", "viol", "worst_margin",
              "fitted");
  for (const InequalityReport& rep : reports) {
    std::printf("%-24s %7zu %6d %13.5g %12.6g\n", rep.inequality.c_str(),
                rep.entries.size(), rep.violations, rep.worst_margin, rep.fitted_constant);
    if (rep.inequality == "exp-disk-sharpness") {
      sharpness_seen = true;
      sharpness_bites = rep.violations >= 1;
    } else if (rep.violations != 0) {
      clean = false;
    }
  }
  if (!out.empty()) {
    write_inequality_csv(out, reports);
    std::printf("per-trial table: %s\n", out.c_str());
  }
  if (sharpness_seen)
    std::printf("sharpness probe %s\n", sharpness_bites ? "violates as expected"
                                                        : "FAILED TO VIOLATE");
  return clean && (!sharpness_seen || sharpness_bites) ? 0 : 1;
}

int cmd_local_existence(const std::string& config) {
  const Scenario sc = parse_config(config);
  const GridSpec g = sc.grid();
  const InitialData init = make_initial_data(sc, g);
  const PicardConfig pcfg = sc.picard_config();
  try {
    const auto [state, report] = picard_solve(init.u0, init.v0, pcfg);
    std::printf("%s: fixed-point iteration on [0, %.6g], p = %.6g\n", sc.name.c_str(),
                pcfg.T, pcfg.p);
    for (std::size_t k = 0; k < report.distances.size(); ++k) {
      if (k == 0)
        std::printf("iter %2zu: distance %.6e\n", k + 1, report.distances[k]);
      else
        std::printf("iter %2zu: distance %.6e  ratio %.4f\n", k + 1, report.distances[k],
                    report.ratios[k - 1]);
    }
    std::printf("%s after %d iterations\n",
                report.converged ? "converged" : "NOT converged", report.iterations);
    std::printf("weighted norms: density %.6e, chemical gradient %.6e\n",
                report.u_weighted, report.gradv_weighted);
    std::printf("state advanced to t = %.6g\n", state.t);
    return report.converged ? 0 : 1;
  } catch (const std::exception& e) {
    std::printf("local existence failed: %s\n", e.what());
    return 1;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pseudo-spectral simulator and verification laboratory for a planar "
      "chemotaxis system with a critical total mass"};
  app.require_subcommand(1);

  std::string config, out_dir, masses;
  std::string family = "all", csv_out;
  int trials = 64, n = 128;
  double box = 16.0;
  std::uint64_t seed = 1;

  CLI::App* c_run = app.add_subcommand("run", "integrate one configured scenario");
  c_run->add_option("--config", config, "key = value scenario file")->required();
  c_run->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* c_sweep =
      app.add_subcommand("sweep-mass", "rerun one scenario across a list of masses");
  c_sweep->add_option("--config", config, "base scenario file")->required();
  c_sweep->add_option("--masses", masses, "comma list, e.g. \"4pi,8pi,12pi\"")->required();
  c_sweep->add_option("--out-dir", out_dir, "output root (one subdirectory per mass)")
      ->required();

  CLI::App* c_verify = app.add_subcommand(
      "verify-inequalities", "evaluate the functional-inequality oracle on trial families");
  c_verify->add_option("--family", family,
                       "gaussians|bumps|random_bandlimited|peaked|all (default all)");
  c_verify->add_option("--trials", trials, "trials per inequality (default 64)");
  c_verify->add_option("--seed", seed, "family seed (default 1)");
  c_verify->add_option("--out", csv_out, "per-trial CSV path");
  c_verify->add_option("--n", n, "grid points per side (default 128)");
  c_verify->add_option("--box", box, "box side length (default 16)");

  CLI::App* c_local = app.add_subcommand(
      "local-existence", "run the fixed-point harness and print its contraction report");
  c_local->add_option("--config", config, "scenario file (picard_T, picard_p set the horizon)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_run->parsed()) return cmd_run(config, out_dir);
    if (c_sweep->parsed()) return cmd_sweep(config, masses, out_dir);
    if (c_verify->parsed()) return cmd_verify(family, trials, seed, csv_out, n, box);
    if (c_local->parsed()) return cmd_local_existence(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
