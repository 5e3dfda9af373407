#pragma once

#include "ks2d/picard.hpp"
#include "ks2d/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ks2d {

/// A named, fully validated experiment configuration. Every field has a
/// documented default except mass, which config files must set.
struct Scenario {
  std::string name = "run";
  std::string family = "gaussian"; // or "two_bump"
  double mass = 0.0;
  // Narrow enough that the |x| > L/4 tail clears the solver's confinement
  // precondition on the default box.
  double sigma = 0.5;
  double center_x = 0.0, center_y = 0.0;
  double sep = 3.0; // two_bump: peaks sit at (+-sep/2, 0)
  double v0_mass = 1.0;
  double v0_sigma = 0.0; // 0 -> 2 * sigma
  std::uint64_t seed = 1;

  int n = 256;
  double box = 16.0;
  double lambda = 0.0;
  double dt = 1e-3;
  double t_end = 10.0;
  Scheme scheme = Scheme::etd2;
  Coupling coupling = Coupling::full;
  double tail_threshold = 0.1;
  double tol_neg = 1e-8;
  double sup_threshold = 0.0; // 0 -> auto
  int diag_every = 10;
  int snapshots = 5;
  std::vector<double> radii; // locality monitors, each < box/32

  double picard_T = 1e-2;
  double picard_p = 1.5;

  GridSpec grid() const { return make_grid(n, box); }
  RunConfig run_config() const;
  PicardConfig picard_config() const;
};

/// Mass literal: "critical" is 8 pi, a trailing "pi" multiplies by pi,
/// anything else must parse fully as a number.
double parse_mass(const std::string& token);

/// key = value format, one pair per line, '#' comments. Unknown keys,
/// malformed values, and out-of-range settings are rejected by name.
Scenario parse_config(const std::string& path);

struct InitialData {
  ScalarField u0;
  ScalarField v0;
  double u0_mass = 0.0;
  double v0_mass = 0.0;
  double v0_grad_l2 = 0.0;
};

/// Samples the configured family and rescales so the discrete integrals
/// hit the requested masses exactly (relative 1e-12 or better).
InitialData make_initial_data(const Scenario& sc, const GridSpec& g);

/// Writes diagnostics.csv, u_k.field / v_k.field snapshots, plot-ready
/// slices (t vs the reconstructed free energy, mass, sup), and
/// manifest.json. Returns the written paths. Bytes are deterministic for a
/// fixed scenario except the manifest's timestamp field.
std::vector<std::string> emit_outputs(const Scenario& sc, const InitialData& init,
                                      const RunResult& result, const std::string& out_dir);

struct SweepEntry {
  std::string label; // the mass token as requested
  double mass = 0.0;
  std::string status; // completed | blowup | failed
  double t_star = 0.0;
  double final_sup_u = 0.0;
  double min_fm = 0.0;
  double max_fm_residual = 0.0;
  std::string detail; // detector reason or error message
  std::string out_dir;
};

struct SweepResult {
  std::vector<SweepEntry> entries; // one per requested mass, input order
};

/// Runs the base scenario once per mass token, each entry in its own
/// subdirectory of out_root, up to `workers` in parallel. Failures are
/// recorded per entry, never aborting the sweep. Also writes
/// out_root/sweep.csv, one row per mass.
SweepResult sweep_mass(const Scenario& base, const std::vector<std::string>& mass_tokens,
                       const std::string& out_root, int workers = 1);

} // namespace ks2d
