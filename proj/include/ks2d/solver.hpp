#pragma once

#include "ks2d/diagnostics.hpp"
#include "ks2d/state.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ks2d {

/// Thrown by duhamel_step when the stepped state trips the blowup detector.
struct BlowupDetected : std::runtime_error {
  double t_star;
  BlowupDetected(const std::string& what, double t) : std::runtime_error(what), t_star(t) {}
};

/// Thrown by duhamel_step when negativity of u exceeds the tolerance.
struct ResolutionFailure : std::runtime_error {
  double t_fail;
  ResolutionFailure(const std::string& what, double t) : std::runtime_error(what), t_fail(t) {}
};

/// Chemical rate of change Delta v - lambda v + u, evaluated spectrally.
ScalarField rhs_v(const SimState& s, double lambda);

struct BlowupCheck {
  bool fired = false;
  std::string reason;
  double sup_u = 0.0;
  double tail_fraction = 0.0;
};

/// Detector for loss of the solution: sup-norm escape
/// (||u||_inf > threshold) or unresolved concentration (fraction of the
/// spectral energy of u in the top third of the active band above the tail
/// threshold). cfg.blowup_sup_threshold must be resolved (> 0) by the
/// caller; run() substitutes 1e4 * max(u0) for the auto setting.
BlowupCheck blowup_check(const SimState& s, const RunConfig& cfg);

/// One exponential-integrator step of the mild formulation (ETD1 or the
/// ETD2 predictor-corrector per cfg.scheme). dt may undershoot cfg.dt (the
/// final partial step) but never exceed it. Throws BlowupDetected /
/// ResolutionFailure per the detectors.
SimState duhamel_step(const SimState& s, double dt, const RunConfig& cfg);

struct RunResult {
  RunStatus status = RunStatus::completed;
  double t_final = 0.0;        // last accepted time (or t_end)
  double t_star = 0.0;         // detection time for blown_up/failed
  std::string reason;          // empty when completed
  std::vector<SimState> snapshots;
  std::vector<DiagnosticsRow> rows;
  double max_mass_drift_rel = 0.0; // across diagnostic rows
};

/// Integrates the system from (u0, v0) to cfg.t_end, recording diagnostics
/// every cfg.diag_every steps and cfg.snapshot_count evenly spaced states.
/// Blowup is a regular outcome (status blown_up, t_star = midpoint of the
/// last accepted and the tripped step), not an error.
RunResult run(const ScalarField& u0, const ScalarField& v0, const RunConfig& cfg);

} // namespace ks2d
