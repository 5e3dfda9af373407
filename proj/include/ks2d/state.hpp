#pragma once

#include "ks2d/grid.hpp"

#include <vector>

namespace ks2d {

enum class Scheme { etd1, etd2 };

/// Coupling variants. `full` is the real model. `no_flux` freezes the
/// chemotactic flux so u follows pure heat flow while v is still sourced by
/// u. `decoupled` silences the source as well; both fields relax
/// independently. The reduced modes exist for verification runs only.
enum class Coupling { full, no_flux, decoupled };

enum class RunStatus { completed, blown_up, failed };

/// Instantaneous solver state (physical space samples of u and v).
struct SimState {
  double t = 0.0;
  ScalarField u;
  ScalarField v;
};

struct RunConfig {
  GridSpec grid;
  double lambda = 0.0;
  double dt = 1e-3;
  double t_end = 10.0;
  Scheme scheme = Scheme::etd2;
  Coupling coupling = Coupling::full;
  bool dealias = true; // 2/3-rule mask on the quadratic flux

  /// Sup-norm detector. Non-positive means "auto": run() resolves it to
  /// 1e4 * max(u0) before stepping.
  double blowup_sup_threshold = 0.0;
  /// Fraction of spectral energy of u allowed in the top third of the
  /// active (non-dealiased) band before the run is declared unresolved.
  double blowup_tail_threshold = 0.1;
  /// Permitted negativity of u relative to max(u); beyond this the step is
  /// a resolution failure.
  double tol_neg_rel = 1e-8;

  int diag_every = 10;    // diagnostics row cadence, in steps
  int snapshot_count = 5; // evenly spaced states kept in the result
  std::vector<double> diag_radii; // cutoff radii for locality monitors
  double exterior_p = 3.0;        // exponent of the exterior L^p monitor
};

} // namespace ks2d
