#pragma once

#include "ks2d/cutoff.hpp"
#include "ks2d/state.hpp"

#include <string>
#include <vector>

namespace ks2d {

/// Locality monitors attached to one cutoff radius R.
struct RadiusMonitors {
  double radius = 0.0;
  double ext_mass_ind = 0.0; // integral of u over |x| > R
  double ext_mass_phi = 0.0; // integral of u * phi_{R/2}
  double ext_entropy = 0.0;  // integral of (1+u)ln(1+u) over |x| > 2R
  double ext_l2 = 0.0;       // L^2 norm of u over |x| > 4R
  double ext_lp = 0.0;       // L^p norm of u over |x| > 8R (p from config)
  double int_lr = 0.0;       // cut-off Lyapunov functional L_R
  double int_entropy = 0.0;  // integral of u ln u * psi_R^2
  double int_diss = 0.0;     // dissipation of the L_R identity
  double int_rhs = 0.0;      // boundary terms of the L_R identity
};

/// One diagnostics record. Column order of the CSV matches declaration
/// order; per-radius blocks follow the scalars.
struct DiagnosticsRow {
  double t = 0.0;
  double mass_u = 0.0;
  double int_v = 0.0;
  double u_l2 = 0.0;
  double u_l3 = 0.0;
  double u_sup = 0.0;
  double grad_v_l2 = 0.0;
  double v_l2 = 0.0;
  double entropy_mod = 0.0; // integral of (1+u)ln(1+u)
  double entropy_int = 0.0; // integral of ln(1+u)
  double lyap_l = 0.0;
  double lyap_lm = 0.0;
  double f_m = 0.0;
  double d_tilde = 0.0;
  double fm_rhs = 0.0;      // right-hand side of the F_m balance
  double fm_residual = 0.0; // centered-difference residual, filled post-run
  double min_u = 0.0;
  double neg_mass = 0.0; // integral of |min(u, 0)|
  std::vector<RadiusMonitors> radii;
};

/// Free-energy style functionals. Entropy terms evaluate u through
/// max(u, 0); x ln x is continued by 0 at x = 0. The v-terms use the raw
/// field.
double lyapunov_l(const SimState& s, double lambda);
double lyapunov_lm(const SimState& s, double lambda);
double functional_fm(const SimState& s, double lambda);

/// Time derivative of v as dictated by the active coupling mode (spectral
/// evaluation; diagnostics never difference v in time).
ScalarField dtv_field(const SimState& s, double lambda, Coupling coupling);

/// Dissipation of the F_m balance: integral of u |grad(ln(1+u) - v)|^2 plus
/// ||dt v||_2^2. Nonnegative by construction.
double dissipation_dtilde(const SimState& s, double lambda, Coupling coupling);

/// Right-hand side of the F_m balance for the active coupling mode.
double fm_identity_rhs(const SimState& s, double lambda, Coupling coupling);

/// Complete diagnostics record for a state (fm_residual left at 0).
DiagnosticsRow compute_row(const SimState& s, const RunConfig& cfg);

/// Fills fm_residual by centered differences over equally spaced rows.
/// Boundary rows copy their interior neighbor. Requires >= 3 rows
/// ("insufficient rows") with uniform spacing.
void fill_fm_residuals(std::vector<DiagnosticsRow>& rows);

/// Normalized residual of the F_m balance in the 3-row window centered at
/// index k: |d/dt F_m + D~ - rhs| / (|D~| + |rhs| + 1e-300).
double fm_identity_residual(const std::vector<DiagnosticsRow>& rows, std::size_t k);

struct MonotonicityReport {
  int violations = 0;
  double max_excess = 0.0; // worst violation beyond the slack, in F_m units
  double slack = 0.0;      // allowed per-interval increase
  double bound_rate = 0.0; // admissible slope for lambda > 0 (0 otherwise)
};

/// Checks the expected F_m trend: non-increasing for lambda = 0, slope
/// bounded by (mass_u + int_v at t = 0) for lambda > 0. Slack is
/// 10 x the largest measured identity residual, converted to F_m units.
MonotonicityReport fm_monotonicity_check(const std::vector<DiagnosticsRow>& rows, double lambda);

struct ExteriorMass {
  double indicator = 0.0; // integral of u over |x| > R
  double weighted = 0.0;  // integral of u * phi_{R/2}
};

/// Requires R < L/4 so phi_{R/2} fits the box ("R too large for the box").
ExteriorMass exterior_mass(const ScalarField& u, double R);

/// Heavier exterior smoothness monitors at radius R.
struct ExteriorNorms {
  double grad_v_phi4_sup = 0.0; // sup |grad(v * phi_{4R})|
  double u_phi8_sup = 0.0;      // sup |u * phi_{8R}|
  double grad_u_phi8_l2 = 0.0;  // ||grad(u * phi_{8R})||_2
  double lap_u_phi8_l2 = 0.0;   // ||lap(u * phi_{8R})||_2
  double lap_v_phi8_l2 = 0.0;   // ||lap(v * phi_{8R})||_2
};
ExteriorNorms exterior_norms(const SimState& s, double R);

/// Cut-off Lyapunov functional L_R with weight psi_R^2.
double interior_lyapunov_lr(const SimState& s, double lambda, const CutoffSpec& psi);

/// Interior entropy: integral of u ln u * psi_R^2.
double interior_entropy(const ScalarField& u, const CutoffSpec& psi);

struct LocalMin {
  double cx = 0.0;
  double cy = 0.0;
  double value = 0.0; // min of u over the winning disk
};

/// Scans disks of radius disk_radius centered on a ring of radius
/// ring_radius (n_angles candidates) and returns the disk whose minimum is
/// largest: a floor witness for u away from the origin. Rejects disks
/// smaller than one cell ("empty disk").
LocalMin local_min_u(const ScalarField& u, double ring_radius, double disk_radius, int n_angles = 16);

/// CSV with 17 significant digits, fixed column order, one row per record.
void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows);

} // namespace ks2d
