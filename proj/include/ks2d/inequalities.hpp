#pragma once

#include "ks2d/cutoff.hpp"
#include "ks2d/grid.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ks2d {

/// One evaluated functional-inequality instance. margin = rhs - lhs, so a
/// nonnegative margin means the bound held for this trial.
struct TrialEntry {
  int trial_id = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  std::string params; // "key=value;key=value" description of the trial
};

/// Aggregate over a trial family for a single inequality. A "true"
/// violation is margin < -1e-12 * (|lhs| + |rhs|); smaller negatives are
/// roundoff. fitted_constant is NaN for bounds with explicit constants.
struct InequalityReport {
  std::string inequality;
  std::vector<TrialEntry> entries;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst_params;
  double fitted_constant = std::numeric_limits<double>::quiet_NaN();
};

/// Reproducible generator of trial fields. Amplitudes above the overflow
/// cap (sup |f| = 500) are rejected at evaluation time.
struct TrialFamily {
  enum class Kind { gaussians, bumps, random_bandlimited, peaked };

  Kind kind = Kind::gaussians;
  int count = 16;
  std::uint64_t seed = 1;
  double max_amplitude = 2.5; // upper end of the sampled amplitude range
};

/// Sampled trial fields. gaussians/bumps/random_bandlimited are smooth and
/// nonnegative; peaked are radial log-profile cones vanishing on and
/// outside the circle of the given radius (their natural habitat is the
/// exponential-integrability check, where they are near-extremal).
std::vector<ScalarField> make_trials(const TrialFamily& fam, const GridSpec& g,
                                     double disk_radius);

/// Exponential integrability on a disk: integral of exp|f| over the disk
/// against c * |D| * exp(exponent_scale * ||grad f||^2 / (16 pi)). The trial
/// must vanish outside the disk and satisfy sup |f| <= 500. Setting
/// exponent_scale below 1 strengthens the claimed bound; concentrating
/// trials are expected to break it there, which is the sharpness probe.
TrialEntry tm_entry(const ScalarField& f, double disk_radius, double c_tm,
                    double exponent_scale = 1.0);

/// Entropy duality bound: integral of g*h against
/// integral g ln g + M ln(integral e^h) - M ln M with M = integral g.
/// Requires g >= 0 with positive mass. Equality holds when e^h is
/// proportional to g; the discrete form is exact (finite-dimensional
/// convex duality), so margins are roundoff-limited.
TrialEntry nss_entry(const ScalarField& g_field, const ScalarField& h_field);

/// Weighted square bound with explicit constants: for weight profile phi,
///   int f^2 phi <= 2 (int_{|f|>1, supp phi} |f|) (int_{|f|>1} |grad f|^2/(1+|f|) phi)
///                + 4 (int |f| |grad sqrt(phi)|)^2 + 4 int |f| phi.
TrialEntry l2_weighted_entry(const ScalarField& f, const CutoffSpec& phi);

/// Terms of the weighted cube bound
///   int f^3 phi <= eps * A + C * B + C_eps * D,
/// A = (int_{supp phi} (1+|f|)ln(1+|f|)) * (int |grad f|^2 phi),
/// B = (int |f|^{3/2} |grad sqrt(phi)|)^2, D = int |f| phi.
/// C and C_eps are fitted over a family, so evaluation is split in two.
struct CubeBoundTerms {
  double lhs = 0.0;
  double entropy_dirichlet = 0.0; // A
  double boundary_sq = 0.0;       // B
  double mass_term = 0.0;         // D
  std::string params;
};
CubeBoundTerms l3_weighted_terms(const ScalarField& f, const CutoffSpec& phi);

/// Smoothing decay of the diffusion semigroup: records
///   sup over t_grid of ||D^a e^{t Lap} f||_p * t^{(1/q-1/p)+a/2} / ||f||_q
/// as lhs (a = alpha_order in {0,1}). When c_ref > 0 it is the claimed
/// constant (rhs); otherwise rhs is left for a family fit. Requires
/// 1 <= q <= p <= infinity.
TrialEntry heat_lplq_entry(const ScalarField& f, double p, double q,
                           int alpha_order, const std::vector<double>& t_grid,
                           double c_ref = 0.0);

/// Interpolation bounds ||f||_4^2 <= C ||f||_2 ||grad f||_2 and
/// ||f||_3^3 <= C ||f||_1 ||grad f||_2^2; returns {lhs, structure} pairs so
/// the caller can fit C over a family. Constant fields are degenerate
/// (zero structure) and rejected.
struct InterpolationTerms {
  double quartic_lhs = 0.0;
  double quartic_structure = 0.0;
  double cubic_lhs = 0.0;
  double cubic_structure = 0.0;
  std::string params;
};
InterpolationTerms gn_terms(const ScalarField& f);

/// Full oracle pass: every inequality evaluated over seeded families.
/// family selects a single trial kind or "all" (the mixture; the
/// concentrating kind is always included in the exponential check so the
/// sharpness probe has teeth).
struct OracleConfig {
  GridSpec grid;
  int trials = 64; // per inequality
  std::uint64_t seed = 1;
  std::string family = "all";
  double disk_radius = 0.0; // 0 -> 3L/8
  double ext_radius = 0.0;  // 0 -> L/12
  double int_radius = 0.0;  // 0 -> L/36
  // small enough that the fitted companion constant is forced positive,
  // making its growth visible as eps shrinks
  std::vector<double> eps_values{0.001, 0.01, 0.1, 1.0};
  // Empty -> {t0, 2 t0, 4 t0, 8 t0} with t0 chosen so the discrete heat
  // kernel is positive to roundoff (its truncated spectrum rings negative
  // for t below ~40/kmax^2, which would fake contraction failures).
  std::vector<double> t_grid;
};

std::vector<InequalityReport> run_inequality_suite(const OracleConfig& cfg);

/// CSV rows "inequality,trial_id,lhs,rhs,margin,params", 17 significant
/// digits, deterministic for a fixed config and seed.
void write_inequality_csv(const std::string& path,
                          const std::vector<InequalityReport>& reports);

} // namespace ks2d
