#pragma once

#include "ks2d/state.hpp"

#include <utility>
#include <vector>

namespace ks2d {

/// Configuration of the fixed-point harness for the integral (mild)
/// formulation on a short horizon [0, T].
struct PicardConfig {
  /// Cell-density exponent; the chemical gradient is measured in the dual
  /// exponent q = p/(p-1). Admissible range is (4/3, 2).
  double p = 1.5;
  double q() const { return p / (p - 1.0); }

  double T = 1e-2;     // trial horizon
  double lambda = 0.0; // decay rate of the chemical
  Coupling coupling = Coupling::full;

  int max_iter = 12;
  double tol = 1e-10; // stop when the iterate distance falls below this

  /// Duhamel integrals run on log-spaced nodes with trapezoid weights in
  /// log-time: the integrands behave like small negative powers of s near
  /// 0, which uniform nodes undersample.
  int quad_nodes = 64;
  double s_min_frac = 1e-4; // first nonzero node at T * s_min_frac

  /// Times at which the weighted sup norms (and iterate distances) are
  /// evaluated. Empty means: every other quadrature node.
  std::vector<double> sample_times;
};

/// Weighted sup norms of a trajectory: sup t^{1-1/p} ||u(t)||_p and
/// sup t^{1/2-1/q} ||grad v(t)||_q over the sample times.
struct XtNorms {
  double u_weighted = 0.0;
  double gradv_weighted = 0.0;
  double total() const { return u_weighted + gradv_weighted; }
};

/// Evaluates XtNorms on states matching sample_times (each sample time must
/// equal the t of some trajectory state). Throws "empty trajectory" /
/// "trajectory does not cover sample times".
XtNorms weighted_xt_norms(const std::vector<SimState>& traj, double p,
                          const std::vector<double>& sample_times);

/// count log-spaced times in (0, T], the smallest at T * min_frac.
std::vector<double> log_spaced_times(double T, int count, double min_frac);

struct PicardReport {
  std::vector<double> distances; // d_k between consecutive iterates
  std::vector<double> ratios;    // d_{k+1} / d_k
  double u_weighted = 0.0;       // weighted sup norms of the final iterate
  double gradv_weighted = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Iterates the integral-formulation map from the free-evolution seed
/// (heat flow of u0, damped heat flow of v0) until the weighted iterate
/// distance drops below tol or max_iter is reached. Returns the final
/// iterate at t = T plus the iteration record. Throws
/// "no contraction at this T" after three consecutive expanding ratios.
std::pair<SimState, PicardReport> picard_solve(const ScalarField& u0, const ScalarField& v0,
                                               const PicardConfig& pcfg);

/// Continuous-dependence probe: advances (u0, v0) and (u0+du, v0+dv) with
/// the time stepper to pcfg.T and returns
///   sup_t ||u - u~||_1 / (||du||_1 + ||grad dv||_2).
/// Requires ||du||_1 <= 0.01 ||u0||_1. Throws if either run fails.
double continuous_dependence_probe(const ScalarField& u0, const ScalarField& v0,
                                   const ScalarField& du, const ScalarField& dv,
                                   const PicardConfig& pcfg);

} // namespace ks2d
