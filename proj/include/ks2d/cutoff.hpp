#pragma once

#include "ks2d/grid.hpp"

namespace ks2d {

/// Smooth radial cutoff built from the bump-quotient transition
///   S(s) = B(s) / (B(s) + B(1-s)),  B(s) = exp(-1/s) for s > 0.
///
/// cutoff_value(s) is 0 for s <= 1, 1 for s >= 2 and climbs smoothly in
/// between; all derivatives vanish at both ends.
double cutoff_value(double s);
/// d/ds of cutoff_value (analytic form of the quotient derivative).
double cutoff_deriv(double s);

struct CutoffSpec {
  enum class Kind { exterior, interior };

  Kind kind = Kind::exterior;
  double radius = 0.0; // R
  GridSpec grid;
  ScalarField profile; // sampled phi_R (exterior) or psi_R = 1 - phi_{8R}

  /// Transition-profile constants measured once per profile:
  ///   |grad phi_R| <= grad_const * phi_{R/2} / R
  ///   |lap  phi_R| <= lap_const  * phi_{R/2} / R^2
  /// (phi_{R/2} is identically 1 on the support of grad phi_R, which is what
  /// makes the bounds usable.)
  double grad_const = 0.0;
  double lap_const = 0.0;
};

/// phi_R: vanishes for |x| < R, equals 1 for |x| > 2R. Requires 2R < L/2.
CutoffSpec make_exterior_cutoff(const GridSpec& g, double R);

/// psi_R = 1 - phi_{8R}: equals 1 for |x| < 8R, vanishes for |x| > 16R.
/// Requires 16R < L/2.
CutoffSpec make_interior_cutoff(const GridSpec& g, double R);

} // namespace ks2d
