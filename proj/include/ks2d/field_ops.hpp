#pragma once

#include "ks2d/grid.hpp"

#include <utility>

namespace ks2d {

/// Midpoint quadrature h^2 * sum f, compensated summation.
/// Rejects non-finite fields.
double integrate(const ScalarField& f);

/// L^p norm for p in [1, inf]. p = infinity returns max |f|. Large finite p
/// is evaluated in normalized form max * (h^2 sum (|f|/max)^p)^(1/p) so it
/// cannot overflow. p < 1 is rejected ("invalid exponent").
double lp_norm(const ScalarField& f, double p);

/// Spectral gradient (d/dx, d/dy). Nyquist derivative modes are zeroed to
/// keep the result real-valued.
std::pair<ScalarField, ScalarField> gradient(const ScalarField& f);

/// Spectral divergence of a vector field (fx, fy).
ScalarField divergence(const ScalarField& fx, const ScalarField& fy);

/// Spectral Laplacian.
ScalarField laplacian(const ScalarField& f);

/// Exact propagator exp(t(Lap - lambda)) applied spectrally: every mode is
/// multiplied by exp(-t(|k|^2 + lambda)). Requires t >= 0, lambda >= 0.
ScalarField heat_propagate(const ScalarField& f, double t, double lambda = 0.0);

/// Integral of f*g (h^2-weighted dot product).
double inner_product(const ScalarField& f, const ScalarField& g);

/// Compensated (Kahan) sum of a range of doubles.
double kahan_sum(const double* data, std::size_t count);

} // namespace ks2d
