#pragma once

#include "ks2d/grid.hpp"

namespace ks2d {

/// Discrete Fourier transform of a real field, normalized by 1/n^2 so the
/// zero mode equals the field mean. Plans are cached per grid size and
/// created under a lock; execution is thread-safe.
SpectralCoeffs fft_forward(const ScalarField& f);

/// Inverse transform; imaginary residue of the synthesis is discarded.
ScalarField fft_inverse(const SpectralCoeffs& c);

} // namespace ks2d
