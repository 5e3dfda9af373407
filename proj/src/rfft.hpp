#pragma once

// Internal real-to-complex transform path used by the time stepper. The
// public API keeps full n x n spectra; the stepper works on the Hermitian
// half-spectrum (n rows by n/2+1 columns) which is ~4x faster at n = 256.

#include <complex>
#include <vector>

namespace ks2d::detail {

/// Half-spectrum size for an n x n real field.
inline std::size_t half_size(int n) { return static_cast<std::size_t>(n) * (n / 2 + 1); }

/// out = FFT(in) / n^2, so out[0] is the field mean.
void rfft_forward(int n, const double* in, std::complex<double>* out);

/// Inverse of rfft_forward (input is copied; FFTW's c2r would destroy it).
void rfft_inverse(int n, const std::complex<double>* in, double* out);

} // namespace ks2d::detail
