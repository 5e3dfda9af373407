#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ks2d {

/// Uniform periodic grid on the square [-L/2, L/2)^2.
///
/// n is a power of two so that spacing() * n reproduces box_length exactly
/// in floating point (division by a power of two only shifts the exponent).
struct GridSpec {
  int n = 0;             // points per dimension
  double box_length = 0; // L

  double spacing() const { return box_length / n; }
  double cell_area() const { return spacing() * spacing(); }
  /// Physical coordinate of sample i along either axis.
  double coord(int i) const { return -0.5 * box_length + i * spacing(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }

  bool operator==(const GridSpec&) const = default;
};

/// Validates n (power of two, >= 8) and box_length (> 0).
GridSpec make_grid(int n, double box_length);

/// Real scalar field sampled at cell centers, row-major: values[iy*n + ix].
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.n + ix]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.n + ix]; }
};

ScalarField zeros(const GridSpec& g);

/// Samples f(x, y) at every cell center.
template <typename F>
ScalarField sample(const GridSpec& g, F&& f) {
  ScalarField out{g, std::vector<double>(g.size())};
  for (int iy = 0; iy < g.n; ++iy) {
    const double y = g.coord(iy);
    for (int ix = 0; ix < g.n; ++ix) out.values[static_cast<std::size_t>(iy) * g.n + ix] = f(g.coord(ix), y);
  }
  return out;
}

/// Fourier coefficients c_k with f(x) = sum_k c_k exp(i k.x).
///
/// Layout mirrors the FFT: modes[my*n + mx] where index m maps to the signed
/// frequency m (m <= n/2) or m - n (m > n/2), and k = 2*pi*m_signed / L.
/// With this normalization modes[0] is the mean of f, i.e. (1/L^2) * integral
/// of f, and ||f||_2^2 = L^2 * sum |c_k|^2.
struct SpectralCoeffs {
  GridSpec grid;
  std::vector<std::complex<double>> modes;

  std::complex<double>& at(int mx, int my) {
    return modes[static_cast<std::size_t>(my) * grid.n + mx];
  }
  std::complex<double> at(int mx, int my) const {
    return modes[static_cast<std::size_t>(my) * grid.n + mx];
  }
};

/// Signed frequency index for storage index m on an n-point grid.
inline int signed_index(int m, int n) { return m <= n / 2 ? m : m - n; }

/// Angular wavenumber of storage index m: 2*pi*signed(m)/L.
double wavenumber(int m, const GridSpec& g);

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw std::invalid_argument("incompatible grids");
}

} // namespace ks2d
