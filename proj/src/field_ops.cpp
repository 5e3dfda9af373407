#include "ks2d/field_ops.hpp"

#include "ks2d/fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ks2d {

double kahan_sum(const double* data, std::size_t count) {
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double y = data[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

namespace {

void require_finite(const ScalarField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite field");
}

} // namespace

double integrate(const ScalarField& f) {
  require_finite(f);
  return f.grid.cell_area() * kahan_sum(f.values.data(), f.values.size());
}

double lp_norm(const ScalarField& f, double p) {
  require_finite(f);
  if (!(p >= 1.0)) throw std::invalid_argument("invalid exponent");
  double amax = 0.0;
  for (double v : f.values) amax = std::max(amax, std::abs(v));
  if (std::isinf(p) || amax == 0.0) return amax;
  if (p == 1.0 || p == 2.0) {
    double sum = 0.0, carry = 0.0;
    for (double v : f.values) {
      const double term = p == 1.0 ? std::abs(v) : v * v;
      const double y = term - carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
    const double integral = f.grid.cell_area() * sum;
    return p == 1.0 ? integral : std::sqrt(integral);
  }
  // Normalized accumulation: every ratio is <= 1, so |f|^p cannot overflow
  // even for p ~ 1e6.
  double sum = 0.0;
  for (double v : f.values) sum += std::pow(std::abs(v) / amax, p);
  return amax * std::pow(f.grid.cell_area() * sum, 1.0 / p);
}

std::pair<ScalarField, ScalarField> gradient(const ScalarField& f) {
  const int n = f.grid.n;
  SpectralCoeffs c = fft_forward(f);
  SpectralCoeffs cx{f.grid, std::vector<std::complex<double>>(f.grid.size())};
  SpectralCoeffs cy{f.grid, std::vector<std::complex<double>>(f.grid.size())};
  for (int my = 0; my < n; ++my) {
    // Nyquist rows/columns carry an ambiguous sign; their derivative is zeroed.
    const double ky = my == n / 2 ? 0.0 : wavenumber(my, f.grid);
    for (int mx = 0; mx < n; ++mx) {
      const double kx = mx == n / 2 ? 0.0 : wavenumber(mx, f.grid);
      const std::complex<double> v = c.at(mx, my);
      const std::complex<double> iv{-v.imag(), v.real()}; // i * v
      cx.at(mx, my) = kx * iv;
      cy.at(mx, my) = ky * iv;
    }
  }
  return {fft_inverse(cx), fft_inverse(cy)};
}

ScalarField divergence(const ScalarField& fx, const ScalarField& fy) {
  require_same_grid(fx.grid, fy.grid);
  const int n = fx.grid.n;
  SpectralCoeffs cx = fft_forward(fx);
  SpectralCoeffs cy = fft_forward(fy);
  SpectralCoeffs d{fx.grid, std::vector<std::complex<double>>(fx.grid.size())};
  for (int my = 0; my < n; ++my) {
    const double ky = my == n / 2 ? 0.0 : wavenumber(my, fx.grid);
    for (int mx = 0; mx < n; ++mx) {
      const double kx = mx == n / 2 ? 0.0 : wavenumber(mx, fx.grid);
      const std::complex<double> vx = cx.at(mx, my);
      const std::complex<double> vy = cy.at(mx, my);
      d.at(mx, my) = {-kx * vx.imag() - ky * vy.imag(), kx * vx.real() + ky * vy.real()};
    }
  }
  return fft_inverse(d);
}

ScalarField laplacian(const ScalarField& f) {
  const int n = f.grid.n;
  SpectralCoeffs c = fft_forward(f);
  for (int my = 0; my < n; ++my) {
    const double ky = wavenumber(my, f.grid);
    for (int mx = 0; mx < n; ++mx) {
      const double kx = wavenumber(mx, f.grid);
      c.at(mx, my) *= -(kx * kx + ky * ky);
    }
  }
  return fft_inverse(c);
}

ScalarField heat_propagate(const ScalarField& f, double t, double lambda) {
  if (t < 0.0) throw std::invalid_argument("negative time");
  if (lambda < 0.0) throw std::invalid_argument("negative lambda");
  const int n = f.grid.n;
  SpectralCoeffs c = fft_forward(f);
  for (int my = 0; my < n; ++my) {
    const double ky = wavenumber(my, f.grid);
    for (int mx = 0; mx < n; ++mx) {
      const double kx = wavenumber(mx, f.grid);
      c.at(mx, my) *= std::exp(-t * (kx * kx + ky * ky + lambda));
    }
  }
  return fft_inverse(c);
}

double inner_product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid, g.grid);
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double y = f.values[i] * g.values[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return f.grid.cell_area() * sum;
}

} // namespace ks2d
