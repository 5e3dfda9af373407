#pragma once

// Self-contained reference quadratures used by the tests to pin expected
// values independently of the library's grid operators.

#include <cmath>
#include <functional>

namespace oracle {

/// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Integral over the plane of a radial profile F(r): 2*pi * int_0^rmax r F(r) dr.
inline double radial_integral(const std::function<double(double)>& profile, double rmax,
                              int intervals = 1 << 20) {
  auto integrand = [&](double r) { return r * profile(r); };
  return 2.0 * M_PI * simpson(integrand, 0.0, rmax, intervals);
}

/// Heat kernel (4*pi*t)^(-1) exp(-r^2/(4t)).
inline double heat_kernel(double r, double t) {
  return std::exp(-r * r / (4.0 * t)) / (4.0 * M_PI * t);
}

} // namespace oracle
