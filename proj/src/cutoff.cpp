#include "ks2d/cutoff.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace ks2d {
namespace {

double bump(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double bump_deriv(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }

struct ProfileConstants {
  double grad_const;
  double lap_const;
};

// max |phi'(s)| and max |phi''(s) + phi'(s)/s| over the transition band,
// measured once on a fine 1D scan. phi'' comes from central differences of
// the analytic phi'.
ProfileConstants measure_profile_constants() {
  const int samples = 200000;
  const double ds = 1.0 / samples;
  double cg = 0.0, cl = 0.0;
  for (int i = 1; i < samples; ++i) {
    const double s = 1.0 + i * ds;
    const double d1 = cutoff_deriv(s);
    const double d2 = (cutoff_deriv(s + ds) - cutoff_deriv(s - ds)) / (2.0 * ds);
    cg = std::max(cg, std::abs(d1));
    cl = std::max(cl, std::abs(d2 + d1 / s));
  }
  return {cg, cl};
}

const ProfileConstants& profile_constants() {
  static ProfileConstants c = measure_profile_constants();
  return c;
}

} // namespace

double cutoff_value(double s) {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  const double a = bump(s - 1.0);
  const double b = bump(2.0 - s);
  return a / (a + b);
}

double cutoff_deriv(double s) {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double a = bump(s - 1.0);
  const double b = bump(2.0 - s);
  const double da = bump_deriv(s - 1.0);
  const double db = -bump_deriv(2.0 - s);
  const double denom = a + b;
  return (da * denom - a * (da + db)) / (denom * denom);
}

CutoffSpec make_exterior_cutoff(const GridSpec& g, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("cutoff radius must be positive");
  if (2.0 * R >= 0.5 * g.box_length) throw std::invalid_argument("cutoff radius too large for the box");
  CutoffSpec spec;
  spec.kind = CutoffSpec::Kind::exterior;
  spec.radius = R;
  spec.grid = g;
  spec.profile = sample(g, [R](double x, double y) { return cutoff_value(std::hypot(x, y) / R); });
  const ProfileConstants& c = profile_constants();
  spec.grad_const = c.grad_const;
  spec.lap_const = c.lap_const;
  return spec;
}

CutoffSpec make_interior_cutoff(const GridSpec& g, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("cutoff radius must be positive");
  if (16.0 * R >= 0.5 * g.box_length) throw std::invalid_argument("cutoff radius too large for the box");
  CutoffSpec spec;
  spec.kind = CutoffSpec::Kind::interior;
  spec.radius = R;
  spec.grid = g;
  // Sampled as 1 - phi_{8R} so the partition with the matching exterior
  // cutoff is exact to rounding.
  spec.profile = sample(g, [R](double x, double y) { return 1.0 - cutoff_value(std::hypot(x, y) / (8.0 * R)); });
  const ProfileConstants& c = profile_constants();
  spec.grad_const = c.grad_const;
  spec.lap_const = c.lap_const;
  return spec;
}

} // namespace ks2d
