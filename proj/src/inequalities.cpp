#include "ks2d/inequalities.hpp"

#include "ks2d/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ks2d {

namespace {

constexpr double kSupCap = 500.0; // exp(sup) must stay far from DBL_MAX
constexpr double kPi = 3.14159265358979323846;

struct KahanAcc {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

/// |grad f|^2 by centered differences on the torus. Trial profiles include
/// kinks and masked products that are not band-limited, where spectral
/// differentiation rings; local differences degrade gracefully instead.
ScalarField fd_grad_sq(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int n = g.n;
  const double inv2h = 1.0 / (2.0 * g.spacing());
  ScalarField out = zeros(g);
  for (int iy = 0; iy < n; ++iy) {
    const int ym = (iy + n - 1) % n, yp = (iy + 1) % n;
    for (int ix = 0; ix < n; ++ix) {
      const int xm = (ix + n - 1) % n, xp = (ix + 1) % n;
      const double gx = (f.at(xp, iy) - f.at(xm, iy)) * inv2h;
      const double gy = (f.at(ix, yp) - f.at(ix, ym)) * inv2h;
      out.at(ix, iy) = gx * gx + gy * gy;
    }
  }
  return out;
}

double fd_dirichlet(const ScalarField& f) {
  const ScalarField gsq = fd_grad_sq(f);
  return integrate(gsq);
}

/// |d/dr sqrt(profile)| sampled analytically from the radial transition.
ScalarField grad_sqrt_profile(const CutoffSpec& spec) {
  const double R = spec.radius;
  const bool exterior = spec.kind == CutoffSpec::Kind::exterior;
  return sample(spec.grid, [&](double x, double y) {
    const double r = std::hypot(x, y);
    if (exterior) {
      const double s = r / R;
      const double v = cutoff_value(s);
      if (v <= 1e-280) return 0.0;
      return std::abs(cutoff_deriv(s)) / (2.0 * R * std::sqrt(v));
    }
    const double s = r / (8.0 * R);
    const double v = 1.0 - cutoff_value(s);
    if (v <= 1e-280) return 0.0;
    return std::abs(cutoff_deriv(s)) / (16.0 * R * std::sqrt(v));
  });
}

double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void finalize(InequalityReport& rep) {
  rep.violations = 0;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (const TrialEntry& e : rep.entries) {
    if (e.margin < -1e-12 * (std::abs(e.lhs) + std::abs(e.rhs))) ++rep.violations;
    if (e.margin < rep.worst_margin) {
      rep.worst_margin = e.margin;
      rep.worst_params = e.params;
    }
  }
}

} // namespace

std::vector<ScalarField> make_trials(const TrialFamily& fam, const GridSpec& g,
                                     double disk_radius) {
  if (fam.count < 1) throw std::invalid_argument("trial count must be positive");
  if (fam.max_amplitude > kSupCap)
    throw std::invalid_argument("trial amplitude exceeds the overflow cap");
  if (!(disk_radius > 0.0) || disk_radius >= 0.5 * g.box_length)
    throw std::invalid_argument("disk does not fit in the box");

  std::mt19937_64 eng(fam.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double L = g.box_length;
  const double h = g.spacing();

  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(fam.count));
  for (int i = 0; i < fam.count; ++i) {
    switch (fam.kind) {
      case TrialFamily::Kind::gaussians: {
        const double sigma = 0.4 + 1.2 * unit(eng);
        const double amp = 0.2 + (fam.max_amplitude - 0.2) * unit(eng);
        const double cx = (unit(eng) - 0.5) * L / 4.0;
        const double cy = (unit(eng) - 0.5) * L / 4.0;
        out.push_back(sample(g, [=](double x, double y) {
          const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          return amp * std::exp(-r2 / (2.0 * sigma * sigma));
        }));
        break;
      }
      case TrialFamily::Kind::bumps: {
        const double rho = 0.8 + unit(eng) * (L / 6.0 - 0.8);
        const double amp = 0.2 + (fam.max_amplitude - 0.2) * unit(eng);
        const double cx = (unit(eng) - 0.5) * L / 4.0;
        const double cy = (unit(eng) - 0.5) * L / 4.0;
        out.push_back(sample(g, [=](double x, double y) {
          const double t =
              ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (rho * rho);
          return t < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
        }));
        break;
      }
      case TrialFamily::Kind::random_bandlimited: {
        // random cosine sum with modes up to 6, squared: nonnegative and
        // exactly band-limited at twice the cutoff
        struct Mode {
          double kx, ky, a, phase;
        };
        std::vector<Mode> modes;
        for (int j = 0; j < 24; ++j) {
          const int mx = static_cast<int>(unit(eng) * 13.0) - 6;
          const int my = static_cast<int>(unit(eng) * 13.0) - 6;
          const double m2 = double(mx) * mx + double(my) * my;
          modes.push_back({2.0 * kPi * mx / L, 2.0 * kPi * my / L,
                           gauss(eng) / (1.0 + m2), 2.0 * kPi * unit(eng)});
        }
        ScalarField w = sample(g, [&](double x, double y) {
          double acc = 0.0;
          for (const Mode& m : modes) acc += m.a * std::cos(m.kx * x + m.ky * y + m.phase);
          return acc * acc;
        });
        const double sup = lp_norm(w, std::numeric_limits<double>::infinity());
        const double amp = 0.5 + (fam.max_amplitude - 0.5) * unit(eng);
        if (sup > 0.0)
          for (double& v : w.values) v *= amp / sup;
        out.push_back(std::move(w));
        break;
      }
      case TrialFamily::Kind::peaked: {
        // radial log cone: slopes near the exponential-integrability
        // threshold, tip width shrinking toward the grid scale
        const double s = 3.6 + 0.8 * unit(eng);
        const double umax = std::log(disk_radius / (3.0 * h));
        const double umin = std::min(std::log(8.0), umax);
        const double u = umin + (umax - umin) * unit(eng);
        const double rho = disk_radius * std::exp(-u);
        const double rd = disk_radius;
        out.push_back(sample(g, [=](double x, double y) {
          const double r = std::hypot(x, y);
          if (r >= rd) return 0.0;
          return s * std::log(rd / std::max(r, rho));
        }));
        break;
      }
    }
  }
  return out;
}

TrialEntry tm_entry(const ScalarField& f, double disk_radius, double c_tm,
                    double exponent_scale) {
  const GridSpec& g = f.grid;
  if (!(disk_radius > 0.0) || disk_radius >= 0.5 * g.box_length)
    throw std::invalid_argument("disk does not fit in the box");
  const double sup = lp_norm(f, std::numeric_limits<double>::infinity());
  if (sup > kSupCap) throw std::invalid_argument("trial sup exceeds the overflow cap");

  KahanAcc inside, outside, area;
  const double r2cut = disk_radius * disk_radius;
  for (int iy = 0; iy < g.n; ++iy) {
    const double y = g.coord(iy);
    for (int ix = 0; ix < g.n; ++ix) {
      const double x = g.coord(ix);
      const double a = std::abs(f.at(ix, iy));
      if (x * x + y * y <= r2cut) {
        inside.add(std::exp(a));
        area.add(1.0);
      } else {
        outside.add(a);
      }
    }
  }
  const double cell = g.cell_area();
  const double total_abs = lp_norm(f, 1.0);
  if (outside.sum * cell > 1e-12 * (total_abs + 1e-300))
    throw std::invalid_argument("trial not supported in the disk");

  const double dirichlet = fd_dirichlet(f);
  TrialEntry e;
  e.lhs = inside.sum * cell;
  e.rhs = c_tm * area.sum * cell * std::exp(exponent_scale * dirichlet / (16.0 * kPi));
  e.margin = e.rhs - e.lhs;
  e.params = fmt("sup=%.6g;dirichlet=%.6g;scale=%.6g", sup, dirichlet, exponent_scale);
  return e;
}

TrialEntry nss_entry(const ScalarField& g_field, const ScalarField& h_field) {
  require_same_grid(g_field.grid, h_field.grid);
  const double gmax = lp_norm(g_field, std::numeric_limits<double>::infinity());
  double gmin = 0.0;
  for (double v : g_field.values) gmin = std::min(gmin, v);
  if (gmin < -1e-12 * gmax) throw std::invalid_argument("density must be nonnegative");
  const double mass = integrate(g_field);
  if (!(mass > 0.0)) throw std::invalid_argument("density mass must be positive");

  const double cell = g_field.grid.cell_area();
  double hmax = -std::numeric_limits<double>::infinity();
  for (double v : h_field.values) hmax = std::max(hmax, v);

  KahanAcc pairing, entropy, expsum;
  for (std::size_t i = 0; i < g_field.values.size(); ++i) {
    const double gv = std::max(g_field.values[i], 0.0);
    pairing.add(gv * h_field.values[i]);
    entropy.add(xlnx(gv));
    expsum.add(std::exp(h_field.values[i] - hmax)); // shifted to dodge overflow
  }

  TrialEntry e;
  e.lhs = pairing.sum * cell;
  e.rhs = entropy.sum * cell + mass * (hmax + std::log(expsum.sum * cell)) -
          mass * std::log(mass);
  e.margin = e.rhs - e.lhs;
  e.params = fmt("mass=%.6g;hmax=%.6g", mass, hmax);
  return e;
}

TrialEntry l2_weighted_entry(const ScalarField& f, const CutoffSpec& phi) {
  require_same_grid(f.grid, phi.profile.grid);
  const ScalarField gsq = fd_grad_sq(f);
  const ScalarField bnd = grad_sqrt_profile(phi);
  const double cell = f.grid.cell_area();

  KahanAcc lhs, over_mass, over_diss, edge, mass;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double a = std::abs(f.values[i]);
    const double w = phi.profile.values[i];
    lhs.add(a * a * w);
    mass.add(a * w);
    edge.add(a * bnd.values[i]);
    if (a > 1.0) {
      if (w > 0.0) over_mass.add(a);
      over_diss.add(gsq.values[i] / (1.0 + a) * w);
    }
  }

  TrialEntry e;
  e.lhs = lhs.sum * cell;
  e.rhs = 2.0 * (over_mass.sum * cell) * (over_diss.sum * cell) +
          4.0 * (edge.sum * cell) * (edge.sum * cell) + 4.0 * mass.sum * cell;
  e.margin = e.rhs - e.lhs;
  e.params = fmt(phi.kind == CutoffSpec::Kind::exterior ? "weight=ext;R=%.6g"
                                                        : "weight=int;R=%.6g",
                 phi.radius);
  return e;
}

CubeBoundTerms l3_weighted_terms(const ScalarField& f, const CutoffSpec& phi) {
  require_same_grid(f.grid, phi.profile.grid);
  const ScalarField gsq = fd_grad_sq(f);
  const ScalarField bnd = grad_sqrt_profile(phi);
  const double cell = f.grid.cell_area();

  KahanAcc lhs, ent, diss, edge, mass;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double a = std::abs(f.values[i]);
    const double w = phi.profile.values[i];
    lhs.add(a * a * a * w);
    diss.add(gsq.values[i] * w);
    mass.add(a * w);
    edge.add(a * std::sqrt(a) * bnd.values[i]);
    if (w > 0.0) ent.add((1.0 + a) * std::log1p(a));
  }

  CubeBoundTerms t;
  t.lhs = lhs.sum * cell;
  t.entropy_dirichlet = (ent.sum * cell) * (diss.sum * cell);
  t.boundary_sq = (edge.sum * cell) * (edge.sum * cell);
  t.mass_term = mass.sum * cell;
  t.params = fmt(phi.kind == CutoffSpec::Kind::exterior ? "weight=ext;R=%.6g"
                                                        : "weight=int;R=%.6g",
                 phi.radius);
  return t;
}

TrialEntry heat_lplq_entry(const ScalarField& f, double p, double q,
                           int alpha_order, const std::vector<double>& t_grid,
                           double c_ref) {
  if (!(q >= 1.0) || !(p >= q)) throw std::invalid_argument("exponent ordering violated");
  if (alpha_order != 0 && alpha_order != 1)
    throw std::invalid_argument("derivative order must be 0 or 1");
  if (t_grid.empty()) throw std::invalid_argument("empty time grid");
  const double fq = lp_norm(f, q);
  if (!(fq > 0.0)) throw std::invalid_argument("trial vanishes");

  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
  const double rate = (iq - ip) + 0.5 * alpha_order;

  double worst = 0.0;
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("times must be positive");
    const ScalarField ft = heat_propagate(f, t);
    double norm;
    if (alpha_order == 0) {
      norm = lp_norm(ft, p);
    } else {
      auto [gx, gy] = gradient(ft); // smooth after propagation: spectral is exact
      ScalarField mag = zeros(f.grid);
      for (std::size_t i = 0; i < mag.values.size(); ++i)
        mag.values[i] = std::hypot(gx.values[i], gy.values[i]);
      norm = lp_norm(mag, p);
    }
    worst = std::max(worst, norm * std::pow(t, rate) / fq);
  }

  TrialEntry e;
  e.lhs = worst;
  e.rhs = c_ref > 0.0 ? c_ref : std::numeric_limits<double>::quiet_NaN();
  e.margin = e.rhs - e.lhs;
  e.params = fmt("p=%.3g;q=%.3g;a=%.0f", p, q, double(alpha_order));
  return e;
}

InterpolationTerms gn_terms(const ScalarField& f) {
  const double dir = fd_dirichlet(f);
  if (!(dir > 0.0))
    throw std::invalid_argument("constant trials are degenerate for interpolation bounds");
  InterpolationTerms t;
  const double l4 = lp_norm(f, 4.0), l3 = lp_norm(f, 3.0);
  t.quartic_lhs = l4 * l4;
  t.quartic_structure = lp_norm(f, 2.0) * std::sqrt(dir);
  t.cubic_lhs = l3 * l3 * l3;
  t.cubic_structure = lp_norm(f, 1.0) * dir;
  t.params = fmt("dirichlet=%.6g;sup=%.6g", dir,
                 lp_norm(f, std::numeric_limits<double>::infinity()));
  return t;
}

namespace {

std::vector<TrialFamily::Kind> parse_kinds(const std::string& family) {
  using K = TrialFamily::Kind;
  if (family == "all") return {K::gaussians, K::bumps, K::random_bandlimited, K::peaked};
  if (family == "gaussians") return {K::gaussians};
  if (family == "bumps") return {K::bumps};
  if (family == "random_bandlimited") return {K::random_bandlimited};
  if (family == "peaked") return {K::peaked};
  throw std::invalid_argument("unknown trial family: " + family);
}

/// Signed band-limited cosine sum, sup-normalized then scaled.
ScalarField random_signed_field(const GridSpec& g, std::mt19937_64& eng, double scale) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  struct Mode {
    double kx, ky, a, phase;
  };
  std::vector<Mode> modes;
  for (int j = 0; j < 24; ++j) {
    const int mx = static_cast<int>(unit(eng) * 13.0) - 6;
    const int my = static_cast<int>(unit(eng) * 13.0) - 6;
    const double m2 = double(mx) * mx + double(my) * my;
    modes.push_back({2.0 * kPi * mx / g.box_length, 2.0 * kPi * my / g.box_length,
                     gauss(eng) / (1.0 + m2), 2.0 * kPi * unit(eng)});
  }
  ScalarField w = sample(g, [&](double x, double y) {
    double acc = 0.0;
    for (const Mode& m : modes) acc += m.a * std::cos(m.kx * x + m.ky * y + m.phase);
    return acc;
  });
  const double sup = lp_norm(w, std::numeric_limits<double>::infinity());
  if (sup > 0.0)
    for (double& v : w.values) v *= scale / sup;
  return w;
}

std::vector<ScalarField> mixed_trials(const std::vector<TrialFamily::Kind>& kinds,
                                      int count, std::uint64_t seed, const GridSpec& g,
                                      double disk_radius, double max_amp) {
  std::vector<ScalarField> out;
  if (count <= 0) return out;
  out.reserve(static_cast<std::size_t>(count));
  const int per = (count + static_cast<int>(kinds.size()) - 1) / static_cast<int>(kinds.size());
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    TrialFamily fam;
    fam.kind = kinds[k];
    fam.count = per;
    fam.seed = seed + 1000003 * (k + 1);
    fam.max_amplitude = max_amp;
    for (ScalarField& f : make_trials(fam, g, disk_radius)) {
      out.push_back(std::move(f));
      if (static_cast<int>(out.size()) == count) return out;
    }
  }
  return out;
}

} // namespace

std::vector<InequalityReport> run_inequality_suite(const OracleConfig& cfg) {
  const GridSpec g = cfg.grid;
  if (g.n == 0) throw std::invalid_argument("oracle grid is unset");
  const double L = g.box_length;
  const double rd = cfg.disk_radius > 0.0 ? cfg.disk_radius : 0.375 * L;
  const double rext = cfg.ext_radius > 0.0 ? cfg.ext_radius : L / 12.0;
  const double rint = cfg.int_radius > 0.0 ? cfg.int_radius : L / 36.0;
  const auto kinds = parse_kinds(cfg.family);
  const bool has_peaks =
      std::find(kinds.begin(), kinds.end(), TrialFamily::Kind::peaked) != kinds.end();

  std::vector<double> t_grid = cfg.t_grid;
  if (t_grid.empty()) {
    const double kmax = kPi * g.n / L;
    const double t0 = std::max(0.05, 40.0 / (kmax * kmax));
    t_grid = {t0, 2.0 * t0, 4.0 * t0, 8.0 * t0};
  }

  const CutoffSpec ext = make_exterior_cutoff(g, rext);
  const CutoffSpec inter = make_interior_cutoff(g, rint);
  const CutoffSpec disk_mask = make_interior_cutoff(g, rd / 16.0);

  std::vector<InequalityReport> reports;

  { // exponential integrability on the disk, then the sharpness probe
    std::vector<TrialFamily::Kind> smooth;
    for (auto k : kinds)
      if (k != TrialFamily::Kind::peaked) smooth.push_back(k);

    std::vector<ScalarField> trials;
    std::vector<bool> peaked_flag;
    const int n_peak = has_peaks ? (smooth.empty() ? cfg.trials : (cfg.trials + 1) / 2) : 0;
    if (n_peak > 0) {
      TrialFamily fam;
      fam.kind = TrialFamily::Kind::peaked;
      fam.count = n_peak;
      fam.seed = cfg.seed + 17;
      for (ScalarField& f : make_trials(fam, g, rd)) {
        trials.push_back(std::move(f));
        peaked_flag.push_back(true);
      }
    }
    if (!smooth.empty()) {
      for (ScalarField& f :
           mixed_trials(smooth, cfg.trials - n_peak, cfg.seed + 29, g, rd, 2.5)) {
        for (std::size_t i = 0; i < f.values.size(); ++i)
          f.values[i] *= disk_mask.profile.values[i];
        trials.push_back(std::move(f));
        peaked_flag.push_back(false);
      }
    }

    std::vector<TrialEntry> raw;
    double fit = 0.0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      TrialEntry e = tm_entry(trials[i], rd, 1.0);
      fit = std::max(fit, e.lhs / e.rhs);
      raw.push_back(std::move(e));
    }

    InequalityReport rep;
    rep.inequality = "exp-disk";
    rep.fitted_constant = fit;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      TrialEntry e = raw[i];
      e.trial_id = static_cast<int>(i);
      e.rhs *= fit;
      e.margin = e.rhs - e.lhs;
      rep.entries.push_back(std::move(e));
    }
    finalize(rep);
    reports.push_back(std::move(rep));

    if (has_peaks) {
      InequalityReport sharp;
      sharp.inequality = "exp-disk-sharpness";
      sharp.fitted_constant = fit;
      int id = 0;
      for (std::size_t i = 0; i < trials.size(); ++i) {
        if (!peaked_flag[i]) continue;
        TrialEntry e = tm_entry(trials[i], rd, fit, 15.0 / 16.0);
        e.trial_id = id++;
        sharp.entries.push_back(std::move(e));
      }
      finalize(sharp);
      reports.push_back(std::move(sharp));
    }
  }

  { // entropy duality
    InequalityReport rep;
    rep.inequality = "entropy-duality";
    std::mt19937_64 eng(cfg.seed + 71);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto densities = mixed_trials(kinds, cfg.trials - 1, cfg.seed + 43, g, rd, 2.5);
    int id = 0;
    for (ScalarField& gv : densities) {
      const ScalarField h = random_signed_field(g, eng, 0.5 + 2.5 * unit(eng));
      TrialEntry e = nss_entry(gv, h);
      e.trial_id = id++;
      rep.entries.push_back(std::move(e));
    }
    // the duality's equality case: log-density pairing, unit mass
    ScalarField gd = sample(g, [&](double x, double y) {
      return std::exp(-(x * x + y * y) / 2.0) / (2.0 * kPi);
    });
    const double mass = integrate(gd);
    for (double& v : gd.values) v /= mass;
    ScalarField hd = zeros(g);
    for (std::size_t i = 0; i < hd.values.size(); ++i)
      hd.values[i] = std::log(gd.values[i]);
    TrialEntry eq = nss_entry(gd, hd);
    eq.trial_id = id;
    eq.params += ";kind=equality";
    rep.entries.push_back(std::move(eq));
    finalize(rep);
    reports.push_back(std::move(rep));
  }

  { // weighted square bound (explicit constants)
    InequalityReport rep;
    rep.inequality = "weighted-square";
    auto trials = mixed_trials(kinds, cfg.trials, cfg.seed + 101, g, rd, 4.0);
    for (std::size_t i = 0; i < trials.size(); ++i) {
      TrialEntry e = l2_weighted_entry(trials[i], i % 2 == 0 ? ext : inter);
      e.trial_id = static_cast<int>(i);
      rep.entries.push_back(std::move(e));
    }
    finalize(rep);
    reports.push_back(std::move(rep));
  }

  { // weighted cube bound: fit the free constants per epsilon
    auto trials = mixed_trials(kinds, cfg.trials, cfg.seed + 137, g, rd, 4.0);
    std::vector<CubeBoundTerms> terms;
    terms.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i)
      terms.push_back(l3_weighted_terms(trials[i], i % 2 == 0 ? ext : inter));

    for (double eps : cfg.eps_values) {
      double fit = 0.0;
      for (const CubeBoundTerms& t : terms) {
        const double excess = t.lhs - eps * t.entropy_dirichlet;
        const double denom = t.boundary_sq + t.mass_term;
        if (denom > 0.0) fit = std::max(fit, excess / denom);
      }
      InequalityReport rep;
      rep.inequality = fmt("weighted-cube-eps%.3g", eps);
      rep.fitted_constant = fit;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const CubeBoundTerms& t = terms[i];
        TrialEntry e;
        e.trial_id = static_cast<int>(i);
        e.lhs = t.lhs;
        e.rhs = eps * t.entropy_dirichlet + fit * (t.boundary_sq + t.mass_term);
        e.margin = e.rhs - e.lhs;
        e.params = t.params + fmt(";eps=%.3g", eps);
        rep.entries.push_back(std::move(e));
      }
      finalize(rep);
      reports.push_back(std::move(rep));
    }
  }

  { // interpolation bounds, both forms share the trials
    auto trials = mixed_trials(kinds, cfg.trials, cfg.seed + 173, g, rd, 4.0);
    std::vector<InterpolationTerms> terms;
    for (const ScalarField& f : trials) terms.push_back(gn_terms(f));

    double fit4 = 0.0, fit3 = 0.0;
    for (const InterpolationTerms& t : terms) {
      fit4 = std::max(fit4, t.quartic_lhs / t.quartic_structure);
      fit3 = std::max(fit3, t.cubic_lhs / t.cubic_structure);
    }
    InequalityReport quart, cubic;
    quart.inequality = "interpolation-quartic";
    quart.fitted_constant = fit4;
    cubic.inequality = "interpolation-cubic";
    cubic.fitted_constant = fit3;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const InterpolationTerms& t = terms[i];
      TrialEntry e4{static_cast<int>(i), t.quartic_lhs, fit4 * t.quartic_structure, 0.0,
                    t.params};
      e4.margin = e4.rhs - e4.lhs;
      quart.entries.push_back(std::move(e4));
      TrialEntry e3{static_cast<int>(i), t.cubic_lhs, fit3 * t.cubic_structure, 0.0,
                    t.params};
      e3.margin = e3.rhs - e3.lhs;
      cubic.entries.push_back(std::move(e3));
    }
    finalize(quart);
    finalize(cubic);
    reports.push_back(std::move(quart));
    reports.push_back(std::move(cubic));
  }

  { // diffusion semigroup: p = q contraction, then the smoothing rate fit
    auto trials = mixed_trials(kinds, cfg.trials, cfg.seed + 211, g, rd, 4.0);
    InequalityReport contraction;
    contraction.inequality = "heat-contraction";
    const double ps[3] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const double p = ps[i % 3];
      TrialEntry e = heat_lplq_entry(trials[i], p, p, 0, t_grid, 1.0);
      e.trial_id = static_cast<int>(i);
      contraction.entries.push_back(std::move(e));
    }
    finalize(contraction);
    reports.push_back(std::move(contraction));

    InequalityReport smoothing;
    smoothing.inequality = "heat-smoothing-grad";
    std::vector<TrialEntry> raw;
    double fit = 0.0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      TrialEntry e = heat_lplq_entry(trials[i], 2.0, 1.0, 1, t_grid);
      fit = std::max(fit, e.lhs);
      raw.push_back(std::move(e));
    }
    smoothing.fitted_constant = fit;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      TrialEntry e = raw[i];
      e.trial_id = static_cast<int>(i);
      e.rhs = fit;
      e.margin = e.rhs - e.lhs;
      smoothing.entries.push_back(std::move(e));
    }
    finalize(smoothing);
    reports.push_back(std::move(smoothing));
  }

  return reports;
}

void write_inequality_csv(const std::string& path,
                          const std::vector<InequalityReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "inequality,trial_id,lhs,rhs,margin,params\n";
  char buf[256];
  for (const InequalityReport& rep : reports) {
    for (const TrialEntry& e : rep.entries) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g", e.trial_id, e.lhs, e.rhs,
                    e.margin);
      out << rep.inequality << ',' << buf << ',' << e.params << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace ks2d
