#include "ks2d/diagnostics.hpp"

#include "ks2d/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace ks2d {
namespace {

double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
double up(double x) { return x > 0.0 ? x : 0.0; }

double max_value(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, v);
  return m;
}

// Entropy part of L: integral of u ln u (u through its positive part).
double entropy_plain(const ScalarField& u) {
  const double h2 = u.grid.cell_area();
  double s = 0.0, c = 0.0;
  for (double v : u.values) {
    const double y = xlnx(up(v)) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return h2 * s;
}

// Shared quadratic part of L and L_m: -int u v + 1/2 ||grad v||^2
// + lambda/2 ||v||^2 (raw u in the bilinear term).
double lyapunov_v_part(const SimState& s, double lambda) {
  auto [vx, vy] = gradient(s.v);
  const double h2 = s.v.grid.cell_area();
  double acc = 0.0, c = 0.0;
  for (std::size_t i = 0; i < s.v.values.size(); ++i) {
    const double y = -s.u.values[i] * s.v.values[i] +
                     0.5 * (vx.values[i] * vx.values[i] + vy.values[i] * vy.values[i]) +
                     0.5 * lambda * s.v.values[i] * s.v.values[i] - c;
    const double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  return h2 * acc;
}

// psi and psi' of an interior cutoff at radius r, reconstructed from the
// analytic transition profile (the sampled field is only used on the grid).
void interior_profile(const CutoffSpec& psi, double r, double& val, double& deriv) {
  const double w = 8.0 * psi.radius;
  val = 1.0 - cutoff_value(r / w);
  deriv = -cutoff_deriv(r / w) / w;
}

} // namespace

double lyapunov_l(const SimState& s, double lambda) {
  require_same_grid(s.u.grid, s.v.grid);
  return entropy_plain(s.u) + lyapunov_v_part(s, lambda);
}

double lyapunov_lm(const SimState& s, double lambda) {
  require_same_grid(s.u.grid, s.v.grid);
  const double h2 = s.u.grid.cell_area();
  double acc = 0.0, c = 0.0;
  for (double v : s.u.values) {
    const double x = up(v);
    const double y = (1.0 + x) * std::log1p(x) - c;
    const double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  return h2 * acc + lyapunov_v_part(s, lambda);
}

double functional_fm(const SimState& s, double lambda) {
  const double h2 = s.u.grid.cell_area();
  double acc = 0.0, c = 0.0;
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    const double y = std::log1p(up(s.u.values[i])) - s.v.values[i] - c;
    const double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  return lyapunov_lm(s, lambda) + h2 * acc;
}

ScalarField dtv_field(const SimState& s, double lambda, Coupling coupling) {
  require_same_grid(s.u.grid, s.v.grid);
  ScalarField out = laplacian(s.v);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] -= lambda * s.v.values[i];
    if (coupling != Coupling::decoupled) out.values[i] += s.u.values[i];
  }
  return out;
}

namespace {

double dtilde_from(const SimState& s, const ScalarField& vt) {
  // w = ln(1+u) - v, gradient taken spectrally on the combined field.
  ScalarField w = zeros(s.u.grid);
  for (std::size_t i = 0; i < w.values.size(); ++i)
    w.values[i] = std::log1p(up(s.u.values[i])) - s.v.values[i];
  auto [wx, wy] = gradient(w);
  const double h2 = s.u.grid.cell_area();
  double acc = 0.0, c = 0.0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double y = up(s.u.values[i]) * (wx.values[i] * wx.values[i] + wy.values[i] * wy.values[i]) +
                     vt.values[i] * vt.values[i] - c;
    const double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  return h2 * acc;
}

double fm_rhs_from(const SimState& s, double lambda, Coupling coupling, const ScalarField& vt) {
  const double h2 = s.u.grid.cell_area();
  double acc = 0.0, c = 0.0;
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    const double x = up(s.u.values[i]);
    const double ratio = x / (1.0 + x);
    double y = -vt.values[i] * ratio + lambda * s.v.values[i] / (1.0 + x);
    if (coupling != Coupling::decoupled) y -= ratio;
    y -= c;
    const double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  return h2 * acc;
}

} // namespace

double dissipation_dtilde(const SimState& s, double lambda, Coupling coupling) {
  require_same_grid(s.u.grid, s.v.grid);
  return dtilde_from(s, dtv_field(s, lambda, coupling));
}

double fm_identity_rhs(const SimState& s, double lambda, Coupling coupling) {
  require_same_grid(s.u.grid, s.v.grid);
  return fm_rhs_from(s, lambda, coupling, dtv_field(s, lambda, coupling));
}

ExteriorMass exterior_mass(const ScalarField& u, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("cutoff radius must be positive");
  if (4.0 * R >= u.grid.box_length) throw std::invalid_argument("R too large for the box");
  const CutoffSpec phi_half = make_exterior_cutoff(u.grid, 0.5 * R);
  const double h2 = u.grid.cell_area();
  ExteriorMass out;
  double si = 0.0, sw = 0.0;
  for (int iy = 0; iy < u.grid.n; ++iy)
    for (int ix = 0; ix < u.grid.n; ++ix) {
      const double r = std::hypot(u.grid.coord(ix), u.grid.coord(iy));
      const double val = u.at(ix, iy);
      if (r > R) si += val;
      sw += val * phi_half.profile.at(ix, iy);
    }
  out.indicator = h2 * si;
  out.weighted = h2 * sw;
  return out;
}

ExteriorNorms exterior_norms(const SimState& s, double R) {
  require_same_grid(s.u.grid, s.v.grid);
  const CutoffSpec phi4 = make_exterior_cutoff(s.u.grid, 4.0 * R);
  const CutoffSpec phi8 = make_exterior_cutoff(s.u.grid, 8.0 * R);
  ScalarField vphi = zeros(s.v.grid), uphi = zeros(s.u.grid), vphi8 = zeros(s.v.grid);
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    vphi.values[i] = s.v.values[i] * phi4.profile.values[i];
    uphi.values[i] = s.u.values[i] * phi8.profile.values[i];
    vphi8.values[i] = s.v.values[i] * phi8.profile.values[i];
  }
  ExteriorNorms out;
  auto [gx, gy] = gradient(vphi);
  for (std::size_t i = 0; i < gx.values.size(); ++i)
    out.grad_v_phi4_sup =
        std::max(out.grad_v_phi4_sup, std::hypot(gx.values[i], gy.values[i]));
  out.u_phi8_sup = lp_norm(uphi, std::numeric_limits<double>::infinity());
  auto [ux, uy] = gradient(uphi);
  double acc = 0.0;
  for (std::size_t i = 0; i < ux.values.size(); ++i)
    acc += ux.values[i] * ux.values[i] + uy.values[i] * uy.values[i];
  out.grad_u_phi8_l2 = std::sqrt(acc * s.u.grid.cell_area());
  out.lap_u_phi8_l2 = lp_norm(laplacian(uphi), 2.0);
  out.lap_v_phi8_l2 = lp_norm(laplacian(vphi8), 2.0);
  return out;
}

double interior_lyapunov_lr(const SimState& s, double lambda, const CutoffSpec& psi) {
  require_same_grid(s.u.grid, psi.grid);
  require_same_grid(s.u.grid, s.v.grid);
  auto [vx, vy] = gradient(s.v);
  const double h2 = s.u.grid.cell_area();
  double acc = 0.0, c = 0.0;
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    const double w = psi.profile.values[i] * psi.profile.values[i];
    const double y =
        w * (xlnx(up(s.u.values[i])) - s.u.values[i] * s.v.values[i] +
             0.5 * (vx.values[i] * vx.values[i] + vy.values[i] * vy.values[i]) +
             0.5 * lambda * s.v.values[i] * s.v.values[i]) -
        c;
    const double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  return h2 * acc;
}

double interior_entropy(const ScalarField& u, const CutoffSpec& psi) {
  require_same_grid(u.grid, psi.grid);
  const double h2 = u.grid.cell_area();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double w = psi.profile.values[i] * psi.profile.values[i];
    acc += w * xlnx(up(u.values[i]));
  }
  return h2 * acc;
}

DiagnosticsRow compute_row(const SimState& s, const RunConfig& cfg) {
  require_same_grid(s.u.grid, s.v.grid);
  DiagnosticsRow row;
  row.t = s.t;
  row.mass_u = integrate(s.u);
  row.int_v = integrate(s.v);
  row.u_l2 = lp_norm(s.u, 2.0);
  row.u_l3 = lp_norm(s.u, 3.0);
  row.u_sup = lp_norm(s.u, std::numeric_limits<double>::infinity());
  row.v_l2 = lp_norm(s.v, 2.0);

  const double h2 = s.u.grid.cell_area();
  auto [vx, vy] = gradient(s.v);
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < vx.values.size(); ++i)
      acc += vx.values[i] * vx.values[i] + vy.values[i] * vy.values[i];
    row.grad_v_l2 = std::sqrt(acc * h2);
  }

  {
    double e_mod = 0.0, e_int = 0.0, neg = 0.0, mn = 0.0;
    for (double v : s.u.values) {
      const double x = up(v);
      e_mod += (1.0 + x) * std::log1p(x);
      e_int += std::log1p(x);
      if (v < 0.0) neg -= v;
      mn = std::min(mn, v);
    }
    row.entropy_mod = h2 * e_mod;
    row.entropy_int = h2 * e_int;
    row.neg_mass = h2 * neg;
    row.min_u = mn;
  }

  row.lyap_l = lyapunov_l(s, cfg.lambda);
  row.lyap_lm = lyapunov_lm(s, cfg.lambda);
  row.f_m = row.lyap_lm + row.entropy_int - row.int_v;

  const ScalarField vt = dtv_field(s, cfg.lambda, cfg.coupling);
  row.d_tilde = dtilde_from(s, vt);
  row.fm_rhs = fm_rhs_from(s, cfg.lambda, cfg.coupling, vt);

  if (!cfg.diag_radii.empty()) {
    // Radius-independent fields for the localized balance: grad u, a
    // regularized grad(ln u), and the flux F = grad u - u grad v.
    auto [ux, uy] = gradient(s.u);
    const double floor = 1e-14 * std::max(max_value(s.u), 1e-300);
    for (double R : cfg.diag_radii) {
      RadiusMonitors m;
      m.radius = R;
      const ExteriorMass em = exterior_mass(s.u, R);
      m.ext_mass_ind = em.indicator;
      m.ext_mass_phi = em.weighted;

      double e2 = 0.0, l2 = 0.0, lp = 0.0;
      const double p = cfg.exterior_p;
      for (int iy = 0; iy < s.u.grid.n; ++iy)
        for (int ix = 0; ix < s.u.grid.n; ++ix) {
          const double r = std::hypot(s.u.grid.coord(ix), s.u.grid.coord(iy));
          const double val = s.u.at(ix, iy);
          const double x = up(val);
          if (r > 2.0 * R) e2 += (1.0 + x) * std::log1p(x);
          if (r > 4.0 * R) l2 += val * val;
          if (r > 8.0 * R) lp += std::pow(std::abs(val), p);
        }
      m.ext_entropy = h2 * e2;
      m.ext_l2 = std::sqrt(h2 * l2);
      m.ext_lp = std::pow(h2 * lp, 1.0 / p);

      const CutoffSpec psi = make_interior_cutoff(s.u.grid, R);
      m.int_lr = interior_lyapunov_lr(s, cfg.lambda, psi);
      m.int_entropy = interior_entropy(s.u, psi);

      // Localized balance: d/dt L_R + D_R = -int (ln u + 1 - v) F . grad w
      // - int (dt v) grad v . grad w, w = psi^2, grad w analytic radial.
      double diss = 0.0, rhs = 0.0;
      for (int iy = 0; iy < s.u.grid.n; ++iy)
        for (int ix = 0; ix < s.u.grid.n; ++ix) {
          const std::size_t i = static_cast<std::size_t>(iy) * s.u.grid.n + ix;
          const double x = s.u.grid.coord(ix), y = s.u.grid.coord(iy);
          const double r = std::hypot(x, y);
          const double uval = up(s.u.values[i]);
          const double pv = psi.profile.values[i];
          const double w = pv * pv;
          const double lnu = std::log(uval + floor);
          const double gx_ln = ux.values[i] / (uval + floor) - vx.values[i];
          const double gy_ln = uy.values[i] / (uval + floor) - vy.values[i];
          diss += w * (uval * (gx_ln * gx_ln + gy_ln * gy_ln) +
                       vt.values[i] * vt.values[i]);
          if (r > 1e-12) {
            double pval, pder;
            interior_profile(psi, r, pval, pder);
            const double gw = 2.0 * pval * pder; // radial derivative of psi^2
            const double wx = gw * x / r, wy = gw * y / r;
            const double fx = ux.values[i] - s.u.values[i] * vx.values[i];
            const double fy = uy.values[i] - s.u.values[i] * vy.values[i];
            const double g = lnu + 1.0 - s.v.values[i];
            rhs += -g * (fx * wx + fy * wy) - vt.values[i] * (vx.values[i] * wx + vy.values[i] * wy);
          }
        }
      m.int_diss = h2 * diss;
      m.int_rhs = h2 * rhs;
      row.radii.push_back(m);
    }
  }
  return row;
}

double fm_identity_residual(const std::vector<DiagnosticsRow>& rows, std::size_t k) {
  if (k < 1 || k + 1 >= rows.size()) throw std::out_of_range("residual window out of range");
  const double span = rows[k + 1].t - rows[k - 1].t;
  const double deriv = (rows[k + 1].f_m - rows[k - 1].f_m) / span;
  const double defect = deriv + rows[k].d_tilde - rows[k].fm_rhs;
  return std::abs(defect) / (std::abs(rows[k].d_tilde) + std::abs(rows[k].fm_rhs) + 1e-300);
}

void fill_fm_residuals(std::vector<DiagnosticsRow>& rows) {
  if (rows.size() < 3) throw std::invalid_argument("insufficient rows");
  std::vector<char> set(rows.size(), 0);
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double dt1 = rows[k].t - rows[k - 1].t;
    const double dt2 = rows[k + 1].t - rows[k].t;
    if (std::abs(dt2 - dt1) <= 1e-9 * std::max(dt1, dt2)) {
      rows[k].fm_residual = fm_identity_residual(rows, k);
      set[k] = 1;
    }
  }
  // Rows without a uniform window (ends, ragged final step) copy the
  // nearest computed neighbor.
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (set[k]) continue;
    for (std::size_t d = 1; d < rows.size(); ++d) {
      if (k >= d && set[k - d]) {
        rows[k].fm_residual = rows[k - d].fm_residual;
        break;
      }
      if (k + d < rows.size() && set[k + d]) {
        rows[k].fm_residual = rows[k + d].fm_residual;
        break;
      }
    }
  }
}

MonotonicityReport fm_monotonicity_check(const std::vector<DiagnosticsRow>& rows, double lambda) {
  if (rows.size() < 3) throw std::invalid_argument("insufficient rows");
  MonotonicityReport rep;
  double max_defect = 0.0, max_dt = 0.0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double defect =
        rows[k].fm_residual * (std::abs(rows[k].d_tilde) + std::abs(rows[k].fm_rhs));
    max_defect = std::max(max_defect, defect);
  }
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    max_dt = std::max(max_dt, rows[k + 1].t - rows[k].t);
  rep.slack = 10.0 * max_defect * max_dt;
  rep.bound_rate = lambda > 0.0 ? rows[0].mass_u + rows[0].int_v : 0.0;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double dt = rows[k + 1].t - rows[k].t;
    const double allowed = rep.bound_rate * dt + rep.slack;
    const double excess = (rows[k + 1].f_m - rows[k].f_m) - allowed;
    if (excess > 0.0) {
      ++rep.violations;
      rep.max_excess = std::max(rep.max_excess, excess);
    }
  }
  return rep;
}

LocalMin local_min_u(const ScalarField& u, double ring_radius, double disk_radius, int n_angles) {
  if (n_angles < 1) throw std::invalid_argument("need at least one angle");
  const double h = u.grid.spacing();
  if (disk_radius < 0.5 * h) throw std::invalid_argument("empty disk");
  LocalMin best;
  best.value = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int a = 0; a < n_angles; ++a) {
    const double theta = 2.0 * M_PI * a / n_angles;
    const double cx = ring_radius * std::cos(theta);
    const double cy = ring_radius * std::sin(theta);
    double mn = std::numeric_limits<double>::infinity();
    bool hit = false;
    const int i0 = std::max(0, static_cast<int>(std::floor((cx - disk_radius + 0.5 * u.grid.box_length) / h)));
    const int i1 = std::min(u.grid.n - 1, static_cast<int>(std::ceil((cx + disk_radius + 0.5 * u.grid.box_length) / h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((cy - disk_radius + 0.5 * u.grid.box_length) / h)));
    const int j1 = std::min(u.grid.n - 1, static_cast<int>(std::ceil((cy + disk_radius + 0.5 * u.grid.box_length) / h)));
    for (int iy = j0; iy <= j1; ++iy)
      for (int ix = i0; ix <= i1; ++ix) {
        const double dx = u.grid.coord(ix) - cx;
        const double dy = u.grid.coord(iy) - cy;
        if (dx * dx + dy * dy <= disk_radius * disk_radius) {
          mn = std::min(mn, u.at(ix, iy));
          hit = true;
        }
      }
    if (hit && mn > best.value) {
      best = {cx, cy, mn};
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("empty disk");
  return best;
}

void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t,mass_u,int_v,u_l2,u_l3,u_sup,grad_v_l2,v_l2,entropy_mod,entropy_int,"
         "lyap_l,lyap_lm,f_m,d_tilde,fm_rhs,fm_residual,min_u,neg_mass";
  const std::size_t n_radii = rows.empty() ? 0 : rows.front().radii.size();
  for (std::size_t i = 0; i < n_radii; ++i)
    out << ",r" << i << "_radius,r" << i << "_ext_mass_ind,r" << i << "_ext_mass_phi,r" << i
        << "_ext_entropy,r" << i << "_ext_l2,r" << i << "_ext_lp,r" << i << "_int_lr,r" << i
        << "_int_entropy,r" << i << "_int_diss,r" << i << "_int_rhs";
  out << '\n';
  out << std::setprecision(17);
  for (const DiagnosticsRow& r : rows) {
    out << r.t << ',' << r.mass_u << ',' << r.int_v << ',' << r.u_l2 << ',' << r.u_l3 << ','
        << r.u_sup << ',' << r.grad_v_l2 << ',' << r.v_l2 << ',' << r.entropy_mod << ','
        << r.entropy_int << ',' << r.lyap_l << ',' << r.lyap_lm << ',' << r.f_m << ','
        << r.d_tilde << ',' << r.fm_rhs << ',' << r.fm_residual << ',' << r.min_u << ','
        << r.neg_mass;
    if (r.radii.size() != n_radii) throw std::runtime_error("ragged radius blocks");
    for (const RadiusMonitors& m : r.radii)
      out << ',' << m.radius << ',' << m.ext_mass_ind << ',' << m.ext_mass_phi << ','
          << m.ext_entropy << ',' << m.ext_l2 << ',' << m.ext_lp << ',' << m.int_lr << ','
          << m.int_entropy << ',' << m.int_diss << ',' << m.int_rhs;
    out << '\n';
  }
}

} // namespace ks2d
