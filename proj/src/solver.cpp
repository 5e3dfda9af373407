#include "ks2d/solver.hpp"

#include "ks2d/fft.hpp"
#include "ks2d/field_ops.hpp"
#include "spectral_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace ks2d {
namespace {

using detail::cd;
using detail::ModeTables;
using detail::Workspace;
using detail::flux_divergence;

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, both continued by
// their limits at 0. z is real and <= 0 here. phi2 switches to a Taylor
// tail for small |z| where expm1(z) - z cancels.
double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

double phi2(double z) {
  if (std::abs(z) < 1e-3)
    return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0)));
  return (std::expm1(z) - z) / (z * z);
}

// Exponential-integrator multipliers for one step size.
struct StepOps {
  std::vector<double> eu, ev;   // exp(-k2 dt), exp(-(k2+lambda) dt)
  std::vector<double> p1u, p1v; // dt * phi1
  std::vector<double> p2u, p2v; // dt * phi2

  StepOps(const ModeTables& mt, double dt, double lambda) {
    const std::size_t nc = mt.nc;
    eu.resize(nc);
    ev.resize(nc);
    p1u.resize(nc);
    p1v.resize(nc);
    p2u.resize(nc);
    p2v.resize(nc);
    for (std::size_t i = 0; i < nc; ++i) {
      const double zu = -mt.k2[i] * dt;
      const double zv = -(mt.k2[i] + lambda) * dt;
      eu[i] = std::exp(zu);
      ev[i] = std::exp(zv);
      p1u[i] = dt * phi1(zu);
      p1v[i] = dt * phi1(zv);
      p2u[i] = dt * phi2(zu);
      p2v[i] = dt * phi2(zv);
    }
  }
};

// Advances (u_hat, v_hat) by one step. ws.u holds u at entry time
// afterwards (byproduct of the first nonlinearity evaluation).
void etd_step(std::vector<cd>& u_hat, std::vector<cd>& v_hat, const ModeTables& mt,
              const StepOps& ops, const RunConfig& cfg, Workspace& ws, std::vector<cd>& nl_n,
              std::vector<cd>& ua, std::vector<cd>& va) {
  const std::size_t nc = mt.nc;
  const bool with_flux = cfg.coupling == Coupling::full;
  const bool with_source = cfg.coupling != Coupling::decoupled;

  if (with_flux) {
    flux_divergence(u_hat, v_hat, mt, ws);
    nl_n.assign(ws.nl.begin(), ws.nl.end());
  } else {
    detail::rfft_inverse(mt.n, u_hat.data(), ws.u.data());
    std::fill(nl_n.begin(), nl_n.end(), cd(0.0, 0.0));
  }

  // predictor (equals the full ETD1 update)
  for (std::size_t i = 0; i < nc; ++i) {
    ua[i] = ops.eu[i] * u_hat[i] + ops.p1u[i] * nl_n[i];
    va[i] = ops.ev[i] * v_hat[i];
    if (with_source) va[i] += ops.p1v[i] * u_hat[i];
  }

  if (cfg.scheme == Scheme::etd1) {
    u_hat.swap(ua);
    v_hat.swap(va);
    return;
  }

  // corrector: second nonlinearity evaluation at the predicted state
  if (with_flux) {
    ws.u.swap(ws.u_save); // preserve u at entry time across the second evaluation
    flux_divergence(ua, va, mt, ws);
  }
  for (std::size_t i = 0; i < nc; ++i) {
    cd un = ua[i];
    if (with_flux) un += ops.p2u[i] * (ws.nl[i] - nl_n[i]);
    cd vn = va[i];
    if (with_source) vn += ops.p2v[i] * (ua[i] - u_hat[i]);
    u_hat[i] = un;
    v_hat[i] = vn;
  }
  if (with_flux) ws.u.swap(ws.u_save);
}

double tail_fraction_half(const std::vector<cd>& u_hat, const ModeTables& mt) {
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < mt.nc; ++i) {
    if (mt.keep[i] == 0.0f) continue;
    const double e = mt.herm[i] * std::norm(u_hat[i]);
    total += e;
    tail += mt.tail[i] * e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

std::string format_blowup_reason(double t, double sup_u, double u_l2, double tail, const char* what) {
  std::ostringstream os;
  os.precision(6);
  os << what << " at t = " << t << " (sup u = " << sup_u << ", ||u||_2 = " << u_l2
     << ", tail fraction = " << tail << ")";
  return os.str();
}

} // namespace

ScalarField rhs_v(const SimState& s, double lambda) {
  require_same_grid(s.u.grid, s.v.grid);
  ScalarField out = laplacian(s.v);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] += -lambda * s.v.values[i] + s.u.values[i];
  return out;
}

BlowupCheck blowup_check(const SimState& s, const RunConfig& cfg) {
  BlowupCheck result;
  const ModeTables mt(s.u.grid, cfg.dealias);
  std::vector<cd> u_hat(mt.nc);
  detail::rfft_forward(s.u.grid.n, s.u.values.data(), u_hat.data());
  result.tail_fraction = tail_fraction_half(u_hat, mt);
  result.sup_u = 0.0;
  for (double v : s.u.values) result.sup_u = std::max(result.sup_u, std::abs(v));
  const double threshold =
      cfg.blowup_sup_threshold > 0.0 ? cfg.blowup_sup_threshold : 1e4 * result.sup_u;
  double u_l2 = 0.0;
  if (result.sup_u > threshold) {
    for (double v : s.u.values) u_l2 += v * v;
    u_l2 = std::sqrt(u_l2 * s.u.grid.cell_area());
    result.fired = true;
    result.reason =
        format_blowup_reason(s.t, result.sup_u, u_l2, result.tail_fraction, "sup-norm escape");
  } else if (result.tail_fraction > cfg.blowup_tail_threshold) {
    for (double v : s.u.values) u_l2 += v * v;
    u_l2 = std::sqrt(u_l2 * s.u.grid.cell_area());
    result.fired = true;
    result.reason = format_blowup_reason(s.t, result.sup_u, u_l2, result.tail_fraction,
                                         "unresolved concentration");
  }
  return result;
}

SimState duhamel_step(const SimState& s, double dt, const RunConfig& cfg) {
  require_same_grid(s.u.grid, s.v.grid);
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  if (dt > cfg.dt * (1.0 + 1e-12)) throw std::invalid_argument("step size exceeds configured dt");
  for (double v : s.u.values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite field");
  for (double v : s.v.values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite field");

  const ModeTables mt(s.u.grid, cfg.dealias);
  const StepOps ops(mt, dt, cfg.lambda);
  Workspace ws(s.u.grid.n);
  std::vector<cd> u_hat(mt.nc), v_hat(mt.nc), nl_n(mt.nc), ua(mt.nc), va(mt.nc);
  detail::rfft_forward(s.u.grid.n, s.u.values.data(), u_hat.data());
  detail::rfft_forward(s.v.grid.n, s.v.values.data(), v_hat.data());
  etd_step(u_hat, v_hat, mt, ops, cfg, ws, nl_n, ua, va);

  SimState next{s.t + dt, zeros(s.u.grid), zeros(s.v.grid)};
  detail::rfft_inverse(s.u.grid.n, u_hat.data(), next.u.values.data());
  detail::rfft_inverse(s.v.grid.n, v_hat.data(), next.v.values.data());

  const BlowupCheck bc = blowup_check(next, cfg);
  if (bc.fired) throw BlowupDetected("blowup detected: " + bc.reason, s.t + 0.5 * dt);
  double min_u = 0.0, max_u = 0.0;
  for (double v : next.u.values) {
    min_u = std::min(min_u, v);
    max_u = std::max(max_u, v);
  }
  if (min_u < -cfg.tol_neg_rel * std::max(max_u, 1e-300)) {
    std::ostringstream os;
    os.precision(6);
    os << "resolution failure: negativity " << min_u << " exceeds tolerance at t = " << next.t;
    throw ResolutionFailure(os.str(), next.t);
  }
  return next;
}

RunResult run(const ScalarField& u0, const ScalarField& v0, const RunConfig& cfg) {
  require_same_grid(u0.grid, cfg.grid);
  require_same_grid(v0.grid, cfg.grid);
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw std::invalid_argument("dt and t_end must be positive");

  double min0 = 0.0, mass_u0 = 0.0, mass_v0 = 0.0, sup_u0 = 0.0;
  for (double v : u0.values) {
    min0 = std::min(min0, v);
    sup_u0 = std::max(sup_u0, v);
  }
  if (min0 < 0.0) throw std::invalid_argument("initial data must be nonnegative");
  for (double v : v0.values)
    if (v < 0.0) throw std::invalid_argument("initial data must be nonnegative");
  mass_u0 = integrate(u0);
  mass_v0 = integrate(v0);
  if (!(mass_u0 > 0.0)) throw std::invalid_argument("initial cell density must not vanish");
  if (cfg.coupling != Coupling::decoupled && !(mass_v0 > 0.0))
    throw std::invalid_argument("initial chemical field must not vanish");

  // Containment precondition: the box is a stand-in for the plane, so the
  // cell mass must sit well inside it.
  {
    const double quarter = 0.25 * cfg.grid.box_length;
    double outside = 0.0;
    for (int iy = 0; iy < cfg.grid.n; ++iy)
      for (int ix = 0; ix < cfg.grid.n; ++ix) {
        const double x = cfg.grid.coord(ix), y = cfg.grid.coord(iy);
        if (std::hypot(x, y) > quarter) outside += u0.at(ix, iy);
      }
    outside *= cfg.grid.cell_area();
    if (outside > 1e-10 * mass_u0)
      throw std::invalid_argument("initial data tail mass exceeds box tolerance");
  }

  RunConfig rcfg = cfg;
  if (rcfg.blowup_sup_threshold <= 0.0) rcfg.blowup_sup_threshold = 1e4 * sup_u0;
  rcfg.diag_every = std::max(1, cfg.diag_every);

  const long n_steps = std::lround(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  const ModeTables mt(cfg.grid, cfg.dealias);
  const StepOps ops(mt, cfg.dt, cfg.lambda);
  Workspace ws(cfg.grid.n);
  std::vector<cd> u_hat(mt.nc), v_hat(mt.nc), nl_n(mt.nc), ua(mt.nc), va(mt.nc);
  detail::rfft_forward(cfg.grid.n, u0.values.data(), u_hat.data());
  detail::rfft_forward(cfg.grid.n, v0.values.data(), v_hat.data());

  RunResult result;
  result.status = RunStatus::completed;

  const int snap_count = std::max(2, cfg.snapshot_count);
  std::vector<long> snap_steps(snap_count);
  for (int i = 0; i < snap_count; ++i)
    snap_steps[i] = std::lround(static_cast<double>(i) * n_steps / (snap_count - 1));

  double t = 0.0;
  double t_prev = 0.0;
  ScalarField u_phys = zeros(cfg.grid);
  ScalarField v_phys = zeros(cfg.grid);

  for (long step = 0;; ++step) {
    detail::rfft_inverse(cfg.grid.n, u_hat.data(), u_phys.values.data());

    double min_u = 0.0, max_u = 0.0;
    bool finite = true;
    for (double v : u_phys.values) {
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
      min_u = std::min(min_u, v);
      max_u = std::max(max_u, v);
    }
    if (!finite) {
      result.status = RunStatus::failed;
      result.t_star = t;
      result.reason = "numerical failure: non-finite state";
      break;
    }

    // Detector order matters: a collapsing peak first pollutes the spectral
    // tail, then rings negative; blowup must win over resolution failure.
    const double tail = tail_fraction_half(u_hat, mt);
    if (max_u > rcfg.blowup_sup_threshold || tail > rcfg.blowup_tail_threshold) {
      double u_l2 = 0.0;
      for (double v : u_phys.values) u_l2 += v * v;
      u_l2 = std::sqrt(u_l2 * cfg.grid.cell_area());
      result.status = RunStatus::blown_up;
      result.t_star = step == 0 ? 0.0 : 0.5 * (t_prev + t);
      result.reason = format_blowup_reason(
          t, max_u, u_l2, tail,
          max_u > rcfg.blowup_sup_threshold ? "sup-norm escape" : "unresolved concentration");
      break;
    }
    if (min_u < -rcfg.tol_neg_rel * std::max(max_u, 1e-300)) {
      std::ostringstream os;
      os.precision(6);
      os << "resolution failure: negativity " << min_u << " at t = " << t;
      result.status = RunStatus::failed;
      result.t_star = t;
      result.reason = os.str();
      break;
    }

    const bool last = step >= n_steps;
    const bool row_due = step % rcfg.diag_every == 0 || last;
    const bool snap_due = std::find(snap_steps.begin(), snap_steps.end(), step) != snap_steps.end();
    if (row_due || snap_due) {
      detail::rfft_inverse(cfg.grid.n, v_hat.data(), v_phys.values.data());
      SimState state{t, u_phys, v_phys};
      if (row_due) result.rows.push_back(compute_row(state, rcfg));
      if (snap_due) result.snapshots.push_back(std::move(state));
    }
    if (last) break;

    const double dt_step = std::min(cfg.dt, cfg.t_end - t);
    if (dt_step < cfg.dt * (1.0 - 1e-9)) {
      const StepOps ops_last(mt, dt_step, cfg.lambda);
      etd_step(u_hat, v_hat, mt, ops_last, rcfg, ws, nl_n, ua, va);
    } else {
      etd_step(u_hat, v_hat, mt, ops, rcfg, ws, nl_n, ua, va);
    }
    t_prev = t;
    t = (step + 1 < n_steps) ? (step + 1) * cfg.dt : cfg.t_end;
  }

  result.t_final = result.status == RunStatus::completed ? t : t_prev;
  if (result.rows.size() >= 3) fill_fm_residuals(result.rows);
  for (const DiagnosticsRow& row : result.rows)
    result.max_mass_drift_rel = std::max(result.max_mass_drift_rel,
                                         std::abs(row.mass_u - result.rows[0].mass_u) /
                                             std::abs(result.rows[0].mass_u));
  return result;
}

} // namespace ks2d
