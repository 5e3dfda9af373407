#include "ks2d/picard.hpp"

#include "ks2d/field_ops.hpp"
#include "ks2d/solver.hpp"
#include "spectral_kernels.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace ks2d {
namespace {

using detail::cd;

ScalarField gradient_magnitude(const ScalarField& v) {
  auto [gx, gy] = gradient(v);
  ScalarField mag = zeros(v.grid);
  for (std::size_t i = 0; i < mag.values.size(); ++i)
    mag.values[i] = std::hypot(gx.values[i], gy.values[i]);
  return mag;
}

bool times_match(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)) + 1e-300; }

// One iterate held spectrally on the quadrature nodes.
struct NodeTraj {
  std::vector<std::vector<cd>> u, v; // [node][mode]
};

} // namespace

std::vector<double> log_spaced_times(double T, int count, double min_frac) {
  if (!(T > 0.0) || count < 1 || !(min_frac > 0.0) || !(min_frac < 1.0))
    throw std::invalid_argument("invalid time ladder");
  std::vector<double> out(count);
  for (int j = 1; j <= count; ++j)
    out[j - 1] = T * std::pow(min_frac, static_cast<double>(count - j) / std::max(count - 1, 1));
  out.back() = T;
  return out;
}

XtNorms weighted_xt_norms(const std::vector<SimState>& traj, double p,
                          const std::vector<double>& sample_times) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  if (!(p > 4.0 / 3.0) || !(p < 2.0)) throw std::invalid_argument("exponent out of range");
  const double q = p / (p - 1.0);
  XtNorms out;
  for (double t : sample_times) {
    const SimState* hit = nullptr;
    for (const SimState& s : traj)
      if (times_match(s.t, t)) {
        hit = &s;
        break;
      }
    if (!hit) throw std::invalid_argument("trajectory does not cover sample times");
    out.u_weighted = std::max(out.u_weighted, std::pow(t, 1.0 - 1.0 / p) * lp_norm(hit->u, p));
    out.gradv_weighted = std::max(
        out.gradv_weighted, std::pow(t, 0.5 - 1.0 / q) * lp_norm(gradient_magnitude(hit->v), q));
  }
  return out;
}

namespace {

// Weighted X_T seminorm of the difference of two node trajectories,
// evaluated at the node indices in sample_idx.
XtNorms node_distance(const NodeTraj& a, const NodeTraj& b, const std::vector<double>& s,
                      const std::vector<std::size_t>& sample_idx, const detail::ModeTables& mt,
                      const GridSpec& g, double p) {
  const double q = p / (p - 1.0);
  XtNorms out;
  std::vector<cd> diff(mt.nc);
  ScalarField phys = zeros(g), mag = zeros(g);
  std::vector<double> gx(g.size()), gy(g.size());
  for (std::size_t j : sample_idx) {
    const double t = s[j];
    for (std::size_t i = 0; i < mt.nc; ++i) diff[i] = a.u[j][i] - b.u[j][i];
    detail::rfft_inverse(mt.n, diff.data(), phys.values.data());
    out.u_weighted = std::max(out.u_weighted, std::pow(t, 1.0 - 1.0 / p) * lp_norm(phys, p));

    for (std::size_t i = 0; i < mt.nc; ++i) diff[i] = cd(0.0, mt.kxd[i]) * (a.v[j][i] - b.v[j][i]);
    detail::rfft_inverse(mt.n, diff.data(), gx.data());
    for (std::size_t i = 0; i < mt.nc; ++i) diff[i] = cd(0.0, mt.kyd[i]) * (a.v[j][i] - b.v[j][i]);
    detail::rfft_inverse(mt.n, diff.data(), gy.data());
    for (std::size_t i = 0; i < g.size(); ++i) mag.values[i] = std::hypot(gx[i], gy[i]);
    out.gradv_weighted =
        std::max(out.gradv_weighted, std::pow(t, 0.5 - 1.0 / q) * lp_norm(mag, q));
  }
  return out;
}

} // namespace

std::pair<SimState, PicardReport> picard_solve(const ScalarField& u0, const ScalarField& v0,
                                               const PicardConfig& pcfg) {
  require_same_grid(u0.grid, v0.grid);
  if (!(pcfg.p > 4.0 / 3.0) || !(pcfg.p < 2.0)) throw std::invalid_argument("exponent out of range");
  if (!(pcfg.T > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (pcfg.quad_nodes < 8) throw std::invalid_argument("need at least 8 quadrature nodes");
  if (pcfg.max_iter < 1) throw std::invalid_argument("need at least one iteration");
  for (double x : u0.values)
    if (x < 0.0) throw std::invalid_argument("initial data must be nonnegative");
  for (double x : v0.values)
    if (x < 0.0) throw std::invalid_argument("initial data must be nonnegative");
  if (!(integrate(u0) > 0.0)) throw std::invalid_argument("initial cell density must not vanish");
  if (pcfg.coupling != Coupling::decoupled && !(integrate(v0) > 0.0))
    throw std::invalid_argument("initial chemical field must not vanish");

  const GridSpec g = u0.grid;
  const detail::ModeTables mt(g, true);
  const int m = pcfg.quad_nodes;

  // node ladder s_0 = 0 < s_1 < ... < s_m = T, log-spaced
  std::vector<double> s(m + 1, 0.0);
  {
    const std::vector<double> ladder = log_spaced_times(pcfg.T, m, pcfg.s_min_frac);
    for (int j = 1; j <= m; ++j) s[j] = ladder[j - 1];
  }

  // which nodes the distance is measured on
  std::vector<std::size_t> sample_idx;
  if (pcfg.sample_times.empty()) {
    for (int j = 2; j <= m; j += 2) sample_idx.push_back(j);
  } else {
    for (double t : pcfg.sample_times) {
      std::size_t found = 0;
      bool ok = false;
      for (int j = 1; j <= m; ++j)
        if (times_match(s[j], t)) {
          found = j;
          ok = true;
          break;
        }
      if (!ok) throw std::invalid_argument("trajectory does not cover sample times");
      sample_idx.push_back(found);
    }
  }

  // per-segment propagators and log-trapezoid spans
  std::vector<std::vector<double>> segu(m + 1), segv(m + 1);
  std::vector<double> dlog(m + 1, 0.0);
  for (int j = 1; j <= m; ++j) {
    const double ds = s[j] - s[j - 1];
    segu[j].resize(mt.nc);
    segv[j].resize(mt.nc);
    for (std::size_t i = 0; i < mt.nc; ++i) {
      segu[j][i] = std::exp(-mt.k2[i] * ds);
      segv[j][i] = std::exp(-(mt.k2[i] + pcfg.lambda) * ds);
    }
    if (j >= 2) dlog[j] = std::log(s[j] / s[j - 1]);
  }

  std::vector<cd> u0_hat(mt.nc), v0_hat(mt.nc);
  detail::rfft_forward(g.n, u0.values.data(), u0_hat.data());
  detail::rfft_forward(g.n, v0.values.data(), v0_hat.data());

  auto alloc_traj = [&] {
    NodeTraj t;
    t.u.assign(m + 1, std::vector<cd>(mt.nc));
    t.v.assign(m + 1, std::vector<cd>(mt.nc));
    return t;
  };
  NodeTraj prev = alloc_traj(), next = alloc_traj();

  // free-evolution seed
  for (int j = 0; j <= m; ++j)
    for (std::size_t i = 0; i < mt.nc; ++i) {
      prev.u[j][i] = std::exp(-mt.k2[i] * s[j]) * u0_hat[i];
      prev.v[j][i] = std::exp(-(mt.k2[i] + pcfg.lambda) * s[j]) * v0_hat[i];
    }

  const bool with_flux = pcfg.coupling == Coupling::full;
  const bool with_source = pcfg.coupling != Coupling::decoupled;
  detail::Workspace ws(g.n);
  std::vector<std::vector<cd>> flux(m + 1, std::vector<cd>(mt.nc, cd(0.0, 0.0)));

  PicardReport report;
  int expanding_streak = 0;

  for (int iter = 1; iter <= pcfg.max_iter; ++iter) {
    if (with_flux)
      for (int j = 0; j <= m; ++j) {
        detail::flux_divergence(prev.u[j], prev.v[j], mt, ws);
        flux[j] = ws.nl;
      }

    next.u[0] = u0_hat;
    next.v[0] = v0_hat;
    for (int j = 1; j <= m; ++j) {
      // trapezoid on the first (tiny) segment, log-trapezoid afterwards:
      // contribution of [s_{j-1}, s_j] to the mild integral ending at s_j
      const double wa = j == 1 ? 0.5 * (s[1] - s[0]) : 0.5 * dlog[j] * s[j - 1];
      const double wb = j == 1 ? 0.5 * (s[1] - s[0]) : 0.5 * dlog[j] * s[j];
      for (std::size_t i = 0; i < mt.nc; ++i) {
        cd un = segu[j][i] * next.u[j - 1][i];
        if (with_flux) un += wa * segu[j][i] * flux[j - 1][i] + wb * flux[j][i];
        next.u[j][i] = un;
        cd vn = segv[j][i] * next.v[j - 1][i];
        if (with_source) vn += wa * segv[j][i] * prev.u[j - 1][i] + wb * prev.u[j][i];
        next.v[j][i] = vn;
      }
    }

    const XtNorms d = node_distance(next, prev, s, sample_idx, mt, g, pcfg.p);
    report.distances.push_back(d.total());
    report.iterations = iter;
    if (report.distances.size() >= 2) {
      const double prev_d = report.distances[report.distances.size() - 2];
      const double ratio = prev_d > 0.0 ? d.total() / prev_d : 0.0;
      report.ratios.push_back(ratio);
      expanding_streak = ratio > 1.0 ? expanding_streak + 1 : 0;
      if (expanding_streak >= 3) throw std::runtime_error("no contraction at this T");
    }
    prev.u.swap(next.u);
    prev.v.swap(next.v);
    if (d.total() < pcfg.tol) {
      report.converged = true;
      break;
    }
  }

  // weighted sup norms of the final iterate
  {
    NodeTraj zero = alloc_traj(); // all-zero trajectory
    const XtNorms n = node_distance(prev, zero, s, sample_idx, mt, g, pcfg.p);
    report.u_weighted = n.u_weighted;
    report.gradv_weighted = n.gradv_weighted;
  }

  SimState final_state{pcfg.T, zeros(g), zeros(g)};
  detail::rfft_inverse(g.n, prev.u[m].data(), final_state.u.values.data());
  detail::rfft_inverse(g.n, prev.v[m].data(), final_state.v.values.data());
  return {std::move(final_state), std::move(report)};
}

double continuous_dependence_probe(const ScalarField& u0, const ScalarField& v0,
                                   const ScalarField& du, const ScalarField& dv,
                                   const PicardConfig& pcfg) {
  require_same_grid(u0.grid, v0.grid);
  require_same_grid(u0.grid, du.grid);
  require_same_grid(u0.grid, dv.grid);
  if (lp_norm(du, 1.0) > 0.01 * lp_norm(u0, 1.0))
    throw std::invalid_argument("perturbation too large");

  const double denom = lp_norm(du, 1.0) + lp_norm(gradient_magnitude(dv), 2.0);
  if (denom == 0.0) return 0.0;

  RunConfig rc;
  rc.grid = u0.grid;
  rc.lambda = pcfg.lambda;
  rc.coupling = pcfg.coupling;
  rc.dt = pcfg.T / 1024.0;
  rc.t_end = pcfg.T;
  rc.diag_every = 1 << 30;
  rc.snapshot_count = 9;
  // The probe compares two trajectories; it does not certify positivity.
  // Benign dealias ripple on coarse grids must not abort the measurement.
  rc.tol_neg_rel = 1e-3;

  ScalarField u0b = u0, v0b = v0;
  for (std::size_t i = 0; i < u0b.values.size(); ++i) {
    u0b.values[i] += du.values[i];
    v0b.values[i] += dv.values[i];
  }
  const RunResult a = run(u0, v0, rc);
  const RunResult b = run(u0b, v0b, rc);
  if (a.status != RunStatus::completed || b.status != RunStatus::completed)
    throw std::runtime_error("trajectory failed during dependence probe");

  double sup = 0.0;
  for (std::size_t k = 1; k < a.snapshots.size(); ++k) {
    ScalarField diff = a.snapshots[k].u;
    for (std::size_t i = 0; i < diff.values.size(); ++i)
      diff.values[i] -= b.snapshots[k].u.values[i];
    sup = std::max(sup, lp_norm(diff, 1.0));
  }
  return sup / denom;
}

} // namespace ks2d
