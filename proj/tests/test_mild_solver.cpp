#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ks2d/field_ops.hpp"
#include "ks2d/solver.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace ks2d;
using support::make_gaussian;
using support::rel_err;
using support::rel_l2_diff;

namespace {

RunConfig base_config(const GridSpec& g) {
  RunConfig cfg;
  cfg.grid = g;
  return cfg;
}

// A state with all mass in one cell: flat spectrum, worst resolvable data.
SimState spike_state(const GridSpec& g) {
  SimState s{0.0, zeros(g), zeros(g)};
  s.u.values[g.size() / 2 + g.n / 2] = 1.0;
  s.v = make_gaussian(g, 1.0, 2.0);
  return s;
}

} // namespace

TEST_CASE("a flux-frozen step advances u by pure heat flow") {
  const GridSpec g = make_grid(64, 16.0);
  SimState s{0.0, make_gaussian(g, 4.0 * M_PI, 0.55), make_gaussian(g, 1.0, 1.5)};
  RunConfig cfg = base_config(g);
  cfg.coupling = Coupling::no_flux;
  cfg.dt = 1e-3;
  for (Scheme sch : {Scheme::etd1, Scheme::etd2}) {
    cfg.scheme = sch;
    const SimState next = duhamel_step(s, cfg.dt, cfg);
    const ScalarField exact = heat_propagate(s.u, cfg.dt);
    CHECK(rel_l2_diff(next.u, exact) < 1e-13);
    CHECK(next.t == doctest::Approx(cfg.dt));
  }
}

TEST_CASE("integral of v follows the closed form for both lambda regimes") {
  const GridSpec g = make_grid(64, 16.0);
  const ScalarField u0 = make_gaussian(g, 4.0 * M_PI, 0.55);
  const ScalarField v0 = make_gaussian(g, 1.0, 1.1);
  const double mu = integrate(u0), mv = integrate(v0);

  for (double lambda : {0.0, 0.7}) {
    RunConfig cfg = base_config(g);
    cfg.lambda = lambda;
    cfg.dt = 1e-3;
    cfg.t_end = 0.5;
    cfg.diag_every = 50;
    cfg.tol_neg_rel = 1e-3; // coarse grid rings; this case probes the zero modes only
    const RunResult res = run(u0, v0, cfg);
    REQUIRE(res.status == RunStatus::completed);
    for (const DiagnosticsRow& row : res.rows) {
      const double expected =
          lambda == 0.0 ? mv + row.t * mu
                        : std::exp(-lambda * row.t) * mv +
                              (1.0 - std::exp(-lambda * row.t)) / lambda * mu;
      CHECK(rel_err(row.int_v, expected) < 1e-9);
    }
    CHECK(res.max_mass_drift_rel < 1e-12);
  }
}

TEST_CASE("convergence order of the two integrators") {
  const GridSpec g = make_grid(128, 20.0);
  const ScalarField u0 = make_gaussian(g, 8.0 * M_PI, 0.7);
  const ScalarField v0 = make_gaussian(g, 1.0, 1.4);
  const double T = 0.25;

  auto final_u = [&](Scheme sch, double dt) {
    RunConfig cfg = base_config(g);
    cfg.scheme = sch;
    cfg.dt = dt;
    cfg.t_end = T;
    cfg.diag_every = 1 << 20;
    cfg.snapshot_count = 2;
    const RunResult res = run(u0, v0, cfg);
    REQUIRE(res.status == RunStatus::completed);
    return res.snapshots.back().u;
  };

  for (Scheme sch : {Scheme::etd1, Scheme::etd2}) {
    const ScalarField a = final_u(sch, 2e-3);
    const ScalarField b = final_u(sch, 1e-3);
    const ScalarField c = final_u(sch, 5e-4);
    const double e1 = rel_l2_diff(a, b);
    const double e2 = rel_l2_diff(b, c);
    const double ratio = e1 / e2;
    if (sch == Scheme::etd1) {
      CHECK(ratio > 1.7);
      CHECK(ratio < 2.5);
    } else {
      CHECK(ratio > 3.0);
      CHECK(ratio < 5.2);
    }
  }
}

TEST_CASE("the two integrators agree in the small-step limit") {
  const GridSpec g = make_grid(64, 16.0);
  const ScalarField u0 = make_gaussian(g, 4.0 * M_PI, 0.55);
  const ScalarField v0 = make_gaussian(g, 1.0, 1.1);
  RunConfig cfg = base_config(g);
  cfg.dt = 1e-4;
  cfg.t_end = 0.1;
  cfg.snapshot_count = 2;
  cfg.tol_neg_rel = 1e-3; // coarse grid rings; the comparison is scheme-vs-scheme
  cfg.scheme = Scheme::etd1;
  const RunResult r1 = run(u0, v0, cfg);
  cfg.scheme = Scheme::etd2;
  const RunResult r2 = run(u0, v0, cfg);
  REQUIRE(r1.status == RunStatus::completed);
  REQUIRE(r2.status == RunStatus::completed);
  CHECK(rel_l2_diff(r1.snapshots.back().u, r2.snapshots.back().u) < 5e-3);
}

TEST_CASE("subcritical run completes with a non-increasing free energy") {
  const GridSpec g = make_grid(128, 20.0);
  const ScalarField u0 = make_gaussian(g, 4.0 * M_PI, 0.7);
  const ScalarField v0 = make_gaussian(g, 1.0, 1.4);
  RunConfig cfg = base_config(g);
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.diag_every = 10;
  const RunResult res = run(u0, v0, cfg);
  REQUIRE(res.status == RunStatus::completed);
  CHECK(res.t_final == doctest::Approx(1.0));
  CHECK(res.rows.front().t == 0.0);
  CHECK(res.rows.back().t == doctest::Approx(1.0));
  REQUIRE(res.snapshots.size() == 5);
  CHECK(res.snapshots[1].t == doctest::Approx(0.25));
  CHECK(res.snapshots[4].t == doctest::Approx(1.0));

  const MonotonicityReport rep = fm_monotonicity_check(res.rows, cfg.lambda);
  CHECK(rep.violations == 0);
  CHECK(rep.bound_rate == 0.0);

  // v stays essentially nonnegative under the positive source
  double min_v = 0.0, max_v = 0.0;
  for (const DiagnosticsRow& row : res.rows) max_v = std::max(max_v, row.v_l2);
  for (double x : res.snapshots.back().v.values) min_v = std::min(min_v, x);
  CHECK(min_v > -1e-10 * max_v);
}

TEST_CASE("dissipative lambda run respects the slope bound") {
  const GridSpec g = make_grid(128, 20.0);
  const ScalarField u0 = make_gaussian(g, 4.0 * M_PI, 0.7);
  const ScalarField v0 = make_gaussian(g, 1.0, 1.4);
  RunConfig cfg = base_config(g);
  cfg.lambda = 0.5;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.diag_every = 10;
  const RunResult res = run(u0, v0, cfg);
  REQUIRE(res.status == RunStatus::completed);
  const MonotonicityReport rep = fm_monotonicity_check(res.rows, cfg.lambda);
  CHECK(rep.bound_rate == doctest::Approx(res.rows[0].mass_u + res.rows[0].int_v));
  CHECK(rep.violations == 0);
}

TEST_CASE("free-energy balance closes when both fields relax freely") {
  const GridSpec g = make_grid(128, 20.0);
  const ScalarField u0 = make_gaussian(g, 4.0 * M_PI, 0.7);
  RunConfig cfg = base_config(g);
  cfg.coupling = Coupling::decoupled;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.diag_every = 1;
  const RunResult res = run(u0, zeros(g), cfg);
  REQUIRE(res.status == RunStatus::completed);
  REQUIRE(res.rows.size() >= 100);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < res.rows.size(); ++k)
    worst = std::max(worst, res.rows[k].fm_residual);
  CHECK(worst < 5e-3);
  for (const DiagnosticsRow& row : res.rows) CHECK(row.neg_mass < 1e-10 * row.mass_u);
}

TEST_CASE("supercritical mass trips the concentration detector") {
  const GridSpec g = make_grid(128, 16.0);
  const ScalarField u0 = make_gaussian(g, 12.0 * M_PI, 0.5);
  const ScalarField v0 = make_gaussian(g, 1.0, 1.0);
  RunConfig cfg = base_config(g);
  cfg.dt = 5e-4;
  cfg.t_end = 3.0;
  // Collapse scenario: the run is expected to outgrow the grid, so the
  // negativity watchdog is held back and loss of the solution is called by
  // spectral pileup at the grid scale (sup-norm escape as backstop).
  cfg.blowup_tail_threshold = 0.01;
  cfg.tol_neg_rel = 5e-3;
  const RunResult res = run(u0, v0, cfg);
  REQUIRE(res.status == RunStatus::blown_up);
  CHECK(res.t_star > 0.5);
  CHECK(res.t_star < 2.8);
  CHECK(!res.reason.empty());
  CHECK(res.t_final <= res.t_star);
}

TEST_CASE("detector classification on a single-cell spike") {
  const GridSpec g = make_grid(64, 16.0);
  const SimState s = spike_state(g);
  RunConfig cfg = base_config(g);

  cfg.blowup_sup_threshold = 1e9;
  cfg.blowup_tail_threshold = 0.05;
  BlowupCheck bc = blowup_check(s, cfg);
  CHECK(bc.fired);
  CHECK(bc.reason.find("unresolved concentration") != std::string::npos);

  cfg.blowup_sup_threshold = 0.5;
  bc = blowup_check(s, cfg);
  CHECK(bc.fired);
  CHECK(bc.reason.find("sup-norm escape") != std::string::npos);
  CHECK(bc.sup_u == doctest::Approx(1.0));
}

TEST_CASE("a stepped state past the detector throws") {
  const GridSpec g = make_grid(64, 16.0);
  const SimState s = spike_state(g);
  RunConfig cfg = base_config(g);
  cfg.blowup_tail_threshold = 1e-3;
  CHECK_THROWS_AS(duhamel_step(s, cfg.dt, cfg), BlowupDetected);
  try {
    duhamel_step(s, cfg.dt, cfg);
  } catch (const BlowupDetected& e) {
    CHECK(e.t_star == doctest::Approx(0.5 * cfg.dt));
  }
}

TEST_CASE("invalid initial data and step sizes are rejected") {
  const GridSpec g = make_grid(64, 16.0);
  const ScalarField u0 = make_gaussian(g, 4.0 * M_PI, 0.55);
  const ScalarField v0 = make_gaussian(g, 1.0, 1.1);
  RunConfig cfg = base_config(g);
  cfg.t_end = 0.01;

  CHECK_THROWS_WITH(run(zeros(g), v0, cfg), "initial cell density must not vanish");
  CHECK_THROWS_WITH(run(u0, zeros(g), cfg), "initial chemical field must not vanish");

  ScalarField dented = u0;
  dented.values[0] = -1e-3;
  CHECK_THROWS_WITH(run(dented, v0, cfg), "initial data must be nonnegative");

  const ScalarField off_center = make_gaussian(g, 4.0 * M_PI, 0.55, 6.0, 0.0);
  CHECK_THROWS_WITH(run(off_center, v0, cfg), "initial data tail mass exceeds box tolerance");

  const SimState s{0.0, u0, v0};
  CHECK_THROWS_AS(duhamel_step(s, 2.0 * cfg.dt, cfg), std::invalid_argument);
  CHECK_THROWS_AS(duhamel_step(s, 0.0, cfg), std::invalid_argument);

  RunConfig decoupled = cfg;
  decoupled.coupling = Coupling::decoupled;
  CHECK_NOTHROW(run(u0, zeros(g), decoupled)); // v may vanish when unsourced
}

TEST_CASE("chemical rate of change matches its spectral definition") {
  const GridSpec g = make_grid(64, 16.0);
  SimState s{0.0, make_gaussian(g, 4.0 * M_PI, 0.55), make_gaussian(g, 1.0, 1.1)};
  const double lambda = 0.3;
  const ScalarField r = rhs_v(s, lambda);
  ScalarField expected = laplacian(s.v);
  for (std::size_t i = 0; i < expected.values.size(); ++i)
    expected.values[i] += -lambda * s.v.values[i] + s.u.values[i];
  CHECK(rel_l2_diff(r, expected) == 0.0);
  const ScalarField vt = dtv_field(s, lambda, Coupling::full);
  CHECK(rel_l2_diff(r, vt) < 1e-15);
}
