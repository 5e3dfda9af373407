#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ks2d/experiment.hpp"
#include "ks2d/field_ops.hpp"
#include "ks2d/solver.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace ks2d;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path test_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "ks2d_test_experiment";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string write_cfg(const std::string& name, const std::string& body) {
  const fs::path p = test_root() / name;
  std::ofstream out(p);
  out << body;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

// Small horizon, coarse grid: the watchdog tolerance is loosened because a
// 64-point grid rings at the dealias boundary.
std::string fast_body(const std::string& extra = "") {
  return "name = fast\n"
         "mass = critical\n"
         "sigma = 0.55\n"
         "n = 64\n"
         "box = 16\n"
         "dt = 2e-3\n"
         "t_end = 0.05\n"
         "diag_every = 5\n"
         "snapshots = 2\n"
         "tol_neg = 1e-4\n" +
         extra;
}

} // namespace

TEST_CASE("mass literals") {
  CHECK(parse_mass("critical") == 8.0 * kPi);
  CHECK(parse_mass("4pi") == 4.0 * kPi);
  CHECK(parse_mass("12pi") == 12.0 * kPi);
  CHECK(parse_mass("2.5pi") == 2.5 * kPi);
  CHECK(parse_mass("25.13") == 25.13);
  CHECK(parse_mass("  8pi ") == 8.0 * kPi);

  CHECK_THROWS_WITH_AS(parse_mass(""), "invalid mass literal: ", std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_mass("pi"), "invalid mass literal: pi", std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_mass("xpi"), "invalid mass literal: xpi",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_mass("four"), "invalid mass literal: four",
                       std::invalid_argument);
}

TEST_CASE("minimal config expands the critical keyword") {
  const Scenario sc = parse_config(write_cfg("minimal.cfg", "mass = critical\n"));
  CHECK(std::abs(sc.mass - 8.0 * kPi) <= 1e-12);
  CHECK(sc.family == "gaussian");
  CHECK(sc.n == 256);
  CHECK(sc.box == 16.0);
  CHECK(sc.lambda == 0.0);
  CHECK(sc.scheme == Scheme::etd2);
  CHECK(sc.coupling == Coupling::full);
}

TEST_CASE("full config round trip") {
  const std::string body =
      "# comment line\n"
      "name = trip   # trailing comment\n"
      "family = two_bump\n"
      "mass = 4pi\n"
      "sigma = 0.6\n"
      "sep = 3.5\n"
      "center_x = 0.25\n"
      "v0_mass = 2\n"
      "v0_sigma = 1.5\n"
      "seed = 7\n"
      "n = 128\n"
      "box = 20\n"
      "lambda = 1\n"
      "dt = 5e-4\n"
      "t_end = 2\n"
      "scheme = etd1\n"
      "coupling = no_flux\n"
      "tail_threshold = 0.2\n"
      "tol_neg = 1e-6\n"
      "sup_threshold = 1e5\n"
      "diag_every = 25\n"
      "snapshots = 4\n"
      "radii = 0.3, 0.5\n"
      "picard_T = 2e-2\n"
      "picard_p = 1.4\n";
  const Scenario sc = parse_config(write_cfg("trip.cfg", body));
  CHECK(sc.name == "trip");
  CHECK(sc.family == "two_bump");
  CHECK(sc.mass == 4.0 * kPi);
  CHECK(sc.sigma == 0.6);
  CHECK(sc.sep == 3.5);
  CHECK(sc.center_x == 0.25);
  CHECK(sc.v0_mass == 2.0);
  CHECK(sc.v0_sigma == 1.5);
  CHECK(sc.seed == 7);
  CHECK(sc.n == 128);
  CHECK(sc.box == 20.0);
  CHECK(sc.lambda == 1.0);
  CHECK(sc.dt == 5e-4);
  CHECK(sc.t_end == 2.0);
  CHECK(sc.scheme == Scheme::etd1);
  CHECK(sc.coupling == Coupling::no_flux);
  CHECK(sc.tail_threshold == 0.2);
  CHECK(sc.tol_neg == 1e-6);
  CHECK(sc.sup_threshold == 1e5);
  CHECK(sc.diag_every == 25);
  CHECK(sc.snapshots == 4);
  REQUIRE(sc.radii.size() == 2);
  CHECK(sc.radii[0] == 0.3);
  CHECK(sc.radii[1] == 0.5);
  CHECK(sc.picard_T == 2e-2);
  CHECK(sc.picard_p == 1.4);

  const RunConfig rc = sc.run_config();
  CHECK(rc.grid.n == 128);
  CHECK(rc.grid.box_length == 20.0);
  CHECK(rc.lambda == 1.0);
  CHECK(rc.tol_neg_rel == 1e-6);
  CHECK(rc.diag_radii.size() == 2);
  const PicardConfig pc = sc.picard_config();
  CHECK(pc.T == 2e-2);
  CHECK(pc.p == 1.4);
  CHECK(pc.lambda == 1.0);
}

TEST_CASE("config rejection") {
  SUBCASE("unresolvable width") {
    CHECK_THROWS_WITH_AS(
        parse_config(write_cfg("bad_sigma.cfg", "mass = critical\nsigma = 0\n")),
        "sigma must exceed 2h", std::invalid_argument);
  }
  SUBCASE("unknown key is named") {
    CHECK_THROWS_WITH_AS(
        parse_config(write_cfg("bad_key.cfg", "mass = critical\ngamma = 1\n")),
        "unknown key: gamma", std::invalid_argument);
  }
  SUBCASE("mass is required") {
    CHECK_THROWS_WITH_AS(parse_config(write_cfg("no_mass.cfg", "sigma = 0.5\n")),
                         "missing required key: mass", std::invalid_argument);
  }
  SUBCASE("monitor radii are capped at L/32") {
    CHECK_THROWS_WITH_AS(
        parse_config(write_cfg("bad_radii.cfg", "mass = critical\nradii = 1.0\n")),
        "radii entry 1.000000 too large for the box (limit L/32)", std::invalid_argument);
  }
  SUBCASE("grid floor") {
    CHECK_THROWS_WITH_AS(parse_config(write_cfg("bad_n.cfg", "mass = critical\nn = 4\n")),
                         "n must be at least 8", std::invalid_argument);
  }
  SUBCASE("malformed number") {
    CHECK_THROWS_WITH_AS(parse_config(write_cfg("bad_num.cfg", "mass = critical\nn = abc\n")),
                         "invalid value for key: n", std::invalid_argument);
  }
  SUBCASE("malformed line") {
    CHECK_THROWS_WITH_AS(
        parse_config(write_cfg("bad_line.cfg", "mass = critical\njust words\n")),
        "expected key = value, got: just words", std::invalid_argument);
  }
  SUBCASE("unknown enum values") {
    CHECK_THROWS_WITH_AS(
        parse_config(write_cfg("bad_scheme.cfg", "mass = critical\nscheme = rk4\n")),
        "unknown scheme: rk4", std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_config(write_cfg("bad_family.cfg", "mass = critical\nfamily = ring\n")),
        "unknown family: ring", std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_config(write_cfg("bad_coupling.cfg", "mass = critical\ncoupling = half\n")),
        "unknown coupling: half", std::invalid_argument);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_config((test_root() / "nope.cfg").string()),
                    std::invalid_argument);
  }
}

TEST_CASE("initial data masses are exact") {
  SUBCASE("gaussian at the critical mass") {
    const Scenario sc = parse_config(write_cfg("id_gauss.cfg", fast_body()));
    const InitialData init = make_initial_data(sc, sc.grid());
    CHECK(std::abs(init.u0_mass - 8.0 * kPi) <= 1e-12);
    CHECK(std::abs(integrate(init.u0) - 8.0 * kPi) <= 1e-12);
    CHECK(std::abs(init.v0_mass - 1.0) <= 1e-12);
    double u_min = init.u0.values[0], v_min = init.v0.values[0];
    for (double x : init.u0.values) u_min = std::min(u_min, x);
    for (double x : init.v0.values) v_min = std::min(v_min, x);
    CHECK(u_min >= 0.0);
    CHECK(v_min >= 0.0);
  }
  SUBCASE("two bumps split the total") {
    const Scenario sc = parse_config(
        write_cfg("id_two.cfg", fast_body("family = two_bump\nsep = 3\nmass = 8pi\n")));
    const InitialData init = make_initial_data(sc, sc.grid());
    CHECK(std::abs(init.u0_mass - 8.0 * kPi) <= 1e-12);
  }
  SUBCASE("chemical gradient matches the closed form") {
    // v0 is a mass-M gaussian of width s, so ||grad v0||_2 = M / (2 sqrt(pi) s^2).
    const Scenario sc = parse_config(
        write_cfg("id_grad.cfg", "mass = critical\nn = 128\nv0_mass = 2\nv0_sigma = 1.1\n"));
    const InitialData init = make_initial_data(sc, sc.grid());
    const double expected = 2.0 / (2.0 * std::sqrt(kPi) * 1.1 * 1.1);
    CHECK(init.v0_grad_l2 == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("two-bump field is mirror symmetric") {
  const Scenario sc = parse_config(
      write_cfg("sym.cfg", fast_body("family = two_bump\nsep = 3\n")));
  const GridSpec g = sc.grid();
  const InitialData init = make_initial_data(sc, g);
  for (int iy = 1; iy < g.n; iy += 7)
    for (int ix = 1; ix < g.n; ix += 7) {
      CHECK(init.u0.at(ix, iy) == init.u0.at(g.n - ix, iy));
      CHECK(init.u0.at(ix, iy) == init.u0.at(ix, g.n - iy));
    }
}

TEST_CASE("output bundle") {
  const Scenario sc = parse_config(write_cfg("bundle.cfg", fast_body()));
  const InitialData init = make_initial_data(sc, sc.grid());
  const RunResult res = run(init.u0, init.v0, sc.run_config());
  REQUIRE(res.status == RunStatus::completed);

  const std::string dir1 = (test_root() / "bundle1").string();
  const std::string dir2 = (test_root() / "bundle2").string();
  const auto written = emit_outputs(sc, init, res, dir1);
  emit_outputs(sc, init, res, dir2);

  SUBCASE("file inventory") {
    CHECK(written.size() == 1 + 2 * res.snapshots.size() + 3 + 1);
    for (const std::string& p : written) CHECK(fs::exists(p));
    CHECK(fs::exists(dir1 + "/diagnostics.csv"));
    CHECK(fs::exists(dir1 + "/u_0.field"));
    CHECK(fs::exists(dir1 + "/v_0.field"));
    CHECK(fs::exists(dir1 + "/manifest.json"));
  }

  SUBCASE("reruns are byte identical except the timestamp") {
    CHECK(slurp(dir1 + "/diagnostics.csv") == slurp(dir2 + "/diagnostics.csv"));
    CHECK(slurp(dir1 + "/u_0.field") == slurp(dir2 + "/u_0.field"));
    CHECK(slurp(dir1 + "/plot_fm.csv") == slurp(dir2 + "/plot_fm.csv"));
    const auto l1 = lines_of(slurp(dir1 + "/manifest.json"));
    const auto l2 = lines_of(slurp(dir2 + "/manifest.json"));
    REQUIRE(l1.size() == l2.size());
    for (std::size_t i = 0; i < l1.size(); ++i) {
      if (l1[i].find("\"timestamp\"") != std::string::npos) continue;
      CHECK(l1[i] == l2[i]);
    }
  }

  SUBCASE("manifest records the outcome") {
    const auto man = nlohmann::json::parse(slurp(dir1 + "/manifest.json"));
    CHECK(man["outcome"]["status"] == "completed");
    CHECK(!man["outcome"].contains("t_star"));
    CHECK(man["outcome"]["t_final"].get<double>() == doctest::Approx(sc.t_end));
    CHECK(man["config"]["n"] == 64);
    CHECK(man["config"]["seed"] == 1);
    CHECK(man["initial_data"]["u0_mass"].get<double>() ==
          doctest::Approx(8.0 * kPi).epsilon(1e-14));
  }

  SUBCASE("plot slices carry headers and conserved mass") {
    const auto fm = lines_of(slurp(dir1 + "/plot_fm.csv"));
    const auto mass = lines_of(slurp(dir1 + "/plot_mass.csv"));
    const auto sup = lines_of(slurp(dir1 + "/plot_sup.csv"));
    REQUIRE(fm.size() == res.rows.size() + 1);
    REQUIRE(mass.size() == res.rows.size() + 1);
    REQUIRE(sup.size() == res.rows.size() + 1);
    CHECK(fm[0] == "t,f_m");
    CHECK(mass[0] == "t,mass_u");
    CHECK(sup[0] == "t,u_sup");
    for (std::size_t i = 1; i < mass.size(); ++i) {
      const auto comma = mass[i].find(',');
      REQUIRE(comma != std::string::npos);
      const double m = std::stod(mass[i].substr(comma + 1));
      CHECK(std::abs(m - sc.mass) <= 1e-8 * sc.mass);
    }
  }
}

TEST_CASE("blowup manifest names the fired criterion") {
  const std::string body =
      "name = super\n"
      "mass = 20pi\n"
      "sigma = 0.55\n"
      "n = 64\n"
      "box = 16\n"
      "dt = 2e-3\n"
      "t_end = 4\n"
      "tol_neg = 5e-2\n"
      "tail_threshold = 0.05\n"
      "diag_every = 20\n"
      "snapshots = 2\n";
  const Scenario sc = parse_config(write_cfg("super.cfg", body));
  const InitialData init = make_initial_data(sc, sc.grid());
  const RunResult res = run(init.u0, init.v0, sc.run_config());
  REQUIRE(res.status == RunStatus::blown_up);

  const std::string dir = (test_root() / "super_out").string();
  emit_outputs(sc, init, res, dir);
  const auto man = nlohmann::json::parse(slurp(dir + "/manifest.json"));
  CHECK(man["outcome"]["status"] == "blowup");
  CHECK(man["outcome"]["t_star"].get<double>() > 0.0);
  CHECK(man["outcome"]["t_star"].get<double>() > man["outcome"]["t_final"].get<double>());
  CHECK(!man["outcome"]["criterion"].get<std::string>().empty());
  CHECK(fs::exists(dir + "/u_0.field"));
}

TEST_CASE("sweep over masses") {
  const Scenario base = parse_config(write_cfg("sweep_base.cfg", fast_body()));
  const std::string root = (test_root() / "sweep").string();
  const SweepResult sweep = sweep_mass(base, {"1pi", "2pi", "bogus"}, root, 1);

  REQUIRE(sweep.entries.size() == 3);
  CHECK(sweep.entries[0].label == "1pi");
  CHECK(sweep.entries[1].label == "2pi");
  CHECK(sweep.entries[2].label == "bogus");
  CHECK(sweep.entries[0].status == "completed");
  CHECK(sweep.entries[1].status == "completed");
  CHECK(sweep.entries[2].status == "failed");
  CHECK(sweep.entries[2].detail == "invalid mass literal: bogus");
  CHECK(sweep.entries[0].mass == doctest::Approx(kPi));
  CHECK(std::isfinite(sweep.entries[0].min_fm));
  CHECK(sweep.entries[0].final_sup_u > 0.0);
  CHECK(std::isnan(sweep.entries[0].t_star));

  CHECK(fs::exists(root + "/mass_1pi/manifest.json"));
  CHECK(fs::exists(root + "/mass_2pi/diagnostics.csv"));
  CHECK(!fs::exists(sweep.entries[2].out_dir));

  const auto table = lines_of(slurp(root + "/sweep.csv"));
  REQUIRE(table.size() == 4);
  CHECK(table[0] == "mass_label,mass,status,t_star,final_sup_u,min_fm,max_fm_residual,detail");
  CHECK(table[1].substr(0, 4) == "1pi,");
  CHECK(table[3].find("failed") != std::string::npos);

  CHECK_THROWS_WITH_AS(sweep_mass(base, {}, root, 1), "no masses requested",
                       std::invalid_argument);
}

TEST_CASE("parallel sweep matches serial") {
  const Scenario base = parse_config(write_cfg("par_base.cfg", fast_body()));
  const std::string r1 = (test_root() / "sweep_serial").string();
  const std::string r2 = (test_root() / "sweep_parallel").string();
  const SweepResult s1 = sweep_mass(base, {"1pi", "3pi"}, r1, 1);
  const SweepResult s2 = sweep_mass(base, {"1pi", "3pi"}, r2, 2);

  REQUIRE(s1.entries.size() == s2.entries.size());
  for (std::size_t i = 0; i < s1.entries.size(); ++i) {
    CHECK(s1.entries[i].status == s2.entries[i].status);
    CHECK(s1.entries[i].final_sup_u == s2.entries[i].final_sup_u);
    CHECK(s1.entries[i].min_fm == s2.entries[i].min_fm);
  }
  CHECK(slurp(r1 + "/mass_1pi/diagnostics.csv") == slurp(r2 + "/mass_1pi/diagnostics.csv"));
  CHECK(slurp(r1 + "/mass_3pi/diagnostics.csv") == slurp(r2 + "/mass_3pi/diagnostics.csv"));
}
