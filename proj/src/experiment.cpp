#include "ks2d/experiment.hpp"

#include "ks2d/diagnostics.hpp"
#include "ks2d/field_ops.hpp"
#include "ks2d/io.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ks2d {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty())
    throw std::invalid_argument("invalid value for key: " + key);
  return x;
}

long parse_long(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long x = std::strtol(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || value.empty())
    throw std::invalid_argument("invalid value for key: " + key);
  return x;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blown_up: return "blowup";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

} // namespace

RunConfig Scenario::run_config() const {
  RunConfig rc;
  rc.grid = grid();
  rc.lambda = lambda;
  rc.dt = dt;
  rc.t_end = t_end;
  rc.scheme = scheme;
  rc.coupling = coupling;
  rc.blowup_tail_threshold = tail_threshold;
  rc.tol_neg_rel = tol_neg;
  rc.blowup_sup_threshold = sup_threshold;
  rc.diag_every = diag_every;
  rc.snapshot_count = snapshots;
  rc.diag_radii = radii;
  return rc;
}

PicardConfig Scenario::picard_config() const {
  PicardConfig pc;
  pc.T = picard_T;
  pc.p = picard_p;
  pc.lambda = lambda;
  pc.coupling = coupling;
  return pc;
}

double parse_mass(const std::string& token) {
  const std::string t = trim(token);
  if (t == "critical") return 8.0 * kPi;
  if (t.size() > 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
    const std::string head = t.substr(0, t.size() - 2);
    char* end = nullptr;
    const double x = std::strtod(head.c_str(), &end);
    if (end == head.c_str() + head.size()) return x * kPi;
    throw std::invalid_argument("invalid mass literal: " + t);
  }
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw std::invalid_argument("invalid mass literal: " + t);
  return x;
}

Scenario parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);

  Scenario sc;
  bool saw_mass = false;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "name") {
      sc.name = value;
    } else if (key == "family") {
      if (value != "gaussian" && value != "two_bump")
        throw std::invalid_argument("unknown family: " + value);
      sc.family = value;
    } else if (key == "mass") {
      sc.mass = parse_mass(value);
      saw_mass = true;
    } else if (key == "sigma") {
      sc.sigma = parse_double(key, value);
    } else if (key == "center_x") {
      sc.center_x = parse_double(key, value);
    } else if (key == "center_y") {
      sc.center_y = parse_double(key, value);
    } else if (key == "sep") {
      sc.sep = parse_double(key, value);
    } else if (key == "v0_mass") {
      sc.v0_mass = parse_double(key, value);
    } else if (key == "v0_sigma") {
      sc.v0_sigma = parse_double(key, value);
    } else if (key == "seed") {
      sc.seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "n") {
      sc.n = static_cast<int>(parse_long(key, value));
    } else if (key == "box") {
      sc.box = parse_double(key, value);
    } else if (key == "lambda") {
      sc.lambda = parse_double(key, value);
    } else if (key == "dt") {
      sc.dt = parse_double(key, value);
    } else if (key == "t_end") {
      sc.t_end = parse_double(key, value);
    } else if (key == "scheme") {
      if (value == "etd1")
        sc.scheme = Scheme::etd1;
      else if (value == "etd2")
        sc.scheme = Scheme::etd2;
      else
        throw std::invalid_argument("unknown scheme: " + value);
    } else if (key == "coupling") {
      if (value == "full")
        sc.coupling = Coupling::full;
      else if (value == "no_flux")
        sc.coupling = Coupling::no_flux;
      else if (value == "decoupled")
        sc.coupling = Coupling::decoupled;
      else
        throw std::invalid_argument("unknown coupling: " + value);
    } else if (key == "tail_threshold") {
      sc.tail_threshold = parse_double(key, value);
    } else if (key == "tol_neg") {
      sc.tol_neg = parse_double(key, value);
    } else if (key == "sup_threshold") {
      sc.sup_threshold = parse_double(key, value);
    } else if (key == "diag_every") {
      sc.diag_every = static_cast<int>(parse_long(key, value));
    } else if (key == "snapshots") {
      sc.snapshots = static_cast<int>(parse_long(key, value));
    } else if (key == "radii") {
      sc.radii.clear();
      for (const std::string& tok : split_list(value))
        sc.radii.push_back(parse_double(key, tok));
    } else if (key == "picard_T") {
      sc.picard_T = parse_double(key, value);
    } else if (key == "picard_p") {
      sc.picard_p = parse_double(key, value);
    } else {
      throw std::invalid_argument("unknown key: " + key);
    }
  }

  if (!saw_mass) throw std::invalid_argument("missing required key: mass");
  if (!(sc.mass > 0.0)) throw std::invalid_argument("mass must be positive");
  if (sc.n < 8) throw std::invalid_argument("n must be at least 8");
  if (!(sc.box > 0.0)) throw std::invalid_argument("box must be positive");
  const double h = sc.box / sc.n;
  if (!(sc.sigma > 2.0 * h)) throw std::invalid_argument("sigma must exceed 2h");
  if (sc.v0_sigma != 0.0 && !(sc.v0_sigma > 2.0 * h))
    throw std::invalid_argument("v0_sigma must exceed 2h");
  for (double r : sc.radii)
    if (!(r > 0.0) || r >= sc.box / 32.0)
      throw std::invalid_argument("radii entry " + std::to_string(r) +
                                  " too large for the box (limit L/32)");
  if (!(sc.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(sc.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (sc.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (!(sc.v0_mass > 0.0) && sc.coupling != Coupling::decoupled)
    throw std::invalid_argument("v0_mass must be positive");
  if (sc.diag_every < 1) throw std::invalid_argument("diag_every must be at least 1");
  if (sc.snapshots < 2) throw std::invalid_argument("snapshots must be at least 2");
  if (!(sc.sep > 0.0) && sc.family == "two_bump")
    throw std::invalid_argument("sep must be positive");
  return sc;
}

InitialData make_initial_data(const Scenario& sc, const GridSpec& g) {
  InitialData init;
  const double s2 = 2.0 * sc.sigma * sc.sigma;
  if (sc.family == "gaussian") {
    const double cx = sc.center_x, cy = sc.center_y;
    init.u0 = sample(g, [=](double x, double y) {
      return std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / s2);
    });
  } else { // two_bump
    const double cx1 = sc.center_x - 0.5 * sc.sep, cx2 = sc.center_x + 0.5 * sc.sep;
    const double cy = sc.center_y;
    init.u0 = sample(g, [=](double x, double y) {
      const double d1 = (x - cx1) * (x - cx1) + (y - cy) * (y - cy);
      const double d2 = (x - cx2) * (x - cx2) + (y - cy) * (y - cy);
      return std::exp(-d1 / s2) + std::exp(-d2 / s2);
    });
  }
  const double raw_mass = integrate(init.u0);
  for (double& v : init.u0.values) v *= sc.mass / raw_mass;
  init.u0_mass = integrate(init.u0);

  const double vs = sc.v0_sigma > 0.0 ? sc.v0_sigma : 2.0 * sc.sigma;
  init.v0 = sample(g, [=](double x, double y) {
    return std::exp(-(x * x + y * y) / (2.0 * vs * vs));
  });
  const double raw_v = integrate(init.v0);
  for (double& v : init.v0.values) v *= sc.v0_mass / raw_v;
  init.v0_mass = integrate(init.v0);

  auto [gx, gy] = gradient(init.v0);
  ScalarField mag = zeros(g);
  for (std::size_t i = 0; i < mag.values.size(); ++i)
    mag.values[i] = gx.values[i] * gx.values[i] + gy.values[i] * gy.values[i];
  init.v0_grad_l2 = std::sqrt(integrate(mag));
  return init;
}

std::vector<std::string> emit_outputs(const Scenario& sc, const InitialData& init,
                                      const RunResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

  std::vector<std::string> written;
  const std::string diag_path = out_dir + "/diagnostics.csv";
  write_diagnostics_csv(diag_path, result.rows);
  written.push_back(diag_path);

  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    const SimState& snap = result.snapshots[k];
    const std::string up = out_dir + "/u_" + std::to_string(k) + ".field";
    const std::string vp = out_dir + "/v_" + std::to_string(k) + ".field";
    write_field(up, {snap.t, snap.u});
    write_field(vp, {snap.t, snap.v});
    written.push_back(up);
    written.push_back(vp);
  }

  const auto write_slice = [&](const std::string& name, const char* header,
                               auto&& pick) {
    const std::string path = out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << header << '\n';
    char buf[80];
    for (const DiagnosticsRow& row : result.rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", row.t, pick(row));
      out << buf << '\n';
    }
    written.push_back(path);
  };
  write_slice("plot_fm.csv", "t,f_m", [](const DiagnosticsRow& r) { return r.f_m; });
  write_slice("plot_mass.csv", "t,mass_u", [](const DiagnosticsRow& r) { return r.mass_u; });
  write_slice("plot_sup.csv", "t,u_sup", [](const DiagnosticsRow& r) { return r.u_sup; });

  nlohmann::ordered_json manifest;
  manifest["name"] = sc.name;
  manifest["version"] = kVersion;
  {
    char stamp[64];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    manifest["timestamp"] = stamp;
  }
  nlohmann::ordered_json config;
  config["family"] = sc.family;
  config["mass"] = sc.mass;
  config["sigma"] = sc.sigma;
  config["center"] = {sc.center_x, sc.center_y};
  config["sep"] = sc.sep;
  config["v0_mass"] = sc.v0_mass;
  config["v0_sigma"] = sc.v0_sigma > 0.0 ? sc.v0_sigma : 2.0 * sc.sigma;
  config["seed"] = sc.seed;
  config["n"] = sc.n;
  config["box"] = sc.box;
  config["lambda"] = sc.lambda;
  config["dt"] = sc.dt;
  config["t_end"] = sc.t_end;
  config["scheme"] = sc.scheme == Scheme::etd1 ? "etd1" : "etd2";
  config["coupling"] = sc.coupling == Coupling::full      ? "full"
                       : sc.coupling == Coupling::no_flux ? "no_flux"
                                                          : "decoupled";
  config["tail_threshold"] = sc.tail_threshold;
  config["tol_neg"] = sc.tol_neg;
  config["sup_threshold"] = sc.sup_threshold;
  config["diag_every"] = sc.diag_every;
  config["snapshots"] = sc.snapshots;
  config["radii"] = sc.radii;
  manifest["config"] = std::move(config);

  nlohmann::ordered_json initial;
  initial["u0_mass"] = init.u0_mass;
  initial["v0_mass"] = init.v0_mass;
  initial["v0_grad_l2"] = init.v0_grad_l2;
  manifest["initial_data"] = std::move(initial);

  nlohmann::ordered_json outcome;
  outcome["status"] = status_name(result.status);
  outcome["t_final"] = result.t_final;
  if (result.status != RunStatus::completed) {
    outcome["t_star"] = result.t_star;
    outcome["criterion"] = result.reason;
  }
  outcome["max_mass_drift_rel"] = result.max_mass_drift_rel;
  manifest["outcome"] = std::move(outcome);

  const std::string man_path = out_dir + "/manifest.json";
  std::ofstream man(man_path, std::ios::binary);
  if (!man) throw std::runtime_error("cannot open " + man_path);
  man << manifest.dump(2) << '\n';
  written.push_back(man_path);
  return written;
}

SweepResult sweep_mass(const Scenario& base, const std::vector<std::string>& mass_tokens,
                       const std::string& out_root, int workers) {
  if (mass_tokens.empty()) throw std::invalid_argument("no masses requested");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_root, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + out_root);

  SweepResult sweep;
  sweep.entries.resize(mass_tokens.size());

  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= mass_tokens.size()) return;
      SweepEntry& entry = sweep.entries[i];
      entry.label = mass_tokens[i];
      entry.out_dir = out_root + "/mass_" + mass_tokens[i];
      entry.t_star = std::numeric_limits<double>::quiet_NaN();
      try {
        Scenario sc = base;
        sc.mass = parse_mass(mass_tokens[i]);
        sc.name = base.name + "-" + mass_tokens[i];
        entry.mass = sc.mass;
        const GridSpec g = sc.grid();
        const InitialData init = make_initial_data(sc, g);
        const RunResult res = run(init.u0, init.v0, sc.run_config());
        emit_outputs(sc, init, res, entry.out_dir);

        entry.status = status_name(res.status);
        entry.detail = res.reason;
        if (res.status == RunStatus::blown_up) entry.t_star = res.t_star;
        entry.final_sup_u = res.rows.empty() ? 0.0 : res.rows.back().u_sup;
        double min_fm = std::numeric_limits<double>::infinity();
        double max_res = 0.0;
        for (const DiagnosticsRow& row : res.rows) {
          min_fm = std::min(min_fm, row.f_m);
          max_res = std::max(max_res, std::abs(row.fm_residual));
        }
        entry.min_fm = res.rows.empty() ? 0.0 : min_fm;
        entry.max_fm_residual = max_res;
      } catch (const std::exception& e) {
        entry.status = "failed";
        entry.detail = e.what();
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(workers, static_cast<int>(mass_tokens.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }

  const std::string csv_path = out_root + "/sweep.csv";
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + csv_path);
  out << "mass_label,mass,status,t_star,final_sup_u,min_fm,max_fm_residual,detail\n";
  char buf[256];
  for (const SweepEntry& e : sweep.entries) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g,%.17g", e.mass,
                  e.status.c_str(), e.t_star, e.final_sup_u, e.min_fm, e.max_fm_residual);
    std::string detail = e.detail; // keep the free-text column comma-free
    for (char& c : detail)
      if (c == ',') c = ';';
    out << e.label << ',' << buf << ',' << detail << '\n';
  }
  return sweep;
}

} // namespace ks2d
