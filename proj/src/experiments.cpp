#include "hartree/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "hartree/errors.hpp"
#include "hartree/format.hpp"
#include "hartree/snapshot.hpp"

namespace hartree {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// --- config keys ----------------------------------------------------------------

struct Key {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <class T>
void assign(T& dst, const json& v, const std::string& key) {
  bool ok;
  if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
  else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
  else if constexpr (std::is_same_v<T, std::uint64_t>) ok = v.is_number_unsigned();
  else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
  else ok = v.is_number();
  if (!ok) fail(ErrorKind::Validation, "config key " + key + " has the wrong type: " + v.dump());
  dst = v.get<T>();
}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> t;
    auto add = [&](const std::string& name, auto access) {
      t[name] = {[access](const RunConfig& c) { return json(access(const_cast<RunConfig&>(c))); },
                 [access, name](RunConfig& c, const json& v) { assign(access(c), v, name); }};
    };
    add("grid.n", [](RunConfig& c) -> int& { return c.n; });
    add("grid.r_max", [](RunConfig& c) -> double& { return c.r_max; });
    add("kernel.kind", [](RunConfig& c) -> std::string& { return c.kernel.kind; });
    add("kernel.alpha_log", [](RunConfig& c) -> double& { return c.kernel.alpha_log; });
    add("kernel.delta", [](RunConfig& c) -> double& { return c.kernel.delta; });
    add("kernel.width", [](RunConfig& c) -> double& { return c.kernel.width; });
    add("kernel.core", [](RunConfig& c) -> double& { return c.kernel.core; });
    add("kernel.outer", [](RunConfig& c) -> double& { return c.kernel.outer; });
    add("kernel.coefficient", [](RunConfig& c) -> double& { return c.kernel.coefficient; });
    add("kernel.epsilon", [](RunConfig& c) -> double& { return c.kernel.epsilon; });
    add("kernel.normalize_l1", [](RunConfig& c) -> bool& { return c.kernel.normalize_l1; });
    add("kernel.alpha", [](RunConfig& c) -> double& { return c.kernel.alpha; });
    add("kernel.check_samples", [](RunConfig& c) -> int& { return c.kernel.check_samples; });
    add("initial.family", [](RunConfig& c) -> std::string& { return c.initial.family; });
    add("initial.amplitude", [](RunConfig& c) -> double& { return c.initial.amplitude; });
    add("initial.width", [](RunConfig& c) -> double& { return c.initial.width; });
    add("initial.chirp", [](RunConfig& c) -> double& { return c.initial.chirp; });
    add("initial.snapshot", [](RunConfig& c) -> std::string& { return c.initial.snapshot; });
    add("integrator.cfl", [](RunConfig& c) -> double& { return c.integrator.cfl; });
    add("integrator.dt_min", [](RunConfig& c) -> double& { return c.integrator.dt_min; });
    add("integrator.dt_max", [](RunConfig& c) -> double& { return c.integrator.dt_max; });
    add("integrator.blowup_threshold", [](RunConfig& c) -> double& { return c.integrator.blowup_threshold; });
    add("integrator.sample_stride", [](RunConfig& c) -> int& { return c.integrator.sample_stride; });
    add("integrator.boundary_shell", [](RunConfig& c) -> double& { return c.integrator.boundary_shell; });
    add("integrator.boundary_tol", [](RunConfig& c) -> double& { return c.integrator.boundary_tol; });
    add("integrator.max_steps", [](RunConfig& c) -> long& { return c.integrator.max_steps; });
    add("run.t_end", [](RunConfig& c) -> double& { return c.t_end; });
    add("run.seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; });
    add("run.name", [](RunConfig& c) -> std::string& { return c.name; });
    add("run.output", [](RunConfig& c) -> std::string& { return c.output; });
    add("run.snapshot_every", [](RunConfig& c) -> int& { return c.snapshot_every; });
    add("diagnostics.virial_R", [](RunConfig& c) -> double& { return c.virial_R; });
    add("diagnostics.local_mass_D", [](RunConfig& c) -> double& { return c.local_mass_D; });
    add("diagnostics.tau", [](RunConfig& c) -> double& { return c.tau; });
    return t;
  }();
  return table;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

json parse_value(const std::string& text, int line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
  }
  const bool bare = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '/';
  });
  if (!bare) fail(ErrorKind::Validation, "config line " + std::to_string(line) + ": cannot parse value '" + text + "'");
  return json(text);
}

std::string canonical(const RunConfig& c, bool with_output) {
  std::ostringstream os;
  for (const auto& [name, k] : keys()) {
    if (!with_output && name == "run.output") continue;
    os << name << " = " << k.get(c).dump() << "\n";
  }
  return os.str();
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Runtime, "SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

double relative_drift(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(b - a) / (std::abs(a) > 0.0 ? std::abs(a) : 1.0);
}

double l3_of(const RadialField& u) { return norm(u, NormKind::L3); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  std::set<std::string> seen;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Validation, "config line " + std::to_string(number) + ": expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const auto it = keys().find(name);
    if (it == keys().end()) fail(ErrorKind::Validation, "unknown config key " + name);
    if (!seen.insert(name).second) fail(ErrorKind::Validation, "duplicate config key " + name);
    it->second.set(c, parse_value(trim(line.substr(eq + 1)), number));
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::ConfigNotFound, path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  auto c = parse_config(ss.str());
  // snapshot paths are relative to the config file
  if (!c.initial.snapshot.empty() && fs::path(c.initial.snapshot).is_relative())
    c.initial.snapshot = (path.parent_path() / c.initial.snapshot).lexically_normal().string();
  return c;
}

std::string serialize(const RunConfig& config) { return canonical(config, true); }

std::string config_hash(const RunConfig& config) { return sha256_hex(canonical(config, false)); }

Potential make_kernel(const KernelConfig& k) {
  Potential V = Potential::delta(k.coefficient);
  if (k.kind == "nls") return V;
  if (k.kind == "log") V = make_log_potential(k.alpha_log, k.delta);
  else if (k.kind == "gaussian") V = Potential::gaussian(k.width);
  else if (k.kind == "inverse_cube") V = Potential::inverse_cube(k.core, k.outer);
  else fail(ErrorKind::Validation, "unknown kernel kind " + k.kind);
  V = V.with_coefficient(k.coefficient);
  if (k.epsilon != 1.0) V = scale(V, k.epsilon);
  if (k.normalize_l1) V = V.normalized_l1();
  return V;
}

NonlinearMode make_mode(const KernelConfig& k) {
  const auto V = make_kernel(k);
  return V.is_delta() ? NonlinearMode::cubic_nls(V.coefficient()) : NonlinearMode::hartree(V);
}

ConditionReport check_kernel(const Potential& V, double alpha, int samples) {
  return check_conditions(V, alpha, 1e-6 * V.epsilon(), V.support_radius(), samples);
}

void validate(const RunConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorKind::Validation, what); };
  if (c.n < 16) bad("grid.n must be at least 16");
  if (!(c.r_max > 0.0) || !std::isfinite(c.r_max)) bad("grid.r_max must be positive");
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) bad("run.t_end must be positive");
  const auto& p = c.integrator;
  if (!(p.cfl > 0.0) || !(p.dt_min > 0.0) || !(p.dt_max >= p.dt_min))
    bad("integrator needs cfl > 0 and 0 < dt_min <= dt_max");
  if (!(p.blowup_threshold > 1.0)) bad("integrator.blowup_threshold must exceed 1");
  if (p.sample_stride < 1) bad("integrator.sample_stride must be at least 1");
  if (!(p.boundary_shell > 0.0 && p.boundary_shell < 1.0)) bad("integrator.boundary_shell must lie in (0, 1)");
  if (p.max_steps < 1) bad("integrator.max_steps must be positive");
  if (c.snapshot_every < 0) bad("run.snapshot_every must be non-negative");
  if (c.name.empty() || c.name.find('/') != std::string::npos) bad("run.name must be a plain directory name");
  if (fs::path(c.output).is_absolute() || c.output.find("..") != std::string::npos)
    bad("run.output must be a relative path inside the output root");
  const double R = c.virial_R > 0.0 ? c.virial_R : 0.25 * c.r_max;
  if (c.virial_R < 0.0) bad("diagnostics.virial_R must be non-negative");
  if (3.0 * R >= c.r_max) bad("diagnostics.virial_R: 3R must be below r_max");
  if (!(c.local_mass_D > 0.0)) bad("diagnostics.local_mass_D must be positive");
  if (!(c.tau > 0.0)) bad("diagnostics.tau must be positive");
  if (!(c.kernel.alpha > 2.0)) bad("kernel.alpha must exceed 2");
  if (c.kernel.check_samples < 1000) bad("kernel.check_samples must be at least 1000");
  try {
    make_kernel(c.kernel);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Validation) throw;
    bad(std::string("kernel: ") + e.what());
  }
  const auto& f = c.initial.family;
  if (f != "gaussian" && f != "random_shells" && f != "negative_energy" && f != "snapshot")
    bad("unknown initial.family " + f);
  if (!(c.initial.width > 0.0)) bad("initial.width must be positive");
  if (!std::isfinite(c.initial.amplitude) || !std::isfinite(c.initial.chirp)) bad("initial data must be finite");
  if (f == "snapshot" && !fs::exists(c.initial.snapshot)) bad("initial.snapshot not found: " + c.initial.snapshot);
}

RadialField make_initial_data(const RunConfig& c, const RadialGrid& grid, const NonlinearMode& mode) {
  const auto& ic = c.initial;
  if (ic.family == "negative_energy") return make_negative_energy_data(mode.potential(), grid, ic.width);
  if (ic.family == "snapshot") {
    auto snap = read_snapshot(ic.snapshot);
    if (snap.field.grid() == grid) return snap.field;
    return resample(snap.field, grid);
  }
  if (ic.family == "random_shells") {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> centre(0.0, 0.4 * c.r_max / 4.0), spread(0.5, 1.5), weight(0.2, 1.0);
    std::vector<std::array<double, 3>> shells(3);
    for (auto& s : shells) s = {centre(rng), spread(rng) * ic.width, weight(rng)};
    return RadialField::from_function(grid, [&](double r) {
      double f = 0.0;
      for (const auto& [c0, w, a] : shells)
        f += a * (std::exp(-std::pow((r - c0) / w, 2)) + std::exp(-std::pow((r + c0) / w, 2)));
      return ic.amplitude * f * std::polar(1.0, ic.chirp * r * r);
    });
  }
  return RadialField::from_function(grid, [&](double r) {
    return ic.amplitude * std::exp(-std::pow(r / ic.width, 2)) * std::polar(1.0, ic.chirp * r * r);
  });
}

// --- persistence -----------------------------------------------------------------

namespace {

json fit_json(const RateFit& f) {
  return {{"t_est", f.t_est},
          {"gamma_hat", f.gamma_hat},
          {"intercept", f.intercept},
          {"gamma_residual", f.gamma_residual},
          {"c_quarter", f.c_quarter},
          {"c_quarter_min", f.c_quarter_min},
          {"c_quarter_max", f.c_quarter_max},
          {"bounded_below", f.bounded_below},
          {"window_begin", f.window_begin},
          {"window_end", f.window_end},
          {"samples", f.samples},
          {"residuals", f.residuals}};
}

RateFit fit_from_json(const json& j) {
  RateFit f;
  f.t_est = j.at("t_est");
  f.gamma_hat = j.at("gamma_hat");
  f.intercept = j.at("intercept");
  f.gamma_residual = j.at("gamma_residual");
  f.c_quarter = j.at("c_quarter");
  f.c_quarter_min = j.at("c_quarter_min");
  f.c_quarter_max = j.at("c_quarter_max");
  f.bounded_below = j.at("bounded_below");
  f.window_begin = j.at("window_begin");
  f.window_end = j.at("window_end");
  f.samples = j.at("samples");
  f.residuals = j.at("residuals").get<std::vector<double>>();
  return f;
}

// non-finite doubles have no JSON form; they travel as strings
json num(double v) { return std::isfinite(v) ? json(v) : json(exact(v)); }
double num_from(const json& j) { return j.is_string() ? std::stod(j.get<std::string>()) : j.get<double>(); }

void write_summary(const RunRecord& r, const fs::path& path) {
  json j;
  j["config_hash"] = r.config_hash;
  j["status"] = status_name(r.status);
  j["complete"] = r.complete;
  j["steps"] = r.steps;
  j["t_final"] = num(r.t_final);
  j["t_est"] = num(r.t_est);
  j["t_star"] = num(r.t_star);
  j["mass_drift"] = num(r.mass_drift);
  j["energy_drift"] = num(r.energy_drift);
  j["rate_fit"] = r.rate ? fit_json(*r.rate) : json(nullptr);
  j["rate_note"] = r.rate_note;
  j["regime"] = {{"M0", num(r.regime.M0)},
                 {"m0_ok", r.regime.m0_ok},
                 {"tau_energy", num(r.regime.tau_energy)},
                 {"tau_ok", r.regime.tau_ok}};
  if (r.kernel_report) {
    const auto& k = *r.kernel_report;
    j["kernel"] = {{"alpha_requested", k.alpha_requested}, {"alpha_measured", num(k.alpha_measured)},
                   {"connection_ok", k.connection_ok},     {"integrable_ok", k.integrable_ok},
                   {"pointwise_ok", k.pointwise_ok},       {"focusing", k.focusing},
                   {"c_v", num(k.c_v)}};
  } else {
    j["kernel"] = nullptr;
  }
  j["inside_regime"] = r.inside_regime;
  j["diagnostics"] = r.csv.filename().string();
  std::vector<std::string> snaps;
  for (const auto& s : r.snapshots) snaps.push_back(fs::relative(s, r.directory).string());
  j["snapshots"] = snaps;
  std::ofstream os(path, std::ios::trunc);
  os << j.dump(2) << "\n";
  if (!os) fail(ErrorKind::Io, "cannot write " + path.string());
}

const char* kIncomplete = ".incomplete";

}  // namespace

RunRecord load_record(const fs::path& directory) {
  const auto path = directory / "summary.json";
  std::ifstream is(path);
  if (!is) fail(ErrorKind::ConfigNotFound, "no run record at " + directory.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, "malformed summary " + path.string() + ": " + e.what());
  }
  RunRecord r;
  r.directory = directory;
  r.summary = path;
  r.config_hash = j.at("config_hash");
  const std::string st = j.at("status");
  for (auto s : {RunStatus::Running, RunStatus::BlownUp, RunStatus::Completed, RunStatus::BoundaryContaminated})
    if (status_name(s) == st) r.status = s;
  r.complete = j.at("complete").get<bool>() && !fs::exists(directory / kIncomplete);
  r.steps = j.at("steps");
  r.t_final = num_from(j.at("t_final"));
  r.t_est = num_from(j.at("t_est"));
  r.t_star = num_from(j.at("t_star"));
  r.mass_drift = num_from(j.at("mass_drift"));
  r.energy_drift = num_from(j.at("energy_drift"));
  if (!j.at("rate_fit").is_null()) r.rate = fit_from_json(j.at("rate_fit"));
  r.rate_note = j.at("rate_note");
  const auto& g = j.at("regime");
  r.regime = {num_from(g.at("M0")), g.at("m0_ok"), num_from(g.at("tau_energy")), g.at("tau_ok")};
  if (!j.at("kernel").is_null()) {
    const auto& k = j.at("kernel");
    ConditionReport c;
    c.alpha_requested = k.at("alpha_requested");
    c.alpha_measured = num_from(k.at("alpha_measured"));
    c.connection_ok = k.at("connection_ok");
    c.integrable_ok = k.at("integrable_ok");
    c.pointwise_ok = k.at("pointwise_ok");
    c.focusing = k.at("focusing");
    c.c_v = num_from(k.at("c_v"));
    r.kernel_report = c;
  }
  r.inside_regime = j.at("inside_regime");
  r.csv = directory / j.at("diagnostics").get<std::string>();
  for (const auto& s : j.at("snapshots")) r.snapshots.push_back(directory / s.get<std::string>());
  return r;
}

std::vector<DiagnosticRow> read_diagnostics(const fs::path& csv) {
  std::ifstream is(csv);
  if (!is) fail(ErrorKind::ConfigNotFound, "no diagnostics file " + csv.string());
  std::vector<DiagnosticRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kDiagnosticColumns) fail(ErrorKind::Validation, "unexpected diagnostics header in " + csv.string());
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 13) fail(ErrorKind::Validation, "malformed diagnostics row in " + csv.string());
    DiagnosticRow r;
    double* fields[] = {&r.t, &r.dt, &r.mass, &r.energy, &r.h1, &r.l3, &r.lambda, &r.rho, &r.Va, &r.Pa, &r.KV, &r.local_mass};
    for (int i = 0; i < 12; ++i) *fields[i] = std::stod(cells[i]);
    r.status = cells[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- run_scenario -------------------------------------------------------------------

RunRecord run_scenario(const RunConfig& config, const fs::path& output_root, bool force) {
  validate(config);
  RunRecord rec;
  rec.config_hash = config_hash(config);
  const std::string tag = "config " + rec.config_hash.substr(0, 12) + ": ";
  rec.directory = output_root / (config.output.empty() ? config.name : config.output);
  rec.csv = rec.directory / "diagnostics.csv";
  rec.summary = rec.directory / "summary.json";

  try {
    if (fs::exists(rec.directory)) {
      if (!force) {
        if (fs::exists(rec.summary) && !fs::exists(rec.directory / kIncomplete)) {
          auto old = load_record(rec.directory);
          if (old.config_hash == rec.config_hash && old.complete) {
            old.reused = true;
            return old;
          }
        }
        fail(ErrorKind::AlreadyExists, "output directory " + rec.directory.string() +
                                           " holds a different or unfinished run (use force)");
      }
      fs::remove_all(rec.directory);
    }
    fs::create_directories(rec.directory / "snapshots");
    { std::ofstream(rec.directory / kIncomplete) << rec.config_hash << "\n"; }
    {
      std::ofstream os(rec.directory / "config.cfg");
      os << "# config_hash = " << rec.config_hash << "\n" << serialize(config);
      if (!os) fail(ErrorKind::Io, "cannot write config copy");
    }

    const RadialGrid grid(config.n, config.r_max);
    const auto mode = make_mode(config.kernel);
    const auto u0 = make_initial_data(config, grid, mode);
    SolverState state(u0, mode);
    const auto c0 = conserved(u0, mode);
    const double R = config.virial_R > 0.0 ? config.virial_R : 0.25 * config.r_max;
    const auto cut = cutoff_psi(R, grid);

    std::ofstream csv(rec.csv, std::ios::trunc);
    if (!csv) fail(ErrorKind::Io, "cannot write " + rec.csv.string());
    csv << "# config_hash=" << rec.config_hash << "\n" << kDiagnosticColumns << "\n";

    std::vector<RateSample> samples;
    int sample_index = 0;
    auto hook = [&](const SolverState& s) {
      const auto& u = s.u;
      const auto W = nonlinear_potential(u, mode);
      const auto c = conserved(u, W);
      const auto v = virial(u, mode, cut, s.table.get());
      const double h1 = std::sqrt(c.kinetic);
      const double l3 = l3_of(u);
      const double lambda = h1 > 0.0 ? 1.0 / c.kinetic : std::numeric_limits<double>::infinity();
      const double rho_R = std::clamp(std::sqrt(s.t), 4.0 * grid.dr(), 0.25 * grid.r_max());
      const double lm = config.local_mass_D * lambda < grid.r_max() ? local_mass(u, config.local_mass_D, lambda) : kNaN;
      csv << exact(s.t) << ',' << exact(s.dt) << ',' << exact(c.mass) << ',' << exact(c.energy) << ','
          << exact(h1) << ',' << exact(l3) << ',' << exact(lambda) << ',' << exact(rho_norm(u, rho_R)) << ','
          << exact(v.Va) << ',' << exact(v.Pa) << ',' << exact(v.K_V) << ',' << exact(lm) << ','
          << status_name(s.status) << '\n';
      samples.push_back({s.t, h1, l3});
      const bool last = s.status != RunStatus::Running;
      if (sample_index == 0 || last || (config.snapshot_every > 0 && sample_index % config.snapshot_every == 0)) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06d.bin", sample_index);
        rec.snapshots.push_back(rec.directory / "snapshots" / name);
        write_snapshot(rec.snapshots.back(), u, s.t);
      }
      ++sample_index;
    };
    evolve(state, config.t_end, config.integrator, hook);
    csv.close();
    if (!csv) fail(ErrorKind::Io, "diagnostics write failed for " + rec.csv.string());

    rec.status = state.status;
    rec.steps = state.step_count;
    rec.t_final = state.t;
    const auto c1 = conserved(state.u, mode);
    rec.mass_drift = relative_drift(c0.mass, c1.mass);
    rec.energy_drift = relative_drift(c0.energy, c1.energy);
    rec.t_est = state.status == RunStatus::BlownUp ? state.t_est : kNaN;
    rec.t_star = concavity_bound(u0, mode).t_star;
    if (state.status == RunStatus::BlownUp) {
      try {
        rec.rate = rate_fit(samples, state.t_est);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::FitRefused) throw;
        rec.rate_note = e.what();
      }
    } else {
      rec.rate_note = "no blow-up";
    }

    double c_v = 0.0;
    bool kernel_ok = false;
    if (!mode.is_local()) {
      rec.kernel_report = check_kernel(mode.potential(), config.kernel.alpha, config.kernel.check_samples);
      c_v = rec.kernel_report->c_v;
      kernel_ok = rec.kernel_report->connection_ok && rec.kernel_report->integrable_ok &&
                  rec.kernel_report->pointwise_ok;
    }
    try {
      const auto view = renormalize(u0);
      rec.regime = regime_predicates(l3_of(u0), c0.energy, view.lambda, c_v, config.tau);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ScaleOverflow) throw;
      rec.regime = {kNaN, false, kNaN, false};
    }
    rec.inside_regime = kernel_ok && rec.regime.m0_ok && rec.regime.tau_ok;
    rec.complete = true;
    write_summary(rec, rec.summary);
    fs::remove(rec.directory / kIncomplete);
    return rec;
  } catch (const Error& e) {
    throw Error(e.kind(), tag + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::Io, tag + e.what());
  }
}

std::vector<RunRecord> sweep(const std::vector<RunConfig>& configs, const fs::path& output_root, int workers,
                             bool force) {
  std::set<std::string> dirs;
  for (const auto& c : configs) {
    validate(c);
    if (!dirs.insert(c.output.empty() ? c.name : c.output).second)
      fail(ErrorKind::Validation, "two configs in the sweep share the output directory of " + c.name);
  }
  std::vector<RunRecord> out(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = run_scenario(configs[i], output_root, force);
      } catch (const Error& e) {
        out[i].config_hash = config_hash(configs[i]);
        out[i].complete = false;
        out[i].rate_note = std::string(error_tag(e.kind())) + ": " + e.what();
      }
    }
  };
  const int n = std::clamp<int>(workers, 1, std::max<int>(1, static_cast<int>(configs.size())));
  std::vector<std::jthread> pool;
  for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  return out;
}

// --- scenarios -------------------------------------------------------------------

RadialField make_negative_energy_data(const Potential& V, const RadialGrid& grid, double width) {
  if (!(width > 0.0)) fail(ErrorKind::InvalidInput, "width must be positive");
  const auto mode = V.is_delta() ? NonlinearMode::cubic_nls(V.coefficient()) : NonlinearMode::hartree(V);
  const bool focusing = V.is_delta() ? V.coefficient() > 0.0 : check_kernel(V, 2.5, 1000).focusing;
  if (!focusing) fail(ErrorKind::KernelTooWeak, "kernel " + V.describe() + " is not focusing");
  const auto shape = RadialField::from_function(grid, [=](double r) { return cplx(std::exp(-std::pow(r / width, 2))); });
  auto with_amplitude = [&](double a) {
    std::vector<cplx> v(shape.values().begin(), shape.values().end());
    for (auto& z : v) z *= a;
    return RadialField(grid, std::move(v));
  };
  auto energy = [&](double a) { return conserved(with_amplitude(a), mode).energy; };

  double lo = 1e-3, hi = 1e3;
  if (!(energy(lo) > 0.0) || !(energy(hi) < 0.0))
    fail(ErrorKind::KernelTooWeak, "energy of " + V.describe() + " gaussians does not change sign on [1e-3, 1e3]");
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (energy(mid) < 0.0 ? hi : lo) = mid;
  }
  auto u = with_amplitude(1.5 * hi);
  if (!(conserved(u, mode).energy < 0.0)) fail(ErrorKind::KernelTooWeak, "constructed data has non-negative energy");
  return u;
}

StabilityResult stability_experiment(const RadialField& u0, const Potential& base, const std::vector<double>& eps_list,
                                     double T, double dt, int sample_stride) {
  if (base.is_delta()) fail(ErrorKind::InvalidInput, "stability needs a non-delta base kernel");
  if (eps_list.empty()) fail(ErrorKind::InvalidInput, "empty epsilon list");
  const auto normalized = base.normalized_l1();
  AdaptivePolicy policy;
  policy.dt_min = policy.dt_max = dt;
  policy.sample_stride = sample_stride;

  auto trajectory = [&](const NonlinearMode& mode, RunStatus& status) {
    std::vector<RadialField> fields;
    SolverState s(u0, mode);
    evolve(s, T, policy, [&](const SolverState& st) { fields.push_back(st.u); });
    status = s.status;
    return fields;
  };
  RunStatus ref_status;
  const auto ref = trajectory(NonlinearMode::cubic_nls(1.0), ref_status);
  if (ref_status != RunStatus::Completed)
    fail(ErrorKind::ExperimentRefused, "cubic NLS reference ended " + status_name(ref_status) + " before T");

  StabilityResult out;
  out.dt = dt;
  out.samples = static_cast<int>(ref.size());
  for (double eps : eps_list) {
    RunStatus st;
    const auto traj = trajectory(NonlinearMode::hartree(scale(normalized, eps)), st);
    double err = 0.0;
    if (st != RunStatus::Completed || traj.size() != ref.size()) {
      err = std::numeric_limits<double>::infinity();
    } else {
      for (std::size_t i = 0; i < ref.size(); ++i) {
        std::vector<cplx> d(ref[i].size());
        for (int j = 0; j < ref[i].size(); ++j) d[j] = traj[i][j] - ref[i][j];
        err = std::max(err, norm(RadialField(ref[i].grid(), std::move(d)), NormKind::H1dot));
      }
    }
    out.rows.push_back({eps, err});
  }
  out.monotone = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    out.monotone = out.monotone && out.rows[i].error <= 1.05 * out.rows[i - 1].error;
  return out;
}

namespace {

BlowupRow blowup_row(const NonlinearMode& mode, double amplitude, double width, const RadialGrid& grid,
                     const AdaptivePolicy& policy, double t_end) {
  BlowupRow row;
  row.amplitude = amplitude;
  const auto u0 = RadialField::from_function(grid, [=](double r) { return cplx(amplitude * std::exp(-std::pow(r / width, 2))); });
  const auto bound = concavity_bound(u0, mode);
  row.energy = bound.energy;
  row.t_star = bound.t_star;
  if (!(row.energy < 0.0))
    fail(ErrorKind::ExperimentRefused, "amplitude " + exact(amplitude) + " has non-negative energy");
  SolverState s(u0, mode);
  std::vector<RateSample> samples;
  evolve(s, t_end, policy, [&](const SolverState& st) {
    samples.push_back({st.t, norm(st.u, NormKind::H1dot), norm(st.u, NormKind::L3)});
  });
  row.status = s.status;
  row.valid = s.status == RunStatus::BlownUp;
  if (s.status == RunStatus::BoundaryContaminated) row.note = "boundary contaminated";
  else if (s.status == RunStatus::Completed) row.note = "no blow-up before t_end";
  if (!row.valid) {
    row.t_est = kNaN;
    return row;
  }
  row.t_est = s.t_est;
  try {
    row.fit = rate_fit(samples, s.t_est);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FitRefused) throw;
    row.note = e.what();
  }
  return row;
}

}  // namespace

BlowupRateResult blowup_rate_experiment(const Potential& V, const std::vector<double>& amplitudes, double width,
                                        const RadialGrid& grid, const AdaptivePolicy& policy, double t_end) {
  if (amplitudes.empty()) fail(ErrorKind::InvalidInput, "empty amplitude list");
  const auto mode = V.is_delta() ? NonlinearMode::cubic_nls(V.coefficient()) : NonlinearMode::hartree(V);
  BlowupRateResult out;
  for (double a : amplitudes) out.rows.push_back(blowup_row(mode, a, width, grid, policy, t_end));
  const auto fine = blowup_row(mode, amplitudes.front(), width, RadialGrid(2 * grid.n(), grid.r_max()), policy, t_end);
  out.t_est_fine = fine.t_est;
  out.t_est_shift = std::abs(out.rows.front().t_est - fine.t_est) / out.rows.front().t_est;
  return out;
}

}  // namespace hartree
