// hartree: runs, sweeps, kernel checks, rate fits and verification suites.
// Data goes to stdout or run directories, everything human-readable to stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "checks.hpp"
#include "hartree/errors.hpp"
#include "hartree/experiments.hpp"
#include "hartree/format.hpp"

#ifndef HARTREE_BUILD_ID
#define HARTREE_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;
using namespace hartree;

namespace {

constexpr int kConfigSchemaVersion = 1;

fs::path default_output_root() {
  if (const char* env = std::getenv("HARTREE_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

void describe(const RunRecord& r) {
  std::cerr << "run " << r.directory.string() << ": " << status_name(r.status) << (r.reused ? " (reused)" : "")
            << ", steps " << r.steps << ", t " << r.t_final << ", mass drift " << r.mass_drift << ", energy drift "
            << r.energy_drift << "\n";
  if (r.status == RunStatus::BlownUp) {
    std::cerr << "  T_est " << r.t_est << ", concavity bound " << r.t_star << "\n";
    if (r.rate)
      std::cerr << "  gamma_hat " << r.rate->gamma_hat << " (rms residual " << r.rate->gamma_residual
                << "), H1 (T-t)^1/4 in [" << r.rate->c_quarter_min << ", " << r.rate->c_quarter_max << "]\n";
    else if (!r.rate_note.empty())
      std::cerr << "  rate fit: " << r.rate_note << "\n";
  }
  std::cerr << "  inside regime: " << (r.inside_regime ? "yes" : "no") << "\n";
}

int cmd_run(const fs::path& cfg, const fs::path& root, bool force) {
  const auto rec = run_scenario(load_config(cfg), root, force);
  describe(rec);
  std::cout << rec.directory.string() << "\n";
  return 0;
}

int cmd_sweep(const fs::path& dir, const fs::path& root, int workers, bool force) {
  if (!fs::is_directory(dir)) fail(ErrorKind::ConfigNotFound, dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorKind::Validation, "no .cfg files in " + dir.string());
  std::vector<RunConfig> configs;
  for (const auto& f : files) configs.push_back(load_config(f));

  const auto records = sweep(configs, root, workers, force);
  std::cout << "config,config_hash,status,complete,t_final,t_est,t_star,directory\n";
  int failed = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::cout << files[i].filename().string() << "," << r.config_hash << "," << status_name(r.status) << ","
              << (r.complete ? 1 : 0) << "," << exact(r.t_final) << "," << exact(r.t_est) << "," << exact(r.t_star)
              << "," << r.directory.string() << "\n";
    if (!r.complete) {
      ++failed;
      std::cerr << files[i].filename().string() << ": " << r.rate_note << "\n";
    }
  }
  std::cerr << records.size() - failed << " of " << records.size() << " runs complete\n";
  return failed ? 2 : 0;
}

int cmd_check_potential(const KernelConfig& k) {
  const auto V = make_kernel(k);
  const auto rep = check_kernel(V, k.alpha, k.check_samples);
  auto yes = [](bool b) { return b ? "true" : "false"; };
  std::cout << "kind = " << k.kind << "\n"
            << "epsilon = " << exact(V.epsilon()) << "\n"
            << "alpha_requested = " << exact(rep.alpha_requested) << "\n"
            << "alpha_measured = " << exact(rep.alpha_measured) << "\n"
            << "connection_ok = " << yes(rep.connection_ok) << "\n"
            << "l1_norm = " << exact(rep.l1_norm) << "\n"
            << "weight_l1_norm = " << exact(rep.weight_l1_norm) << "\n"
            << "integrable_ok = " << yes(rep.integrable_ok) << "\n"
            << "c_measured = " << exact(rep.c_measured) << "\n"
            << "c_bound = " << exact(rep.c_bound) << "\n"
            << "pointwise_ok = " << yes(rep.pointwise_ok) << "\n"
            << "c_v = " << exact(rep.c_v) << "\n"
            << "focusing = " << yes(rep.focusing) << "\n"
            << "core_samples = " << rep.core_samples << "\n";
  return 0;
}

int cmd_rate_fit(const fs::path& dir) {
  const auto rec = load_record(dir);
  if (rec.status != RunStatus::BlownUp)
    fail(ErrorKind::FitRefused, "record " + dir.string() + " ended " + status_name(rec.status) + ", not blown_up");
  const auto rows = read_diagnostics(rec.csv);
  std::vector<RateSample> samples;
  for (const auto& r : rows) samples.push_back({r.t, r.h1, r.l3});
  const auto fit = rate_fit(samples, rec.t_est);

  std::cout << "t,T_minus_t,H1,L3,H1_quarter,log_log_inv_gap,log_L3,log_L3_fit\n";
  for (const auto& s : samples) {
    const double gap = rec.t_est - s.t;
    if (!(gap > 0.0 && gap < 1.0) || !(s.l3 > 0.0) || !std::isfinite(s.h1)) continue;
    const double x = std::log(std::log(1.0 / gap));
    std::cout << exact(s.t) << "," << exact(gap) << "," << exact(s.h1) << "," << exact(s.l3) << ","
              << exact(s.h1 * std::pow(gap, 0.25)) << "," << exact(x) << "," << exact(std::log(s.l3)) << ","
              << exact(fit.intercept + fit.gamma_hat * x) << "\n";
  }
  std::cerr << "T_est " << fit.t_est << ", gamma_hat " << fit.gamma_hat << " (rms residual " << fit.gamma_residual
            << ", " << fit.samples << " samples), H1 (T-t)^1/4 median " << fit.c_quarter << ", min "
            << fit.c_quarter_min << "\n";
  return 0;
}

int cmd_stability(const fs::path& cfg, std::vector<double> eps, double t_end, double dt) {
  const auto config = load_config(cfg);
  validate(config);
  const RadialGrid grid(config.n, config.r_max);
  const auto base = make_kernel(config.kernel);
  const auto u0 = make_initial_data(config, grid, make_mode(config.kernel));
  if (t_end <= 0.0) t_end = config.t_end;
  if (dt <= 0.0) dt = config.integrator.dt_max;
  const auto res = stability_experiment(u0, base, eps, t_end, dt);
  std::cout << "eps,error\n";
  for (const auto& r : res.rows) std::cout << exact(r.eps) << "," << exact(r.error) << "\n";
  std::cerr << "dt " << res.dt << ", " << res.samples << " shared samples, errors "
            << (res.monotone ? "non-increasing" : "NOT non-increasing") << "\n";
  return 0;
}

int cmd_verify(const std::string& suite) {
  const auto results = checks::run_suite(suite);
  int failed = 0;
  std::cout << "criterion,name,result,detail\n";
  for (const auto& r : results) {
    std::cout << r.criterion << "," << r.name << "," << (r.pass ? "PASS" : "FAIL") << ",\"" << r.detail << "\"\n";
    failed += !r.pass;
  }
  std::cerr << results.size() - failed << " of " << results.size() << " checks passed\n";
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial Hartree / cubic NLS numerical lab", "hartree"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string("hartree ") + HARTREE_BUILD_ID + " (config schema " +
                                        std::to_string(kConfigSchemaVersion) + ")");

  fs::path output_root = default_output_root();
  bool force = false;

  auto* run = app.add_subcommand("run", "Run one configuration into its run directory");
  fs::path run_cfg;
  run->add_option("config", run_cfg, "Config file")->required();
  run->add_flag("--force", force, "Recompute and overwrite an existing run directory");
  run->add_option("--output-root", output_root, "Root of run directories (default $HARTREE_OUTPUT_ROOT or ./runs)");

  auto* sw = app.add_subcommand("sweep", "Run every .cfg file of a directory");
  fs::path sweep_dir;
  int workers = 1;
  sw->add_option("config-dir", sweep_dir, "Directory of config files")->required();
  sw->add_option("-j,--jobs", workers, "Parallel workers")->check(CLI::PositiveNumber);
  sw->add_flag("--force", force, "Recompute existing runs");
  sw->add_option("--output-root", output_root, "Root of run directories");

  auto* cp = app.add_subcommand("check-potential", "Report the admissibility conditions of a kernel");
  KernelConfig k;
  cp->add_option("--kind", k.kind, "log | gaussian | inverse_cube")->required();
  cp->add_option("--alpha", k.alpha, "Exponent of the connection condition")->required();
  cp->add_option("--alpha-log", k.alpha_log, "Log kernel exponent");
  cp->add_option("--delta", k.delta, "Log kernel core radius");
  cp->add_option("--width", k.width, "Gaussian width");
  cp->add_option("--core", k.core, "Inverse-cube core radius");
  cp->add_option("--outer", k.outer, "Inverse-cube outer radius");
  cp->add_option("--epsilon", k.epsilon, "Scaling parameter");
  cp->add_option("--coefficient", k.coefficient, "Kernel coefficient");
  cp->add_flag("--normalize-l1", k.normalize_l1, "Rescale to unit L1 norm");
  cp->add_option("--samples", k.check_samples, "Sample count")->check(CLI::PositiveNumber);

  auto* rf = app.add_subcommand("rate-fit", "Fit the blow-up rate of a finished record (CSV to stdout)");
  fs::path record;
  rf->add_option("record", record, "Run directory")->required();

  auto* st = app.add_subcommand("stability", "Hartree to cubic NLS stability errors (CSV to stdout)");
  fs::path st_cfg;
  std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
  double st_t = 0.0, st_dt = 0.0;
  st->add_option("config", st_cfg, "Config file (grid, kernel and initial data)")->required();
  st->add_option("--eps", eps, "Scaling parameters")->delimiter(',');
  st->add_option("--t-end", st_t, "Final time (default: the config's)");
  st->add_option("--dt", st_dt, "Fixed step (default: the config's dt_max)");

  auto* vf = app.add_subcommand("verify", "Run a verification suite and print a pass/fail table");
  std::string suite;
  vf->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(checks::suite_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, std::cerr, std::cerr);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, std::cerr, std::cerr);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_tag(ErrorKind::Usage) << ": " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 1;
  }

  try {
    if (*run) return cmd_run(run_cfg, output_root, force);
    if (*sw) return cmd_sweep(sweep_dir, output_root, workers, force);
    if (*cp) return cmd_check_potential(k);
    if (*rf) return cmd_rate_fit(record);
    if (*st) return cmd_stability(st_cfg, eps, st_t, st_dt);
    if (*vf) return cmd_verify(suite);
  } catch (const Error& e) {
    std::cerr << error_tag(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Io || e.kind() == ErrorKind::Runtime ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << error_tag(ErrorKind::Runtime) << ": " << e.what() << "\n";
    return 2;
  }
  return 1;
}
