#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hartree/diagnostics.hpp"
#include "hartree/evolution.hpp"
#include "hartree/potential.hpp"

namespace hartree {

// --- configuration ------------------------------------------------------------

struct KernelConfig {
  /// log | gaussian | inverse_cube | nls
  std::string kind = "log";
  double alpha_log = 2.0;
  double delta = 0.1;
  double width = 1.0;
  double core = 0.3;
  double outer = 1.5;
  double coefficient = 1.0;
  double epsilon = 1.0;
  bool normalize_l1 = false;
  /// exponent requested from the connection condition
  double alpha = 2.1;
  int check_samples = 4000;
};

struct InitialConfig {
  /// gaussian | random_shells | negative_energy | snapshot
  std::string family = "gaussian";
  double amplitude = 1.0;
  double width = 1.0;
  /// phase e^{i chirp r^2}
  double chirp = 0.0;
  std::string snapshot;
};

struct RunConfig {
  int n = 2048;
  double r_max = 16.0;
  KernelConfig kernel;
  InitialConfig initial;
  AdaptivePolicy integrator;
  double t_end = 1.0;
  std::uint64_t seed = 0;
  std::string name = "run";
  /// run directory, relative to the output root; empty means `name`
  std::string output;
  /// write a snapshot every this many diagnostic samples (0: first and last only)
  int snapshot_every = 0;
  /// cut-off radius of the virial columns; 0 selects r_max / 4
  double virial_R = 0.0;
  double local_mass_D = 1.0;
  /// renormalized time window of the regime predicates
  double tau = 1.0;
};

/// Flat `key = value` text: keys like `grid.n` or `kernel.kind`, values are JSON
/// scalars or lists (bare words are read as strings), `#` starts a comment.
RunConfig parse_config(const std::string& text);
/// Throws ConfigNotFound when the file is missing.
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text (every key, sorted), parseable by parse_config.
std::string serialize(const RunConfig& config);
/// SHA-256 of the canonical text without the output location.
std::string config_hash(const RunConfig& config);
/// Throws Validation for configs that cannot run (before any compute).
void validate(const RunConfig& config);

Potential make_kernel(const KernelConfig& k);
NonlinearMode make_mode(const KernelConfig& k);
/// Default sampling window of the kernel checker: [1e-6 eps, support radius].
ConditionReport check_kernel(const Potential& V, double alpha, int samples = 4000);
RadialField make_initial_data(const RunConfig& config, const RadialGrid& grid, const NonlinearMode& mode);

// --- runs ---------------------------------------------------------------------

struct RunRecord {
  std::string config_hash;
  RunStatus status = RunStatus::Running;
  std::filesystem::path directory;
  std::filesystem::path csv;
  std::filesystem::path summary;
  std::vector<std::filesystem::path> snapshots;
  bool complete = false;
  /// an identical finished record was found and returned without recomputing
  bool reused = false;
  long steps = 0;
  double t_final = 0.0;
  double t_est = 0.0;
  double t_star = 0.0;
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  std::optional<RateFit> rate;
  std::string rate_note;
  RegimeReport regime;
  std::optional<ConditionReport> kernel_report;
  bool inside_regime = false;
};

/// Columns of the diagnostics CSV.
inline constexpr const char* kDiagnosticColumns =
    "t,dt,mass,energy,H1,L3,lambda,rho_at_sqrt_t,Va,Pa,KV,local_mass,status";

/// Runs one configuration into output_root / (output or name). A finished record
/// with the same hash is returned as is unless force; any other existing content
/// is an AlreadyExists error unless force.
RunRecord run_scenario(const RunConfig& config, const std::filesystem::path& output_root,
                       bool force = false);

/// Runs the configs on up to `workers` threads; records come back in input order.
/// Failures are reported per record (complete = false, error text in rate_note).
std::vector<RunRecord> sweep(const std::vector<RunConfig>& configs,
                             const std::filesystem::path& output_root, int workers, bool force = false);

struct DiagnosticRow {
  double t, dt, mass, energy, h1, l3, lambda, rho, Va, Pa, KV, local_mass;
  std::string status;
};

std::vector<DiagnosticRow> read_diagnostics(const std::filesystem::path& csv);
/// Reads summary.json of a finished run directory.
RunRecord load_record(const std::filesystem::path& directory);

// --- scenarios ----------------------------------------------------------------

/// A e^{-(r/width)^2} with A the smallest amplitude giving E < 0, found by
/// bisection, times 1.5. Throws KernelTooWeak when E never turns negative.
RadialField make_negative_energy_data(const Potential& V, const RadialGrid& grid, double width);

struct StabilityRow {
  double eps = 0.0;
  /// max over shared sample times of ||v_eps - v||_H1
  double error = 0.0;
};

struct StabilityResult {
  std::vector<StabilityRow> rows;
  /// each error at most 1.05 times the previous one
  bool monotone = false;
  double dt = 0.0;
  int samples = 0;
};

/// Cubic NLS reference against Hartree runs with V_eps, ||V||_L1 = 1 enforced by
/// rescaling, on one grid with one fixed dt. Throws ExperimentRefused when the
/// reference does not complete.
StabilityResult stability_experiment(const RadialField& u0, const Potential& base,
                                     const std::vector<double>& eps_list, double T, double dt,
                                     int sample_stride = 10);

struct BlowupRow {
  double amplitude = 0.0;
  RunStatus status = RunStatus::Running;
  bool valid = false;
  double energy = 0.0;
  double t_est = 0.0;
  double t_star = 0.0;
  std::optional<RateFit> fit;
  std::string note;
};

struct BlowupRateResult {
  std::vector<BlowupRow> rows;
  /// first amplitude rerun at 2n
  double t_est_fine = 0.0;
  double t_est_shift = 0.0;
};

/// Evolves each amplitude to blow-up and fits the rate. Rows that end
/// BoundaryContaminated are marked invalid.
BlowupRateResult blowup_rate_experiment(const Potential& V, const std::vector<double>& amplitudes,
                                        double width, const RadialGrid& grid,
                                        const AdaptivePolicy& policy, double t_end);

}  // namespace hartree
