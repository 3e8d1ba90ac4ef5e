#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hartree/convolution.hpp"
#include "hartree/radial.hpp"

namespace hartree {

enum class RunStatus { Running, BlownUp, Completed, BoundaryContaminated };

std::string status_name(RunStatus s);

struct AdaptivePolicy {
  /// dt = clamp(cfl * lambda^2, dt_min, dt_max), lambda = 1 / ||grad u||^2
  double cfl = 0.1;
  double dt_min = 1e-9;
  double dt_max = 1e-2;
  /// blow-up once ||u||_H1 exceeds this multiple of its initial value
  double blowup_threshold = 4.0;
  /// sample callback every this many steps (and at the final state)
  int sample_stride = 10;
  /// outer shell (fraction of r_max) whose mass may not exceed boundary_tol of the total
  double boundary_shell = 0.05;
  double boundary_tol = 1e-8;
  long max_steps = 50'000'000;
};

/// Integrator state; owned by one worker at a time.
struct SolverState {
  SolverState(RadialField u, NonlinearMode mode, double t = 0.0);

  RadialField u;
  NonlinearMode mode;
  double t = 0.0;
  double dt = 0.0;
  long step_count = 0;
  RunStatus status = RunStatus::Running;
  /// estimated blow-up time (BlownUp only)
  double t_est = 0.0;
  /// ||u||_H1 at the start of the run, for the blow-up threshold
  double h1_initial = 0.0;
  /// kernel transforms for Hartree modes
  std::shared_ptr<const KernelTable> table;
};

/// One Strang step of size dt: half phase exp(i dt/2 W), free flow exp(-i k^2 dt), half phase.
/// Sets BlownUp on non-finite values and BoundaryContaminated on boundary mass breach.
void step(SolverState& state, double dt, const AdaptivePolicy& policy = {});

/// Time step for the current field under a policy (before clipping to t_end).
double adaptive_dt(const SolverState& state, const AdaptivePolicy& policy);

struct StepHistory {
  std::vector<double> t;
  std::vector<double> dt;
  std::vector<double> h1;
  std::vector<double> lambda;
};

using SampleHook = std::function<void(const SolverState&)>;

/// Advances to t_end, to blow-up or to boundary contamination. The hook runs on the
/// initial state, every sample_stride steps and on the final state.
StepHistory evolve(SolverState& state, double t_end, const AdaptivePolicy& policy,
                   const SampleHook& hook = {});

/// Fraction of the mass in the outer boundary shell.
double boundary_fraction(const RadialField& u, double shell);

struct RenormalizedView {
  /// v(x) = lambda conj(u)(lambda x) on a grid with r_max / lambda
  RadialField v;
  double lambda = 0.0;
  double source_time = 0.0;
  /// v carries conj(u) and runs backward in the original time
  bool conjugated = true;
  bool time_reversed = true;
};

/// lambda = 1 / ||grad u||^2. Throws ScaleOverflow when lambda leaves [1e-8, 1e8].
RenormalizedView renormalize(const RadialField& u, double source_time = 0.0);

/// Snapshot plus a text sidecar (t, dt, mode, step_count, status).
void write_checkpoint(const std::filesystem::path& snapshot, const SolverState& state);
SolverState read_checkpoint(const std::filesystem::path& snapshot, const NonlinearMode& mode);

}  // namespace hartree
