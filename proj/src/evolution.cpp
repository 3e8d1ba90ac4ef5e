#include "hartree/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "hartree/diagnostics.hpp"
#include "hartree/errors.hpp"
#include "hartree/format.hpp"
#include "hartree/sine_transform.hpp"
#include "hartree/snapshot.hpp"

namespace hartree {

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Running: return "running";
    case RunStatus::BlownUp: return "blown_up";
    case RunStatus::Completed: return "completed";
    case RunStatus::BoundaryContaminated: return "boundary_contaminated";
  }
  return "unknown";
}

SolverState::SolverState(RadialField field, NonlinearMode m, double t0)
    : u(std::move(field)), mode(std::move(m)), t(t0) {
  h1_initial = norm(u, NormKind::H1dot);
  if (!mode.is_local()) table = kernel_table(mode.potential(), u.grid());
}

namespace {

// W = V * |u|^2 from raw samples, or g |u|^2 for the local mode.
std::vector<double> phase_potential(const SolverState& s, std::span<const cplx> u) {
  const auto& g = s.u.grid();
  std::vector<double> rho(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) rho[j] = std::norm(u[j]);
  if (s.mode.is_local()) {
    const double c = s.mode.potential().coefficient();
    for (auto& v : rho) v *= c;
    return rho;
  }
  return convolve_spectral(*s.table, RealProfile(g, std::move(rho))).values.values;
}

void apply_phase(std::span<cplx> u, const std::vector<double>& W, double tau) {
  for (std::size_t j = 0; j < u.size(); ++j) u[j] *= std::polar(1.0, tau * W[j]);
}

// dt = cfl lambda^2 with lambda = 1/||grad u||^2
double dt_for(double h1, const AdaptivePolicy& policy) {
  const double dt = policy.cfl / std::pow(h1, 4.0);
  if (!std::isfinite(dt)) return policy.dt_max;
  return std::clamp(dt, policy.dt_min, policy.dt_max);
}

bool finite(std::span<const cplx> u) {
  return std::all_of(u.begin(), u.end(),
                     [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

}  // namespace

double boundary_fraction(const RadialField& u, double shell) {
  const auto rho = u.density();
  const double total = integrate(u.grid(), rho);
  if (!(total > 0.0)) return 0.0;
  const double r_max = u.grid().r_max();
  return shell_mass(u, (1.0 - shell) * r_max, r_max) / total;
}

void step(SolverState& s, double dt, const AdaptivePolicy& policy) {
  if (s.status != RunStatus::Running) fail(ErrorKind::InvalidInput, "step on a stopped state");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::InvalidInput, "step needs dt > 0");
  const auto& g = s.u.grid();
  const int n = g.n();
  std::vector<cplx> u(s.u.values().begin(), s.u.values().end());

  apply_phase(u, phase_potential(s, u), 0.5 * dt);

  // free flow on w = r u: i w_t = -w'' diagonalizes on the sine basis
  SineTransform dst(n);
  std::vector<cplx> w(n), c(n);
  for (int j = 0; j < n; ++j) w[j] = g.r(j) * u[j];
  dst.forward(w, c);
  for (int m = 0; m < n; ++m) {
    const double k = g.k(m);
    c[m] *= std::polar(1.0, -k * k * dt);
  }
  dst.inverse(c, w);
  for (int j = 0; j < n; ++j) u[j] = w[j] / g.r(j);

  if (finite(u)) apply_phase(u, phase_potential(s, u), 0.5 * dt);
  if (!finite(u)) {
    s.status = RunStatus::BlownUp;
    s.t_est = s.t;
    return;
  }
  std::copy(u.begin(), u.end(), s.u.mutable_values().begin());
  s.t += dt;
  s.dt = dt;
  ++s.step_count;
  if (boundary_fraction(s.u, policy.boundary_shell) > policy.boundary_tol)
    s.status = RunStatus::BoundaryContaminated;
}

double adaptive_dt(const SolverState& s, const AdaptivePolicy& policy) {
  return dt_for(norm(s.u, NormKind::H1dot), policy);
}

StepHistory evolve(SolverState& s, double t_end, const AdaptivePolicy& policy,
                   const SampleHook& hook) {
  if (!(t_end > s.t)) fail(ErrorKind::InvalidInput, "evolve needs t_end > t");
  if (!(policy.cfl > 0.0) || !(policy.dt_min > 0.0) || !(policy.dt_max >= policy.dt_min) ||
      policy.sample_stride < 1 || !(policy.blowup_threshold > 1.0))
    fail(ErrorKind::InvalidInput, "invalid adaptive policy");
  StepHistory hist;
  if (s.status != RunStatus::Running) return hist;

  auto record = [&](double h1) {
    hist.t.push_back(s.t);
    hist.dt.push_back(s.dt);
    hist.h1.push_back(h1);
    hist.lambda.push_back(h1 > 0.0 ? 1.0 / (h1 * h1) : std::numeric_limits<double>::infinity());
  };
  double h1 = norm(s.u, NormKind::H1dot);
  record(h1);
  if (hook) hook(s);
  const double threshold = policy.blowup_threshold * s.h1_initial;

  long local_steps = 0;
  bool sampled = true;
  while (s.status == RunStatus::Running) {
    if (local_steps >= policy.max_steps) fail(ErrorKind::Runtime, "step budget exhausted");
    double dt = dt_for(h1, policy);
    const bool last = s.t + dt * (1.0 + 1e-12) >= t_end;
    if (last) dt = t_end - s.t;
    step(s, dt, policy);
    if (s.status == RunStatus::BlownUp) break;
    if (last) s.t = t_end;
    ++local_steps;
    h1 = norm(s.u, NormKind::H1dot);
    record(h1);
    sampled = false;

    if (s.status == RunStatus::Running && s.h1_initial > 0.0 && h1 > threshold) {
      s.status = RunStatus::BlownUp;
      const auto fit = estimate_blowup_time(hist.t, hist.lambda);
      s.t_est = fit.ok ? std::max(fit.t_est, s.t) : s.t;
    } else if (s.status == RunStatus::Running && last) {
      s.status = RunStatus::Completed;
    }
    if (hook && (s.status != RunStatus::Running || local_steps % policy.sample_stride == 0)) {
      hook(s);
      sampled = true;
    }
  }
  if (hook && !sampled) hook(s);
  return hist;
}

RenormalizedView renormalize(const RadialField& u, double source_time) {
  const double h1 = norm(u, NormKind::H1dot);
  if (!(h1 > 0.0)) fail(ErrorKind::ScaleOverflow, "renormalize needs ||u||_H1 > 0");
  const double lambda = 1.0 / (h1 * h1);
  if (!(lambda >= 1e-8 && lambda <= 1e8))
    fail(ErrorKind::ScaleOverflow, "renormalization scale " + exact(lambda) + " outside [1e-8, 1e8]");
  // nodes of the rescaled grid sit at r_j / lambda, so v(r_j / lambda) = lambda conj(u(r_j))
  std::vector<cplx> v(u.values().begin(), u.values().end());
  for (auto& z : v) z = lambda * std::conj(z);
  return {RadialField(u.grid().rescaled(lambda), std::move(v)), lambda, source_time, true, true};
}

namespace {

std::filesystem::path sidecar(const std::filesystem::path& snapshot) {
  auto p = snapshot;
  p += ".meta";
  return p;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& snapshot, const SolverState& s) {
  write_snapshot(snapshot, s.u, s.t);
  std::ofstream os(sidecar(snapshot), std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot write checkpoint sidecar for " + snapshot.string());
  os << "t = " << exact(s.t) << "\n"
     << "dt = " << exact(s.dt) << "\n"
     << "mode = " << s.mode.describe() << "\n"
     << "step_count = " << s.step_count << "\n"
     << "status = " << status_name(s.status) << "\n"
     << "t_est = " << exact(s.t_est) << "\n"
     << "h1_initial = " << exact(s.h1_initial) << "\n";
  if (!os) fail(ErrorKind::Io, "checkpoint sidecar write failed");
}

SolverState read_checkpoint(const std::filesystem::path& snapshot, const NonlinearMode& mode) {
  auto snap = read_snapshot(snapshot);
  std::ifstream is(sidecar(snapshot));
  if (!is) fail(ErrorKind::Io, "missing checkpoint sidecar for " + snapshot.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (kv["mode"] != mode.describe())
    fail(ErrorKind::Validation, "checkpoint mode " + kv["mode"] + " does not match " + mode.describe());
  SolverState s(std::move(snap.field), mode, snap.time);
  s.dt = std::stod(kv.at("dt"));
  s.step_count = std::stol(kv.at("step_count"));
  s.t_est = std::stod(kv.at("t_est"));
  s.h1_initial = std::stod(kv.at("h1_initial"));
  const std::string st = kv["status"];
  for (auto candidate : {RunStatus::Running, RunStatus::BlownUp, RunStatus::Completed,
                         RunStatus::BoundaryContaminated})
    if (status_name(candidate) == st) s.status = candidate;
  return s;
}

}  // namespace hartree
