#include "hartree/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

double inner(const RadialGrid& g, std::span<const double> a, std::span<const double> b) {
  std::vector<double> f(a.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = a[j] * b[j];
  return integrate(g, f);
}

// Quintic bridge on s in [2, 3]: matches s^2/2 to second order at s = 2 and
// vanishes to second order at s = 3. Coefficients in x = s - 2.
constexpr double kBridge[6] = {2.0, 2.0, 0.5, -33.5, 47.5, -18.5};

struct PsiValues {
  double value, first, second;
};

PsiValues psi_unit(double s) {
  if (s <= 2.0) return {0.5 * s * s, s, 1.0};
  if (s >= 3.0) return {0.0, 0.0, 0.0};
  const double x = s - 2.0;
  double p = 0.0, dp = 0.0, d2p = 0.0;
  for (int m = 5; m >= 0; --m) {
    d2p = d2p * x + 2.0 * dp;
    dp = dp * x + p;
    p = p * x + kBridge[m];
  }
  return {p, dp, d2p};
}

}  // namespace

ConservedSet conserved(const RadialField& u, const RealProfile& W) {
  ConservedSet c;
  const auto rho = u.density();
  c.mass = integrate(u.grid(), rho);
  const double h1 = norm(u, NormKind::H1dot);
  c.kinetic = h1 * h1;
  c.interaction = inner(u.grid(), W.values, rho);
  c.energy = 0.5 * c.kinetic - 0.25 * c.interaction;
  return c;
}

ConservedSet conserved(const RadialField& u, const NonlinearMode& mode) {
  return conserved(u, nonlinear_potential(u, mode));
}

Cutoff cutoff_psi(double R, const RadialGrid& grid) {
  if (!(R > 0.0) || !std::isfinite(R)) fail(ErrorKind::InvalidInput, "cut-off radius must be positive");
  if (3.0 * R >= grid.r_max())
    fail(ErrorKind::Truncation, "cut-off support 3R must lie inside r_max");
  const int n = grid.n();
  std::vector<double> psi(n), dpsi(n), lap(n);
  for (int j = 0; j < n; ++j) {
    const double r = grid.r(j);
    const double s = r / R;
    const auto p = psi_unit(s);
    psi[j] = R * R * p.value;
    dpsi[j] = R * p.first;
    lap[j] = p.second + 2.0 * p.first / s;
  }
  return {R, RealProfile(grid, std::move(psi)), RealProfile(grid, std::move(dpsi)),
          RealProfile(grid, std::move(lap))};
}

VirialSet virial(const RadialField& u, const NonlinearMode& mode, const Cutoff& cutoff,
                 const KernelTable* table) {
  const auto& g = u.grid();
  if (!(cutoff.psi.grid == g)) fail(ErrorKind::InvalidInput, "cut-off grid mismatch");
  VirialSet v;
  const auto rho = u.density();
  v.Va = inner(g, cutoff.psi.values, rho);

  // radial: grad psi . grad u conj(u) = psi'(r) u'(r) conj(u(r))
  const auto du = radial_derivative(u);
  std::vector<double> flux(g.n());
  for (int j = 0; j < g.n(); ++j) flux[j] = cutoff.dpsi.values[j] * std::imag(du[j] * std::conj(u[j]));
  v.Pa = 2.0 * integrate(g, flux);

  const double h1 = norm(u, NormKind::H1dot);
  if (mode.is_local()) {
    // x . grad delta = -3 delta, so the double integral collapses to -3 g int |u|^4
    v.weight_interaction = -3.0 * mode.potential().coefficient() * inner(g, rho, rho);
  } else {
    std::shared_ptr<const KernelTable> owned;
    if (table == nullptr) {
      owned = kernel_table(mode.potential(), g);
      table = owned.get();
    }
    const auto hw = convolve_weight(*table, RealProfile(g, rho));
    v.weight_interaction = inner(g, hw.values, rho);
  }
  v.K_V = 0.5 * h1 * h1 + 0.125 * v.weight_interaction;
  v.rhs_full = 16.0 * v.K_V;
  return v;
}

VirialSet virial(const RadialField& u, const NonlinearMode& mode, double R) {
  return virial(u, mode, cutoff_psi(R, u.grid()), nullptr);
}

double local_mass(const RadialField& u, double D, double lambda) {
  if (!(D >= 0.0) || !(lambda > 0.0)) fail(ErrorKind::InvalidInput, "local_mass needs D >= 0, lambda > 0");
  if (D * lambda >= u.grid().r_max())
    fail(ErrorKind::Truncation, "local_mass ball radius D lambda must lie inside r_max");
  return shell_mass(u, 0.0, D * lambda) / lambda;
}

AnnuliMasses annuli_masses(const RadialField& u, std::span<const double> scales, double M) {
  if (!(M >= 1.0)) fail(ErrorKind::InvalidInput, "annulus ratio M must be >= 1");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) fail(ErrorKind::InvalidInput, "annulus scales must be positive");
    if (i > 0 && scales[i] < scales[i - 1]) fail(ErrorKind::Usage, "annulus scales must be sorted");
  }
  if (!scales.empty() && scales.back() * M >= u.grid().r_max())
    fail(ErrorKind::Truncation, "outer annulus lambda_max M must lie inside r_max");
  AnnuliMasses out;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double raw = shell_mass(u, scales[i] / M, scales[i] * M);
    out.raw.push_back(raw);
    out.scaled.push_back(raw / scales[i]);
    if (i > 0) out.disjoint.push_back(scales[i] / M >= scales[i - 1] * M);
  }
  return out;
}

double momentum_virial(const RadialField& u, double R) {
  const auto cutoff = cutoff_psi(R, u.grid());
  const auto du = radial_derivative(u);
  std::vector<double> flux(u.size());
  for (int j = 0; j < u.size(); ++j)
    flux[j] = cutoff.dpsi.values[j] * std::imag(du[j] * std::conj(u[j]));
  return integrate(u.grid(), flux);
}

CoercivityCheck coercivity(const RadialField& u, const NonlinearMode& mode, double c_v) {
  if (!(c_v > 0.0)) fail(ErrorKind::InvalidInput, "coercivity check needs c_V > 0");
  const auto c = conserved(u, mode);
  const double q = norm(u, NormKind::L3) / c_v;
  CoercivityCheck out;
  out.energy = c.energy;
  out.bound = 0.5 * (1.0 - q * q) * c.kinetic;
  out.holds = out.energy >= out.bound;
  return out;
}

ConcavityBound concavity_bound(const RadialField& u0, const NonlinearMode& mode) {
  const auto& g = u0.grid();
  const auto du = radial_derivative(u0);
  std::vector<double> m(g.n()), flux(g.n());
  for (int j = 0; j < g.n(); ++j) {
    const double r = g.r(j);
    m[j] = r * r * std::norm(u0[j]);
    flux[j] = r * std::imag(std::conj(u0[j]) * du[j]);
  }
  ConcavityBound b;
  b.moment = integrate(g, m);
  b.moment_rate = 4.0 * integrate(g, flux);
  b.energy = conserved(u0, mode).energy;
  b.t_star = std::numeric_limits<double>::infinity();
  if (b.energy < 0.0) {
    const double a = 8.0 * b.energy;
    const double disc = b.moment_rate * b.moment_rate - 4.0 * a * b.moment;
    b.t_star = (-b.moment_rate - std::sqrt(disc)) / (2.0 * a);
  }
  return b;
}

BlowupTimeFit estimate_blowup_time(std::span<const double> t, std::span<const double> lambda) {
  BlowupTimeFit fit;
  fit.t_est = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::min(t.size(), lambda.size());
  if (n < 3) return fit;
  const double cap = 10.0 * lambda[n - 1];
  std::size_t first = n - 1;
  while (first > 0 && lambda[first - 1] <= cap) --first;
  const std::size_t m = n - first;
  if (m < 3) return fit;
  double st = 0.0, sy = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    st += t[i];
    sy += lambda[i] * lambda[i];
  }
  const double tm = st / m, ym = sy / m;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double dt = t[i] - tm;
    stt += dt * dt;
    sty += dt * (lambda[i] * lambda[i] - ym);
  }
  fit.samples = static_cast<int>(m);
  if (!(stt > 0.0)) return fit;
  fit.slope = sty / stt;
  if (!(fit.slope < 0.0)) return fit;
  fit.t_est = tm - ym / fit.slope;
  fit.ok = std::isfinite(fit.t_est);
  return fit;
}

RateFit rate_fit(std::span<const RateSample> samples, double t_est) {
  if (!std::isfinite(t_est)) fail(ErrorKind::FitRefused, "rate fit needs a finite blow-up time");
  std::vector<double> x, y, cq;
  RateFit fit;
  fit.t_est = t_est;
  fit.window_begin = std::numeric_limits<double>::infinity();
  fit.window_end = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    const double gap = t_est - s.t;
    if (!(gap > 0.0 && gap < 1.0) || !(s.l3 > 0.0) || !std::isfinite(s.h1)) continue;
    x.push_back(std::log(std::log(1.0 / gap)));
    y.push_back(std::log(s.l3));
    cq.push_back(s.h1 * std::pow(gap, 0.25));
    fit.window_begin = std::min(fit.window_begin, s.t);
    fit.window_end = std::max(fit.window_end, s.t);
  }
  const std::size_t m = x.size();
  if (m < 8)
    fail(ErrorKind::FitRefused,
         "rate fit needs at least 8 samples before the blow-up time, got " + std::to_string(m));
  fit.samples = static_cast<int>(m);

  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= m;
  ym /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::FitRefused, "rate fit window has no spread in log log(1/(T-t))");
  fit.gamma_hat = sxy / sxx;
  fit.intercept = ym - fit.gamma_hat * xm;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.gamma_hat * x[i]);
    fit.residuals.push_back(r);
    ss += r * r;
  }
  fit.gamma_residual = std::sqrt(ss / m);

  auto sorted = cq;
  std::sort(sorted.begin(), sorted.end());
  fit.c_quarter = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  fit.c_quarter_min = sorted.front();
  fit.c_quarter_max = sorted.back();
  fit.bounded_below = fit.c_quarter_min > 0.0;
  return fit;
}

RegimeReport regime_predicates(double l3_norm, double energy, double lambda, double c_v,
                               double tau) {
  RegimeReport r;
  r.M0 = c_v > 0.0 ? 4.0 * l3_norm / c_v : std::numeric_limits<double>::infinity();
  r.m0_ok = c_v > 0.0 && r.M0 >= 2.0;
  r.tau_energy = std::sqrt(tau) * std::max(lambda * energy, 0.0);
  r.tau_ok = r.tau_energy < 1.0;
  return r;
}

}  // namespace hartree
