#include "hartree/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hartree/errors.hpp"
#include "hartree/sine_transform.hpp"

namespace hartree {

RadialGrid::RadialGrid(int n, double r_max) : n_(n), r_max_(r_max), dr_(r_max / (n + 1)) {
  if (n < 16) fail(ErrorKind::InvalidInput, "radial grid needs n >= 16, got " + std::to_string(n));
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    fail(ErrorKind::InvalidInput, "radial grid needs finite r_max > 0");
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> r(n_);
  for (int j = 0; j < n_; ++j) r[j] = this->r(j);
  return r;
}

std::vector<double> RadialGrid::wavenumbers() const {
  std::vector<double> k(n_);
  for (int m = 0; m < n_; ++m) k[m] = this->k(m);
  return k;
}

RadialGrid RadialGrid::rescaled(double lambda) const { return RadialGrid(n_, r_max_ / lambda); }

RadialField::RadialField(RadialGrid grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.n())
    fail(ErrorKind::InvalidInput, "field size does not match grid");
  if (!all_finite()) fail(ErrorKind::InvalidInput, "field contains non-finite samples");
}

RadialField::RadialField(RadialGrid grid) : grid_(grid), values_(grid.n(), cplx{}) {}

RadialField RadialField::from_function(const RadialGrid& grid,
                                       const std::function<cplx(double)>& f) {
  std::vector<cplx> v(grid.n());
  for (int j = 0; j < grid.n(); ++j) v[j] = f(grid.r(j));
  return RadialField(grid, std::move(v));
}

bool RadialField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

std::vector<double> RadialField::density() const {
  std::vector<double> rho(values_.size());
  for (std::size_t j = 0; j < values_.size(); ++j) rho[j] = std::norm(values_[j]);
  return rho;
}

RealProfile::RealProfile(RadialGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (static_cast<int>(values.size()) != grid.n())
    fail(ErrorKind::InvalidInput, "profile size does not match grid");
}

RealProfile RealProfile::from_function(const RadialGrid& grid,
                                       const std::function<double(double)>& f) {
  std::vector<double> v(grid.n());
  for (int j = 0; j < grid.n(); ++j) v[j] = f(grid.r(j));
  return RealProfile(grid, std::move(v));
}

double integrate(const RadialGrid& grid, std::span<const double> f) {
  if (static_cast<int>(f.size()) != grid.n())
    fail(ErrorKind::InvalidInput, "integrand size does not match grid");
  double sum = 0.0;
  for (int j = 0; j < grid.n(); ++j) {
    if (!std::isfinite(f[j])) fail(ErrorKind::InvalidInput, "non-finite integrand sample");
    const double r = grid.r(j);
    sum += f[j] * r * r;
  }
  return kFourPi * sum * grid.dr();
}

double integrate(const RealProfile& f) { return integrate(f.grid, f.values); }

std::vector<cplx> sine_coefficients(const RadialField& u) {
  const auto& g = u.grid();
  std::vector<cplx> w(g.n()), c(g.n());
  for (int j = 0; j < g.n(); ++j) w[j] = g.r(j) * u[j];
  SineTransform(g.n()).forward(w, c);
  return c;
}

RadialField from_sine_coefficients(const RadialGrid& grid, std::span<const cplx> coeffs) {
  std::vector<cplx> w(grid.n());
  SineTransform(grid.n()).inverse(coeffs, w);
  for (int j = 0; j < grid.n(); ++j) w[j] /= grid.r(j);
  return RadialField(grid, std::move(w));
}

namespace {

double spectral_seminorm_squared(const RadialField& u, double power) {
  const auto c = sine_coefficients(u);
  const auto& g = u.grid();
  double sum = 0.0;
  for (int m = 0; m < g.n(); ++m) sum += std::pow(g.k(m), power) * std::norm(c[m]);
  return 2.0 * kPi * g.r_max() * sum;
}

double lebesgue(const RadialField& u, double p) {
  std::vector<double> f(u.size());
  for (int j = 0; j < u.size(); ++j) f[j] = std::pow(std::abs(u[j]), p);
  return std::pow(integrate(u.grid(), f), 1.0 / p);
}

}  // namespace

double norm(const RadialField& u, NormKind kind) {
  switch (kind) {
    case NormKind::L2: return lebesgue(u, 2.0);
    case NormKind::L3: return lebesgue(u, 3.0);
    case NormKind::L4: return lebesgue(u, 4.0);
    case NormKind::H1dot: return std::sqrt(spectral_seminorm_squared(u, 2.0));
    case NormKind::Hhalfdot: return std::sqrt(spectral_seminorm_squared(u, 1.0));
  }
  fail(ErrorKind::Usage, "unknown norm kind");
}

double h1_seminorm_squared_fd(const RadialField& u) {
  const auto& g = u.grid();
  const int n = g.n();
  // w at nodes 0..n+1 with w(0) = w(r_max) = 0; |w'|^2 on cell midpoints.
  auto w = [&](int i) -> cplx {
    if (i <= 0 || i > n) return {};
    return g.r(i - 1) * u[i - 1];
  };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) sum += std::norm((w(i + 1) - w(i)) / g.dr());
  return kFourPi * sum * g.dr();
}

RadialField spectral_map(const RadialField& u, const std::function<cplx(double)>& multiplier) {
  const auto& g = u.grid();
  auto c = sine_coefficients(u);
  for (int m = 0; m < g.n(); ++m) {
    const cplx mult = multiplier(g.k(m));
    if (!std::isfinite(mult.real()) || !std::isfinite(mult.imag()))
      fail(ErrorKind::InvalidInput, "spectral multiplier not finite");
    c[m] *= mult;
  }
  return from_sine_coefficients(g, c);
}

RealProfile spectral_map(const RealProfile& f, const std::function<double(double)>& multiplier) {
  const auto& g = f.grid;
  const int n = g.n();
  std::vector<double> w(n), c(n);
  for (int j = 0; j < n; ++j) w[j] = g.r(j) * f.values[j];
  SineTransform dst(n);
  dst.forward(w, c);
  for (int m = 0; m < n; ++m) {
    const double mult = multiplier(g.k(m));
    if (!std::isfinite(mult)) fail(ErrorKind::InvalidInput, "spectral multiplier not finite");
    c[m] *= mult;
  }
  dst.inverse(c, w);
  for (int j = 0; j < n; ++j) w[j] /= g.r(j);
  return RealProfile(g, std::move(w));
}

std::vector<cplx> radial_derivative(const RadialField& u) {
  const auto& g = u.grid();
  const int n = g.n();
  const auto c = sine_coefficients(u);
  std::vector<double> re(n), im(n), wre(n + 2), wim(n + 2);
  for (int m = 0; m < n; ++m) {
    re[m] = c[m].real() * g.k(m);
    im[m] = c[m].imag() * g.k(m);
  }
  SineTransform dst(n);
  dst.cosine_synthesis(re, wre);
  dst.cosine_synthesis(im, wim);
  // u' = (w' - u) / r
  std::vector<cplx> du(n);
  for (int j = 0; j < n; ++j) du[j] = (cplx{wre[j + 1], wim[j + 1]} - u[j]) / g.r(j);
  return du;
}

RadialField resample(const RadialField& u, const RadialGrid& target) {
  const auto& g = u.grid();
  const auto c = sine_coefficients(u);
  std::vector<cplx> v(target.n());
  for (int j = 0; j < target.n(); ++j) {
    const double r = target.r(j);
    if (r >= g.r_max()) continue;
    cplx w{};
    // sin(k_m r) by the Chebyshev-style recurrence sin((m+1)x) = 2 cos x sin(mx) - sin((m-1)x)
    const double x = kPi * r / g.r_max();
    const double twocos = 2.0 * std::cos(x);
    double s_prev = 0.0, s_cur = std::sin(x);
    for (int m = 0; m < g.n(); ++m) {
      w += c[m] * s_cur;
      const double s_next = twocos * s_cur - s_prev;
      s_prev = s_cur;
      s_cur = s_next;
    }
    v[j] = w / r;
  }
  return RadialField(target, std::move(v));
}

// --- cumulative integration ------------------------------------------------

namespace {

// Lagrange basis on local nodes x = -2..3.
std::array<double, 6> lagrange6(double x) {
  std::array<double, 6> l{};
  for (int q = 0; q < 6; ++q) {
    double v = 1.0;
    const double xq = q - 2;
    for (int p = 0; p < 6; ++p) {
      if (p == q) continue;
      const double xp = p - 2;
      v *= (x - xp) / (xq - xp);
    }
    l[q] = v;
  }
  return l;
}

constexpr std::array<double, 6> kFullCell = {11.0 / 1440, -93.0 / 1440, 802.0 / 1440,
                                             802.0 / 1440, -93.0 / 1440, 11.0 / 1440};

}  // namespace

CumulativeIntegral::CumulativeIntegral(const RadialGrid& grid, std::span<const double> samples,
                                       bool origin_odd)
    : grid_(grid), g_(grid.n() + 2, 0.0), origin_odd_(origin_odd), cumulative_(grid.n() + 2, 0.0) {
  const int n = grid.n();
  if (static_cast<int>(samples.size()) != n)
    fail(ErrorKind::InvalidInput, "cumulative integral: size mismatch");
  for (int j = 0; j < n; ++j) g_[j + 1] = samples[j];
  // even extension: g(0) from the even quartic through the first three nodes
  if (!origin_odd_) g_[0] = 1.5 * g_[1] - 0.6 * g_[2] + 0.1 * g_[3];
  for (int i = 0; i <= n; ++i) {
    double cell = 0.0;
    for (int q = 0; q < 6; ++q) cell += kFullCell[q] * sample(i - 2 + q);
    cumulative_[i + 1] = cumulative_[i] + cell * grid_.dr();
  }
}

double CumulativeIntegral::sample(int i) const {
  const int last = grid_.n() + 1;
  if (i < 0) return origin_odd_ ? -g_[-i] : g_[-i];
  if (i > last) return g_[2 * last - i];
  return g_[i];
}

double CumulativeIntegral::partial_cell(int cell, double theta) const {
  // three-point Gauss-Legendre on [0, theta] is exact for the quintic interpolant
  static constexpr std::array<double, 3> nodes = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> weights = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  double acc = 0.0;
  for (int p = 0; p < 3; ++p) {
    const double x = 0.5 * theta * (nodes[p] + 1.0);
    const auto l = lagrange6(x);
    double v = 0.0;
    for (int q = 0; q < 6; ++q) v += l[q] * sample(cell - 2 + q);
    acc += weights[p] * v;
  }
  return 0.5 * theta * acc * grid_.dr();
}

double CumulativeIntegral::operator()(double a) const {
  if (a <= 0.0) return 0.0;
  if (a >= grid_.r_max()) return total();
  const double pos = a / grid_.dr();
  const int cell = std::min(static_cast<int>(std::floor(pos)), grid_.n());
  const double theta = pos - cell;
  if (theta <= 0.0) return cumulative_[cell];
  return cumulative_[cell] + partial_cell(cell, theta);
}

double shell_mass(const RadialField& u, double a, double b) {
  const auto& g = u.grid();
  std::vector<double> w2(g.n());
  for (int j = 0; j < g.n(); ++j) w2[j] = std::norm(g.r(j) * u[j]);
  CumulativeIntegral cum(g, w2, false);
  return kFourPi * (cum(b) - cum(a));
}

double rho_norm(const RadialField& u, double R) {
  const auto& g = u.grid();
  if (!(R > 0.0) || R >= 0.5 * g.r_max())
    fail(ErrorKind::Truncation, "rho_norm requires 0 < R < r_max/2");
  std::vector<double> w2(g.n());
  for (int j = 0; j < g.n(); ++j) w2[j] = std::norm(g.r(j) * u[j]);
  CumulativeIntegral cum(g, w2, false);
  double best = 0.0;
  for (double Rp = R; Rp <= 0.5 * g.r_max(); Rp *= 2.0) {
    best = std::max(best, kFourPi * (cum(2.0 * Rp) - cum(Rp)) / Rp);
  }
  return best;
}

double shell_gn_constant() { return std::cbrt(28.0 * kPi / 3.0); }
double ball_gn_constant() { return std::cbrt(4.0 * kPi / 3.0); }

}  // namespace hartree
