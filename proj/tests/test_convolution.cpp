#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hartree/convolution.hpp"
#include "hartree/errors.hpp"

using namespace hartree;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_diff(const RealProfile& a, const RealProfile& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j)
    m = std::max(m, std::abs(a.values[j] - b.values[j]));
  return m;
}

double inner(const RealProfile& a, const RealProfile& b) {
  std::vector<double> f(a.values.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = a.values[j] * b.values[j];
  return integrate(a.grid, f);
}

// Smooth non-negative density: squared sum of shell Gaussians inside r < 4, each
// shell symmetrized in r so the density is smooth through the origin.
RealProfile random_density(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.0, 3.0), w(0.4, 1.2), a(-1.0, 1.0);
  double c1 = c(rng), c2 = c(rng), w1 = w(rng), w2 = w(rng), a1 = a(rng), a2 = a(rng);
  auto shell = [](double r, double c, double w) {
    return std::exp(-std::pow((r - c) / w, 2)) + std::exp(-std::pow((r + c) / w, 2));
  };
  return RealProfile::from_function(g, [=](double r) {
    const double f = a1 * shell(r, c1, w1) + a2 * shell(r, c2, w2) + 0.3 * std::exp(-r * r);
    return f * f;
  });
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("zero density and input validation") {
  RadialGrid g(256, 10.0);
  RealProfile zero(g, std::vector<double>(256, 0.0));
  const auto V = make_log_potential(2.0, 0.1);
  CHECK(max_abs(convolve_direct(V, zero).values) == 0.0);
  CHECK(max_abs(convolve_spectral(V, zero).values.values) == 0.0);

  auto bad = zero;
  bad.values[10] = -1e-9;
  CHECK(kind_of([&] { convolve_direct(V, bad); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([&] { convolve_spectral(V, bad); }) == ErrorKind::InvalidInput);
  bad.values[10] = -1e-13;  // round-off is tolerated
  CHECK_NOTHROW(convolve_direct(V, bad));
  CHECK(kind_of([&] { convolve_direct(Potential::delta(), zero); }) == ErrorKind::Unsupported);
}

TEST_CASE("gaussian convolution closed form") {
  // e^{-r^2} * e^{-r^2} = (pi/2)^{3/2} e^{-r^2/2}
  RadialGrid g(1024, 12.0);
  auto rho = RealProfile::from_function(g, [](double r) { return std::exp(-r * r); });
  const auto V = Potential::gaussian(1.0);
  const auto d = convolve_direct(V, rho);
  const auto s = convolve_spectral(V, rho);
  CHECK_FALSE(s.used_fallback);
  for (int i = 0; i < 10; ++i) {
    const int j = 5 + i * 40;
    const double ref = std::pow(kPi / 2.0, 1.5) * std::exp(-g.r(j) * g.r(j) / 2.0);
    CHECK(d.values[j] == doctest::Approx(ref).epsilon(1e-10));
    CHECK(s.values.values[j] == doctest::Approx(ref).epsilon(1e-10));
  }
  CHECK(max_diff(d, s.values) <= 1e-8 * max_abs(d.values));
}

TEST_CASE("convolution is symmetric against an even kernel") {
  RadialGrid g(1024, 12.0);
  std::mt19937_64 rng(7);
  for (const auto& V : {make_log_potential(2.0, 0.1), Potential::gaussian(0.8)}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto rho = random_density(g, rng);
      const auto sigma = random_density(g, rng);
      const double lhs = inner(convolve_direct(V, rho), sigma);
      const double rhs = inner(convolve_direct(V, sigma), rho);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("spectral and direct paths agree on random densities") {
  RadialGrid g(1024, 12.0);
  std::mt19937_64 rng(11);
  const Potential smooth[] = {Potential::gaussian(0.5), Potential::inverse_cube(0.3, 1.5)};
  const auto log_kernel = make_log_potential(2.0, 0.1);
  double worst_smooth = 0.0, worst_log = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = random_density(g, rng);
    for (const auto& V : smooth) {
      const auto d = convolve_direct(V, rho);
      worst_smooth =
          std::max(worst_smooth, max_diff(d, convolve_spectral(V, rho).values) / max_abs(d.values));
    }
    const auto d = convolve_direct(log_kernel, rho);
    worst_log = std::max(worst_log,
                         max_diff(d, convolve_spectral(log_kernel, rho).values) / max_abs(d.values));
  }
  MESSAGE("smooth " << worst_smooth << "  log " << worst_log);
  CHECK(worst_smooth <= 1e-8);
  CHECK(worst_log <= 1e-6);
}

TEST_CASE("total mass factorizes") {
  RadialGrid g(1024, 12.0);
  std::mt19937_64 rng(3);
  for (const auto& V : {make_log_potential(2.0, 0.1), Potential::gaussian(0.6, 2.0)}) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto rho = random_density(g, rng);
      const double mass = integrate(g, rho.values);
      const double ref = V.l1_norm() * mass;
      CHECK(integrate(g, convolve_spectral(V, rho).values.values) ==
            doctest::Approx(ref).epsilon(1e-8));
      CHECK(integrate(g, convolve_direct(V, rho).values) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("positivity") {
  RadialGrid g(512, 12.0);
  std::mt19937_64 rng(5);
  for (const auto& V : {make_log_potential(2.0, 0.1), Potential::gaussian(0.3)}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto rho = random_density(g, rng);
      const auto d = convolve_direct(V, rho);
      const auto s = convolve_spectral(V, rho).values;
      const double scale = max_abs(d.values);
      for (int j = 0; j < g.n(); ++j) {
        // round-off of the transforms only
        CHECK(d.values[j] >= -1e-12 * scale);
        CHECK(s.values[j] >= -1e-12 * scale);
      }
    }
  }
}

TEST_CASE("nonlinear potential") {
  RadialGrid g(256, 8.0);
  auto u = RadialField::from_function(g, [](double r) { return cplx(std::exp(-r * r)); });
  const auto W = nonlinear_potential(u, NonlinearMode::cubic_nls());
  for (int j = 0; j < g.n(); ++j) CHECK(W.values[j] == doctest::Approx(std::exp(-2.0 * g.r(j) * g.r(j))).epsilon(1e-14));
  const auto zero = RadialField::from_function(g, [](double) { return cplx(0.0); });
  CHECK(max_abs(nonlinear_potential(zero, NonlinearMode::hartree(Potential::gaussian(1.0))).values) ==
        0.0);
  CHECK(NonlinearMode::cubic_nls(2.0).is_local());
  CHECK(NonlinearMode::hartree(Potential::delta(2.0)).is_local());
  CHECK_FALSE(NonlinearMode::hartree(Potential::gaussian(1.0)).is_local());
}

TEST_CASE("delta approximation") {
  RadialGrid g(2048, 10.0);
  auto u = RadialField::from_function(g, [](double r) { return cplx(std::exp(-r * r)); });
  const auto local = u.density();
  const auto base = Potential::gaussian(1.0).normalized_l1();
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    const auto W = nonlinear_potential(u, NonlinearMode::hartree(scale(base, eps)));
    double err = 0.0;
    for (int j = 0; j < g.n(); ++j) err = std::max(err, std::abs(W.values[j] - local[j]));
    CHECK(err < prev);
    // second-moment mollifier: error ~ eps^2
    if (std::isfinite(prev)) CHECK(err == doctest::Approx(prev / 4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("interaction energy scales like lambda") {
  // u_l(x) = l u(l x), V_l(x) = l^3 V(l x) = V scaled by 1/l
  const auto V = make_log_potential(2.0, 0.1);
  auto profile = [](double r) { return cplx(1.0 + 0.5 * r * r, 0.2 * r) * std::exp(-r * r); };
  RadialGrid g(2048, 10.0);
  const auto u = RadialField::from_function(g, profile);
  auto interaction = [](const RadialField& f, const Potential& K) {
    RealProfile rho(f.grid(), f.density());
    return inner(convolve_spectral(K, rho).values, rho);
  };
  const double base = interaction(u, V);
  for (double lam : {2.0, 4.0}) {
    // same samples on the grid with r_max / lam represent u(lam r)
    std::vector<cplx> v(u.values().begin(), u.values().end());
    for (auto& z : v) z *= lam;
    RadialField ul(g.rescaled(lam), v);
    const double scaled = interaction(ul, scale(V, 1.0 / lam));
    CHECK(scaled == doctest::Approx(lam * base).epsilon(1e-4));
  }
}

TEST_CASE("kernel tables are cached per kernel and grid") {
  RadialGrid g(128, 5.0);
  const auto V = Potential::gaussian(1.0);
  CHECK(kernel_table(V, g) == kernel_table(V, g));
  CHECK(kernel_table(V, g) != kernel_table(V, RadialGrid(128, 6.0)));
  CHECK(kernel_table(V, g) != kernel_table(V.with_coefficient(2.0), g));
  CHECK(kernel_table(V, g)->spectral_ok());
}
