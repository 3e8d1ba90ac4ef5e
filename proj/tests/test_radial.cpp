#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <random>

#include "hartree/errors.hpp"
#include "hartree/radial.hpp"
#include "hartree/snapshot.hpp"

using namespace hartree;

namespace {

const double kPi32 = std::pow(kPi, 1.5);

// int_0^a r^2 exp(-b r^2) dr
double gauss_r2_partial(double b, double a) {
  return std::sqrt(kPi) * std::erf(std::sqrt(b) * a) / (4.0 * std::pow(b, 1.5)) -
         a * std::exp(-b * a * a) / (2.0 * b);
}

RadialField gaussian(const RadialGrid& g, double amp = 1.0, double a = 1.0) {
  return RadialField::from_function(g, [=](double r) { return cplx(amp * std::exp(-a * r * r)); });
}

// Random smooth field: sum of a few shell Gaussians with random phases.
RadialField random_field(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int terms = 1 + static_cast<int>(3 * U(rng));
  std::vector<std::array<double, 4>> p;
  for (int t = 0; t < terms; ++t)
    p.push_back({0.2 + 2.0 * U(rng), 4.0 * U(rng), 0.3 + 1.2 * U(rng), 2 * kPi * U(rng)});
  return RadialField::from_function(g, [&](double r) {
    cplx v{};
    for (auto& q : p) {
      const double x = (r - q[1]) / q[2];
      v += q[0] * std::exp(-x * x) * std::polar(1.0, q[3] + 0.3 * r);
    }
    return v;
  });
}

}  // namespace

TEST_CASE("grid invariants") {
  RadialGrid g(64, 8.0);
  CHECK(g.dr() == doctest::Approx(8.0 / 65));
  CHECK(g.r(0) > 0.0);
  CHECK(g.k(0) == doctest::Approx(kPi / 8.0));
  CHECK_THROWS_AS(RadialGrid(8, 1.0), Error);
  CHECK_THROWS_AS(RadialGrid(64, -1.0), Error);
}

TEST_CASE("integrate closed-form gaussians") {
  RadialGrid g(1024, 10.0);
  std::vector<double> zero(g.n(), 0.0);
  CHECK(integrate(g, zero) == 0.0);
  auto f2 = RealProfile::from_function(g, [](double r) { return std::exp(-2 * r * r); });
  auto f3 = RealProfile::from_function(g, [](double r) { return std::exp(-3 * r * r); });
  // oracle: 4 pi sqrt(pi) / (4 a^{3/2}) = (pi/a)^{3/2}
  CHECK(integrate(f2) == doctest::Approx(std::pow(kPi / 2, 1.5)).epsilon(1e-12));
  CHECK(integrate(f3) == doctest::Approx(std::pow(kPi / 3, 1.5)).epsilon(1e-12));

  std::vector<double> bad(g.n(), 1.0);
  bad[10] = std::nan("");
  try {
    integrate(g, bad);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("norms of the unit gaussian") {
  RadialGrid g(1024, 10.0);
  auto u = gaussian(g);
  for (auto kind : {NormKind::L2, NormKind::L3, NormKind::L4, NormKind::H1dot, NormKind::Hhalfdot})
    CHECK(norm(RadialField(g), kind) == 0.0);

  CHECK(norm(u, NormKind::L3) == doctest::Approx(std::sqrt(kPi / 3)).epsilon(1e-12));
  // 16 pi int r^4 e^{-2r^2} dr = 16 pi * 3 sqrt(pi) / (8 * 2^{5/2})
  const double h1sq = 16 * kPi * 3 * std::sqrt(kPi) / (8 * std::pow(2.0, 2.5));
  CHECK(h1sq == doctest::Approx(3 * std::sqrt(2.0) / 4 * kPi32).epsilon(1e-14));
  CHECK(std::pow(norm(u, NormKind::H1dot), 2) == doctest::Approx(h1sq).epsilon(1e-10));
  // int |k| |u^(k)|^2 d^3k / (2 pi)^3 with u^ = pi^{3/2} e^{-k^2/4}: (pi/2) int k^3 e^{-k^2/2} = pi
  // The truncated-domain multiplier samples k^3 e^{-k^2/2} at spacing h = pi/r_max; the
  // Euler-Maclaurin error is h^4 f'''(0) B_4 / 4! = h^4 / 120.
  const double h = kPi / g.r_max();
  const double hh = std::pow(norm(u, NormKind::Hhalfdot), 2);
  CHECK(std::abs(hh - kPi) == doctest::Approx(kPi * std::pow(h, 4) / 240).epsilon(0.05));
  RadialGrid wide(2048, 20.0);
  const double hh_wide = std::pow(norm(gaussian(wide), NormKind::Hhalfdot), 2);
  CHECK(std::abs(hh_wide - kPi) < std::abs(hh - kPi) / 15);
}

TEST_CASE("H1 seminorm: spectral and finite-difference paths agree at second order") {
  double prev_err = 0.0;
  for (int n : {512, 1024, 2048}) {
    RadialGrid g(n, 10.0);
    auto u = gaussian(g, 1.0, 1.0);
    const double spec = std::pow(norm(u, NormKind::H1dot), 2);
    const double fd = h1_seminorm_squared_fd(u);
    const double err = std::abs(fd - spec) / spec;
    CHECK(err < 1e-3);
    if (prev_err > 0.0) CHECK(prev_err / err > 3.5);
    prev_err = err;
  }
}

TEST_CASE("Parseval between physical and spectral L2") {
  RadialGrid g(700, 12.0);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    auto u = random_field(g, rng);
    const auto c = sine_coefficients(u);
    double spec = 0.0;
    for (auto z : c) spec += std::norm(z);
    spec *= 2.0 * kPi * g.r_max();
    const double phys = std::pow(norm(u, NormKind::L2), 2);
    CHECK(std::abs(spec - phys) / phys < 1e-10);
  }
}

TEST_CASE("spectral_map identity, eigenmode and unitary propagation") {
  RadialGrid g(512, 10.0);
  std::mt19937_64 rng(3);
  auto u = random_field(g, rng);
  auto same = spectral_map(u, [](double) { return cplx(1.0); });
  for (int j = 0; j < g.n(); ++j) CHECK(std::abs(same[j] - u[j]) < 1e-13 * (1 + std::abs(u[j])));

  const double kappa = kPi / g.r_max();
  auto mode = RadialField::from_function(g, [&](double r) { return cplx(std::sin(kappa * r) / r); });
  auto lap = spectral_map(mode, [](double k) { return cplx(-k * k); });
  for (int j = 0; j < g.n(); ++j) // round-off in the transform is amplified by k_max^2
    CHECK(g.r(j) * std::abs(lap[j] + kappa * kappa * mode[j]) < 1e-14 * g.k_max() * g.k_max());

  auto packet = gaussian(g, 1.0, 1.5);
  const double dt = 0.37;
  auto moved = spectral_map(packet, [&](double k) { return std::polar(1.0, -k * k * dt); });
  CHECK(norm(moved, NormKind::L2) == doctest::Approx(norm(packet, NormKind::L2)).epsilon(1e-13));
}

TEST_CASE("spectral Laplacian converges at >= second order on a compactly supported profile") {
  const double a = 3.0;
  auto f = [&](double r) { return r < a ? std::pow(1 - r * r / (a * a), 4) : 0.0; };
  auto lap = [&](double r) {
    if (r >= a) return 0.0;
    const double s = 1 - r * r / (a * a);
    return -24.0 / (a * a) * s * s * s + 48.0 * r * r / std::pow(a, 4) * s * s;
  };
  double prev = 0.0;
  for (int n : {128, 256, 512}) {
    RadialGrid g(n, 8.0);
    auto u = RadialField::from_function(g, [&](double r) { return cplx(f(r)); });
    auto du = spectral_map(u, [](double k) { return cplx(-k * k); });
    double err = 0.0;
    for (int j = 0; j < n; ++j) err = std::max(err, std::abs(du[j] - lap(g.r(j))));
    if (prev > 0.0) CHECK(prev / err > 3.5);
    prev = err;
  }
}

TEST_CASE("radial derivative matches the analytic gradient") {
  RadialGrid g(1024, 10.0);
  auto u = gaussian(g);
  auto du = radial_derivative(u);
  for (int j = 0; j < g.n(); j += 37) {
    const double r = g.r(j);
    CHECK(std::abs(du[j] - cplx(-2 * r * std::exp(-r * r))) < 1e-9);
  }
}

TEST_CASE("cumulative ball integrals at off-grid radii") {
  RadialGrid g(1000, 10.0);
  auto u = gaussian(g);
  for (double a : {0.013, 0.5, 1.2345, 2.71, 9.9}) {
    const double exact = kFourPi * gauss_r2_partial(2.0, a);
    CHECK(shell_mass(u, 0.0, a) == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("rho_norm: zero, monotone, truncation, and the radial Gagliardo-Nirenberg bound") {
  RadialGrid g(1024, 16.0);
  CHECK(rho_norm(RadialField(g), 0.5) == 0.0);
  auto u = gaussian(g);
  for (double R = 0.01; R < 3.9; R *= 1.7) CHECK(rho_norm(u, 2 * R) <= rho_norm(u, R) + 1e-15);
  CHECK_THROWS_AS(rho_norm(u, 8.0), Error);
  CHECK_THROWS_AS(rho_norm(u, 0.0), Error);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    auto v = random_field(g, rng);
    const double l3sq = std::pow(norm(v, NormKind::L3), 2);
    for (double R = g.dr(); R < 0.5 * g.r_max(); R *= 2) {
      CHECK(rho_norm(v, R) <= shell_gn_constant() * l3sq);
      CHECK(shell_mass(v, 0.0, R) / R <= ball_gn_constant() * l3sq);
    }
  }
}

TEST_CASE("scaling: u_l(x) = l u(l x) on the rescaled grid") {
  RadialGrid g(4096, 12.0);
  std::mt19937_64 rng(5);
  auto u = random_field(g, rng);
  for (double lam : {0.5, 2.0, 4.0}) {
    auto gl = g.rescaled(lam);
    std::vector<cplx> v(u.values().begin(), u.values().end());
    for (auto& z : v) z *= lam;
    RadialField ul(gl, v);
    CHECK(std::pow(norm(ul, NormKind::H1dot), 2) ==
          doctest::Approx(lam * std::pow(norm(u, NormKind::H1dot), 2)).epsilon(1e-4));
    CHECK(norm(ul, NormKind::L3) == doctest::Approx(norm(u, NormKind::L3)).epsilon(1e-4));
  }
}

TEST_CASE("band-limited resampling onto a different grid") {
  RadialGrid coarse(1024, 10.0);
  RadialGrid fine(1500, 9.0);
  auto u = gaussian(coarse, 2.0, 0.8);
  auto v = resample(u, fine);
  for (int j = 0; j < fine.n(); j += 11) {
    const double r = fine.r(j);
    CHECK(std::abs(v[j] - cplx(2.0 * std::exp(-0.8 * r * r))) < 1e-10);
  }
}

TEST_CASE("snapshot round trip is bit exact") {
  std::mt19937_64 rng(99);
  const auto dir = std::filesystem::temp_directory_path() / "hartree_snapshot_test";
  std::filesystem::create_directories(dir);
  for (int t = 0; t < 5; ++t) {
    RadialGrid g(64 + 17 * t, 3.0 + 0.1 * t);
    auto u = random_field(g, rng);
    const double time = 0.1 * t + 1e-17;
    write_snapshot(dir / "s.snap", u, time);
    auto s = read_snapshot(dir / "s.snap");
    CHECK(s.field.grid() == g);
    CHECK(std::bit_cast<std::uint64_t>(s.time) == std::bit_cast<std::uint64_t>(time));
    for (int j = 0; j < g.n(); ++j) {
      CHECK(std::bit_cast<std::uint64_t>(s.field[j].real()) ==
            std::bit_cast<std::uint64_t>(u[j].real()));
      CHECK(std::bit_cast<std::uint64_t>(s.field[j].imag()) ==
            std::bit_cast<std::uint64_t>(u[j].imag()));
    }
  }
  std::filesystem::remove_all(dir);
}
