#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hartree/diagnostics.hpp"
#include "hartree/errors.hpp"

using namespace hartree;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

RadialField gaussian(const RadialGrid& g, double amp, double width, double phase_slope = 0.0) {
  return RadialField::from_function(g, [=](double r) {
    return amp * std::exp(-(r / width) * (r / width)) * std::polar(1.0, phase_slope * r * r);
  });
}

// positive smooth fields with random bumps
RadialField random_field(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.0, 2.5), w(0.4, 1.0), a(0.2, 1.5), ph(-1.0, 1.0);
  const double c1 = c(rng), w1 = w(rng), a1 = a(rng), a2 = a(rng), p = ph(rng);
  return RadialField::from_function(g, [=](double r) {
    const double bump = std::exp(-std::pow((r - c1) / w1, 2)) + std::exp(-std::pow((r + c1) / w1, 2));
    return (a1 * bump + a2 * std::exp(-r * r)) * std::polar(1.0, p * r * r);
  });
}

}  // namespace

TEST_CASE("conserved quantities of a gaussian, cubic NLS") {
  RadialGrid g(1024, 10.0);
  const auto u = gaussian(g, 1.0, 1.0);
  const auto c = conserved(u, NonlinearMode::cubic_nls());
  const double kinetic = 3.0 * std::sqrt(2.0) / 4.0 * std::pow(kPi, 1.5);
  const double quartic = std::pow(kPi / 4.0, 1.5);
  CHECK(c.kinetic == doctest::Approx(kinetic).epsilon(1e-10));
  CHECK(c.interaction == doctest::Approx(quartic).epsilon(1e-10));
  CHECK(c.energy == doctest::Approx(0.5 * kinetic - 0.25 * quartic).epsilon(1e-10));
  CHECK(c.mass == doctest::Approx(std::pow(kPi / 2.0, 1.5)).epsilon(1e-12));
  CHECK(c.momentum == 0.0);

  const auto zero = gaussian(g, 0.0, 1.0);
  const auto z = conserved(zero, NonlinearMode::hartree(make_log_potential(2.0, 0.1)));
  CHECK(z.mass == 0.0);
  CHECK(z.energy == 0.0);
  CHECK(z.momentum == 0.0);
}

TEST_CASE("cut-off function") {
  RadialGrid g(2999, 30.0);  // dr = 0.01
  const double R = 2.0;
  const auto c = cutoff_psi(R, g);
  for (int j = 0; j < g.n(); ++j) {
    const double r = g.r(j);
    if (r <= 2.0 * R) {
      CHECK(c.psi.values[j] == doctest::Approx(0.5 * r * r).epsilon(1e-14));
      CHECK(c.laplacian.values[j] == doctest::Approx(3.0).epsilon(1e-12));
    }
    if (r >= 3.0 * R) {
      CHECK(c.psi.values[j] == 0.0);
      CHECK(c.dpsi.values[j] == 0.0);
    }
  }
  CHECK(c.psi.values[199] == doctest::Approx(R * R / 2.0).epsilon(1e-14));

  // derivative samples against centred differences on a fine grid, through both junctions
  RadialGrid fine(299999, 30.0);  // dr = 1e-4
  const auto f = cutoff_psi(R, fine);
  const double h = fine.dr();
  double worst = 0.0;
  for (int j = 1; j + 1 < fine.n(); ++j) {
    const double fd = (f.psi.values[j + 1] - f.psi.values[j - 1]) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - f.dpsi.values[j]));
  }
  CHECK(worst < 1e-6);
  // C^2: psi'' has no jump at 2R (j = 39999) or 3R (j = 59999)
  auto second = [&](int j) { return (f.dpsi.values[j + 1] - f.dpsi.values[j - 1]) / (2.0 * h); };
  CHECK(second(40000) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(second(39998) - second(40000)) < 0.02);
  CHECK(std::abs(second(59998) - second(60000)) < 0.02);
  CHECK(std::abs(second(60000)) < 1e-12);

  // int Lap psi rho = 3 int rho for rho inside 2R
  const auto rho = RealProfile::from_function(g, [](double r) { return std::exp(-4.0 * r * r); });
  std::vector<double> lr(g.n());
  for (int j = 0; j < g.n(); ++j) lr[j] = c.laplacian.values[j] * rho.values[j];
  CHECK(integrate(g, lr) == doctest::Approx(3.0 * integrate(rho)).epsilon(1e-12));

  CHECK(kind_of([&] { cutoff_psi(10.0, g); }) == ErrorKind::Truncation);
  CHECK(kind_of([&] { cutoff_psi(-1.0, g); }) == ErrorKind::InvalidInput);
}

TEST_CASE("virial set structure") {
  RadialGrid g(1024, 16.0);
  const auto mode = NonlinearMode::hartree(make_log_potential(2.0, 0.1));
  const auto real_u = gaussian(g, 1.0, 1.0);
  const auto v = virial(real_u, mode, 4.0);
  CHECK(std::abs(v.Pa) < 1e-14);
  CHECK(v.rhs_full == doctest::Approx(16.0 * v.K_V).epsilon(1e-12));
  CHECK(v.weight_interaction < 0.0);

  const auto chirped = RadialField::from_function(
      g, [](double r) { return std::polar(std::exp(-r * r), r); });
  const auto w = virial(chirped, mode, 4.0);
  const double mv = momentum_virial(chirped, 4.0);
  CHECK(std::abs(mv) > 0.1);
  CHECK(mv == doctest::Approx(0.5 * w.Pa).epsilon(1e-14));

  // delta mode: x.grad delta = -3 delta
  const auto nls = virial(real_u, NonlinearMode::cubic_nls(), 4.0);
  const double quartic = std::pow(kPi / 4.0, 1.5);
  CHECK(nls.weight_interaction == doctest::Approx(-3.0 * quartic).epsilon(1e-10));
  CHECK(nls.rhs_full == doctest::Approx(8.0 * norm(real_u, NormKind::H1dot) *
                                            norm(real_u, NormKind::H1dot) - 6.0 * quartic)
                            .epsilon(1e-10));

  // psi_R = |x|^2/2 on the support: V_a is half the second moment
  std::vector<double> m2(g.n());
  const auto rho = real_u.density();
  for (int j = 0; j < g.n(); ++j) m2[j] = g.r(j) * g.r(j) * rho[j];
  CHECK(v.Va == doctest::Approx(0.5 * integrate(g, m2)).epsilon(1e-12));
}

TEST_CASE("K_V <= E for an admissible kernel on random fields") {
  RadialGrid g(1024, 12.0);
  std::mt19937_64 rng(17);
  const auto mode = NonlinearMode::hartree(make_log_potential(2.0, 0.1));
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_field(g, rng);
    const auto v = virial(u, mode, 3.5);
    const auto c = conserved(u, mode);
    CHECK(v.K_V <= c.energy + 1e-6 * std::abs(c.energy));
  }
}

TEST_CASE("momentum virial bounded by Cauchy-Schwarz") {
  RadialGrid g(1024, 16.0);
  const double R = 3.0;
  const auto cut = cutoff_psi(R, g);
  double ratio = 0.0;
  for (int j = 0; j < g.n(); ++j)
    if (cut.psi.values[j] > 0.0)
      ratio = std::max(ratio, cut.dpsi.values[j] * cut.dpsi.values[j] / cut.psi.values[j]);
  for (double slope : {0.3, 1.0, 3.0}) {
    const auto u = gaussian(g, 1.0, 1.5, slope);
    const double mv = std::abs(momentum_virial(u, R));
    const auto v = virial(u, NonlinearMode::cubic_nls(), R);
    const double bound = std::sqrt(ratio) * norm(u, NormKind::H1dot) * std::sqrt(v.Va);
    CHECK(mv <= bound);
  }
}

TEST_CASE("local mass") {
  RadialGrid g(1024, 12.0);
  const auto u = gaussian(g, 1.0, 1.0);
  CHECK(local_mass(gaussian(g, 0.0, 1.0), 2.0, 1.0) == 0.0);
  double prev = 0.0;
  for (double D = 0.5; D < 11.0; D += 0.5) {
    const double m = local_mass(u, D, 1.0);
    CHECK(m >= prev);
    prev = m;
  }
  const double lambda = 0.5;
  CHECK(local_mass(u, 23.0, lambda) == doctest::Approx(norm(u, NormKind::L2) * norm(u, NormKind::L2) / lambda)
                                          .epsilon(1e-10));
  CHECK(kind_of([&] { local_mass(u, 13.0, 1.0); }) == ErrorKind::Truncation);
}

TEST_CASE("annuli masses") {
  RadialGrid g(2048, 40.0);
  const double M = 1.5;
  std::vector<double> scales{0.3};
  for (int i = 0; i < 4; ++i) scales.push_back(scales.back() * M * M * 1.01);
  const auto u = gaussian(g, 1.0, 2.0);
  const auto a = annuli_masses(u, scales, M);
  REQUIRE(a.disjoint.size() == scales.size() - 1);
  CHECK(std::all_of(a.disjoint.begin(), a.disjoint.end(), [](bool b) { return b; }));
  double sum = 0.0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    sum += a.raw[i];
    CHECK(a.scaled[i] == doctest::Approx(a.raw[i] / scales[i]));
  }
  CHECK(sum <= norm(u, NormKind::L2) * norm(u, NormKind::L2));

  const auto z = annuli_masses(gaussian(g, 0.0, 1.0), scales, M);
  CHECK(std::all_of(z.raw.begin(), z.raw.end(), [](double x) { return x == 0.0; }));

  std::vector<double> unsorted{1.0, 0.5};
  CHECK(kind_of([&] { annuli_masses(u, unsorted, M); }) == ErrorKind::Usage);
  std::vector<double> big{30.0};
  CHECK(kind_of([&] { annuli_masses(u, big, M); }) == ErrorKind::Truncation);
}

TEST_CASE("rate fit on synthetic series") {
  const double T = 0.7;
  std::vector<RateSample> s;
  for (int i = 0; i < 60; ++i) {
    const double gap = 0.5 * std::pow(10.0, -0.12 * i);
    s.push_back({T - gap, std::pow(gap, -0.25), std::pow(std::log(1.0 / gap), 0.1)});
  }
  const auto fit = rate_fit(s, T);
  CHECK(fit.gamma_hat == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(fit.gamma_residual < 1e-10);
  CHECK(fit.c_quarter == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.c_quarter_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.bounded_below);
  CHECK(fit.samples == 60);
  CHECK(fit.residuals.size() == 60);

  // noisy power with log prefactor stays inside +-0.02
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.002);
  for (auto& x : s) x.l3 *= std::exp(noise(rng));
  CHECK(std::abs(rate_fit(s, T).gamma_hat - 0.1) < 0.02);

  std::vector<RateSample> few(s.begin(), s.begin() + 7);
  CHECK(kind_of([&] { rate_fit(few, T); }) == ErrorKind::FitRefused);
  CHECK(kind_of([&] { rate_fit(s, std::nan("")); }) == ErrorKind::FitRefused);
  // samples after T are ignored, not extrapolated
  std::vector<RateSample> late(s.begin(), s.begin() + 7);
  late.push_back({T + 0.1, 1.0, 1.0});
  CHECK(kind_of([&] { rate_fit(late, T); }) == ErrorKind::FitRefused);
}

TEST_CASE("blow-up time from lambda^2") {
  const double T = 0.31;
  std::vector<double> t, lambda;
  for (int i = 0; i < 100; ++i) {
    const double gap = 0.3 * std::pow(0.9, i);
    t.push_back(T - gap);
    lambda.push_back(std::sqrt(2.0 * gap));
  }
  const auto fit = estimate_blowup_time(t, lambda);
  REQUIRE(fit.ok);
  CHECK(fit.t_est == doctest::Approx(T).epsilon(1e-12));
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-10));
  // only the last decade of lambda enters
  CHECK(fit.samples < 100);
  CHECK(lambda[100 - fit.samples] <= 10.0 * lambda.back());

  std::vector<double> flat(10, 1.0), times(10);
  for (int i = 0; i < 10; ++i) times[i] = i;
  CHECK_FALSE(estimate_blowup_time(times, flat).ok);
}

TEST_CASE("regime predicates") {
  const auto r = regime_predicates(1.0, 2.0, 0.25, 1.0, 1.0);
  CHECK(r.M0 == 4.0);
  CHECK(r.m0_ok);
  CHECK(r.tau_energy == doctest::Approx(0.5));
  CHECK(r.tau_ok);
  const auto neg = regime_predicates(0.1, -5.0, 1.0, 1.0, 100.0);
  CHECK(neg.tau_energy == 0.0);
  CHECK_FALSE(neg.m0_ok);
  const auto weak = regime_predicates(1.0, 1.0, 1.0, 0.0, 1.0);
  CHECK_FALSE(weak.m0_ok);
}

TEST_CASE("energy coercivity is evaluated with a measured c_V") {
  RadialGrid g(1024, 12.0);
  const auto V = make_log_potential(2.0, 0.1);
  const auto rep = check_conditions(V, 2.1, 1e-6, 0.2, 4000);
  REQUIRE(rep.c_v > 0.0);
  const auto mode = NonlinearMode::hartree(V);
  std::mt19937_64 rng(23);
  int holds = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = coercivity(random_field(g, rng), mode, rep.c_v);
    CHECK(std::isfinite(c.bound));
    holds += c.holds;
  }
  MESSAGE("coercivity held on " << holds << "/10 fields");
  CHECK(kind_of([&] { coercivity(gaussian(g, 1.0, 1.0), mode, 0.0); }) == ErrorKind::InvalidInput);
}
