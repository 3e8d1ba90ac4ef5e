#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

#include "hartree/errors.hpp"
#include "hartree/potential.hpp"
#include "hartree/radial.hpp"

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

// Independent oracle for the log kernel: the core [0, A] from the antiderivative of
// 4 pi / (r |log r|^a), tanh-sinh in x = -ln r from A to r_outer.
double log_l1_oracle(const Potential& V, double a, double r_outer) {
  const double A = 1e-6;
  const double core = kFourPi * std::pow(std::log(1.0 / A), 1.0 - a) / (a - 1.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double x) {
    const double r = std::exp(-x);
    return kFourPi * r * r * r * std::abs(V.evaluate(r));
  };
  return core + ts.integrate(f, -std::log(r_outer), -std::log(A));
}

}  // namespace

TEST_CASE("log potential construction and domain") {
  CHECK(kind_of([] { make_log_potential(1.0, 0.1); }) == ErrorKind::Domain);
  CHECK(kind_of([] { make_log_potential(2.0, 0.5); }) == ErrorKind::Domain);
  CHECK(kind_of([] { make_log_potential(2.0, 0.0); }) == ErrorKind::Domain);
  const auto V = make_log_potential(2.0, 0.1);
  CHECK(V.evaluate(2 * 0.1 * 1.01) == 0.0);
  CHECK(V.radial_weight(2 * 0.1 * 1.01) == 0.0);
  // closed form inside the core
  for (double r : {1e-6, 1e-3, 0.05, 0.1}) {
    const double ref = 1.0 / (r * r * r * std::pow(std::abs(std::log(r)), 2.0));
    CHECK(V.evaluate(r) == doctest::Approx(ref).epsilon(1e-14));
  }
  // chi is monotone from 1 to 0 across [delta, 2 delta]
  double prev = V.evaluate(0.1) * 0.1 * 0.1 * 0.1 * std::pow(std::log(0.1), 2);
  for (int i = 1; i <= 50; ++i) {
    const double r = 0.1 * std::pow(2.0, i / 50.0);
    const double chi = V.evaluate(r) * r * r * r * std::pow(std::log(r), 2);
    CHECK(chi <= prev + 1e-15);
    prev = chi;
  }
  CHECK(prev == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("delta kernel refuses evaluation") {
  const auto D = Potential::delta(2.0);
  CHECK(D.is_delta());
  CHECK(kind_of([&] { D.evaluate(1.0); }) == ErrorKind::Unsupported);
  CHECK(kind_of([&] { check_conditions(D, 2.5, 1e-3, 1.0, 1000); }) == ErrorKind::Unsupported);
  CHECK(kind_of([&] { scale(D, 0.5); }) == ErrorKind::Unsupported);
  CHECK(D.fourier(3.0) == 2.0);
  CHECK(D.weight_fourier(3.0) == -6.0);
}

TEST_CASE("radial weight matches a central difference of evaluate") {
  const Potential kernels[] = {make_log_potential(2.0, 0.1), Potential::gaussian(0.7, 1.3),
                               Potential::inverse_cube(0.2, 3.0),
                               scale(make_log_potential(1.5, 0.05), 0.3)};
  for (const auto& V : kernels) {
    for (double r : {1e-3, 0.02, 0.13, 0.17, 0.5, 1.1, 4.0}) {
      const double v = V.evaluate(r);
      if (v == 0.0) continue;
      // O(h^2) difference in log r so that the relative step is uniform
      double prev_err = 0.0;
      for (double h : {1e-3, 5e-4}) {
        const double fd =
            (V.evaluate(r * std::exp(h)) - V.evaluate(r * std::exp(-h))) / (2.0 * h);
        const double err = std::abs(fd - V.radial_weight(r));
        if (h == 5e-4) CHECK(err <= 0.3 * prev_err + 1e-9 * std::abs(v));
        prev_err = err;
      }
      CHECK(prev_err <= 1e-3 * std::abs(V.radial_weight(r)) + 1e-9 * std::abs(v));
    }
  }
}

TEST_CASE("L1 norms against an independent quadrature") {
  for (double a : {1.5, 2.0, 3.0}) {
    const auto V = make_log_potential(a, 0.1);
    CHECK(V.l1_norm() == doctest::Approx(log_l1_oracle(V, a, 0.2)).epsilon(1e-9));
    // core mass closed form 4 pi |ln A|^{1-a} / (a - 1)
    const double A = 0.01;
    CHECK(V.mass_below(A) ==
          doctest::Approx(kFourPi * std::pow(std::log(1.0 / A), 1.0 - a) / (a - 1.0))
              .epsilon(1e-12));
  }
  const auto G = Potential::gaussian(0.8, 2.0);
  CHECK(G.l1_norm() == doctest::Approx(2.0 * std::pow(kPi, 1.5) * std::pow(0.8, 3)).epsilon(1e-12));
  CHECK(G.weight_l1_norm() == doctest::Approx(3.0 * G.l1_norm()).epsilon(1e-10));
  const auto N = G.normalized_l1();
  CHECK(N.l1_norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrability detection") {
  // 1/(r^3 |log r|^a) near 0 is integrable iff a > 1
  auto core = [](double a) {
    return [a](double r) { return 1.0 / (r * r * r * std::pow(std::abs(std::log(r)), a)); };
  };
  const auto good = estimate_radial_l1(core(1.5), 0.1);
  CHECK(good.converged);
  CHECK(good.value ==
        doctest::Approx(kFourPi * std::pow(std::log(10.0), -0.5) / 0.5).epsilon(1e-3));
  const auto bad = estimate_radial_l1(core(0.9), 0.1);
  CHECK_FALSE(bad.converged);

  const auto rep = check_conditions(make_log_potential(1.5, 0.1), 2.2, 1e-8, 0.3, 4000);
  CHECK(rep.integrable_ok);
}

TEST_CASE("connection condition on the log kernel") {
  // -rV'/V = 3 - a/|log r| on [0, delta]; just past delta the base term keeps
  // falling before chi' takes over, so the infimum sits slightly below r = delta
  const double a = 2.0, delta = 0.1;
  const auto V = make_log_potential(a, delta);
  const auto rep = check_conditions(V, 2.1, 1e-8, 0.3, 5000);
  const double at_delta = 3.0 - a / std::log(1.0 / delta);
  CHECK(rep.alpha_measured <= at_delta);
  CHECK(rep.alpha_measured == doctest::Approx(at_delta).epsilon(1e-3));
  CHECK(rep.connection_ok);
  CHECK(rep.focusing);
  CHECK(rep.pointwise_ok);
  CHECK(rep.c_measured <= rep.c_bound);
  CHECK_FALSE(check_conditions(V, 2.5, 1e-8, 0.3, 5000).connection_ok);

  // a smaller delta admits alpha = 2.5: 3 - 2/|ln 0.015| = 2.524
  const auto Vs = make_log_potential(a, 0.015);
  const auto reps = check_conditions(Vs, 2.5, 1e-10, 0.1, 5000);
  CHECK(reps.connection_ok);
  CHECK(reps.alpha_measured == doctest::Approx(3.0 - a / std::log(1.0 / 0.015)).epsilon(1e-3));
}

TEST_CASE("gaussian fails the connection condition") {
  const auto G = Potential::gaussian(1.0);
  const auto rep = check_conditions(G, 2.5, 1e-4, 3.0, 2000);
  CHECK_FALSE(rep.connection_ok);
  // -rV'/V = 2 r^2 / w^2, smallest at the first sample
  CHECK(rep.alpha_measured == doctest::Approx(2e-8).epsilon(1e-6));
  CHECK(rep.focusing);
  CHECK(kind_of([&] { check_conditions(G, 2.0, 1e-4, 3.0, 2000); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { check_conditions(G, 2.5, 1e-4, 3.0, 999); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { check_conditions(G, 2.5, 3.0, 1e-4, 2000); }) == ErrorKind::Domain);
}

TEST_CASE("non-positive kernels are flagged non-focusing") {
  const auto G = Potential::gaussian(1.0, -1.0);
  CHECK_FALSE(check_conditions(G, 2.5, 1e-4, 3.0, 2000).focusing);
  const auto L = make_log_potential(2.0, 0.1).with_coefficient(-1.0);
  CHECK_FALSE(check_conditions(L, 2.5, 1e-6, 0.3, 2000).focusing);
}

TEST_CASE("scaling") {
  const auto V = make_log_potential(2.0, 0.1);
  CHECK(kind_of([&] { scale(V, 0.0); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { scale(V, -1.0); }) == ErrorKind::Domain);
  const auto V1 = scale(V, 1.0);
  for (double r : {1e-4, 0.05, 0.15, 0.3}) CHECK(V1.evaluate(r) == V.evaluate(r));
  for (double eps : {0.5, 0.25, 0.125}) {
    const auto Ve = scale(V, eps);
    CHECK(Ve.l1_norm() == doctest::Approx(V.l1_norm()).epsilon(1e-12));
    CHECK(Ve.evaluate(0.07 * eps) == doctest::Approx(V.evaluate(0.07) / (eps * eps * eps)));
  }
  // the report is invariant when the sampling window moves with the kernel
  for (const auto& base : {V, Potential::gaussian(0.5), Potential::inverse_cube(0.1, 2.0)}) {
    const auto r0 = check_conditions(base, 2.5, 1e-6, 5.0, 3000);
    for (double eps : {0.1, 0.37}) {
      const auto r1 = check_conditions(scale(base, eps), 2.5, 1e-6 * eps, 5.0 * eps, 3000);
      CHECK(r1.alpha_measured == doctest::Approx(r0.alpha_measured).epsilon(1e-10));
      CHECK(r1.c_measured == doctest::Approx(r0.c_measured).epsilon(1e-10));
      CHECK(r1.l1_norm == doctest::Approx(r0.l1_norm).epsilon(1e-10));
    }
  }
}

TEST_CASE("fourier transforms") {
  const auto G = Potential::gaussian(0.6, 1.7);
  for (double k : {0.0, 0.3, 2.0, 9.0}) {
    const double ref = 1.7 * std::pow(kPi, 1.5) * std::pow(0.6, 3) * std::exp(-k * k * 0.36 / 4);
    CHECK(G.fourier(k) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(G.weight_fourier(k) == doctest::Approx(ref * (-3.0 + k * k * 0.36 / 2)).epsilon(1e-10));
  }
  const auto V = make_log_potential(2.0, 0.1);
  CHECK(V.fourier(0.0) == doctest::Approx(V.l1_norm()).epsilon(1e-12));
  // weight transform at k = 0 is -3 ||V||_1 (int r V' r^2 = -3 int V r^2)
  CHECK(V.weight_fourier(0.0) == doctest::Approx(-3.0 * V.l1_norm()).epsilon(1e-10));
  // oracle at moderate k: sinc = 1 to 1e-12 on [0, 1e-6], tanh-sinh in x = -ln r above
  boost::math::quadrature::tanh_sinh<double> ts;
  const double A = 1e-6;
  for (double k : {1.0, 7.0}) {
    auto f = [&](double x) {
      const double r = std::exp(-x);
      const double z = k * r;
      return kFourPi * r * r * r * V.evaluate(r) * std::sin(z) / z;
    };
    const double ref = kFourPi / std::log(1.0 / A) + ts.integrate(f, -std::log(0.2), -std::log(A));
    CHECK(V.fourier(k) == doctest::Approx(ref).epsilon(1e-9));
  }
  // scaled transform: V_eps^(k) = V^(eps k)
  const auto Ve = scale(V, 0.25);
  CHECK(Ve.fourier(20.0) == doctest::Approx(V.fourier(5.0)).epsilon(1e-10));
}
