#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hartree::detail {

using GK31 = boost::math::quadrature::gauss_kronrod<double, 31>;

template <class F>
double gk_refine(F& f, double a, double b, unsigned depth, double abs_tol, double floor, double est,
                 double err) {
  if (err <= std::max(abs_tol, floor) || depth == 0) return est;
  const double mid = 0.5 * (a + b);
  double el = 0.0, er = 0.0;
  const double left = GK31::integrate(f, a, mid, 0, 0.0, &el);
  const double right = GK31::integrate(f, mid, b, 0, 0.0, &er);
  return gk_refine(f, a, mid, depth - 1, 0.5 * abs_tol, floor, left, el) +
         gk_refine(f, mid, b, depth - 1, 0.5 * abs_tol, floor, right, er);
}

/// Adaptive Gauss-Kronrod on [a, b]; the tolerance is relative to the L1 norm of
/// the integrand so that cancelling (oscillatory) integrals terminate. Pieces whose
/// error estimate sits at the round-off floor (relative to `scale`, or to the L1
/// norm on [a, b] when larger) are accepted.
template <class F>
double gk(F&& f, double a, double b, unsigned depth = 12, double tol = 1e-13, double scale = 0.0) {
  if (!(b > a)) return 0.0;
  double err = 0.0, l1 = 0.0;
  const double est = GK31::integrate(f, a, b, 0, 0.0, &err, &l1);
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(l1, scale);
  return gk_refine(f, a, b, depth, tol * l1, floor, est, err);
}

/// Gauss-Kronrod over [a, b] split so each piece spans at most `max_phase`
/// radians of an oscillation sin(k r).
template <class F>
double gk_oscillatory(F&& f, double a, double b, double k, double max_phase = 4.0 * M_PI) {
  if (!(b > a)) return 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) * k / max_phase)));
  const double h = (b - a) / pieces;
  // the whole-interval L1 sets the round-off floor for every piece
  double scale = 0.0;
  for (int p = 0; p < pieces; ++p) {
    double err = 0.0, l1 = 0.0;
    GK31::integrate(f, a + p * h, a + (p + 1) * h, 0, 0.0, &err, &l1);
    scale += l1;
  }
  double sum = 0.0;
  for (int p = 0; p < pieces; ++p) sum += gk(f, a + p * h, a + (p + 1) * h, 10, 1e-13, scale);
  return sum;
}

inline double sinc(double z) {
  if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

}  // namespace hartree::detail
