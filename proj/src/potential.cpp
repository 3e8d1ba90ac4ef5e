#include "hartree/potential.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hartree/errors.hpp"
#include "hartree/format.hpp"
#include "hartree/radial.hpp"
#include "quadrature.hpp"

namespace hartree {

namespace {

using detail::gk;
using detail::gk_oscillatory;
using detail::sinc;

const double kLn2 = std::log(2.0);
const double kPi32 = std::pow(kPi, 1.5);

// Quintic smoothstep falling from 1 at r = lo to 0 at r = 2 lo, in the variable log2(r/lo).
struct LogSmoothstep {
  double lo;

  double value(double r) const {
    if (r <= lo) return 1.0;
    if (r >= 2.0 * lo) return 0.0;
    const double s = std::log(r / lo) / kLn2;
    // 1 - s^3 (10 - 15 s + 6 s^2) without cancellation near s = 1
    const double t = 1.0 - s;
    return t * t * t * (1.0 + s * (3.0 + 6.0 * s));
  }
  // r chi'(r)
  double log_slope(double r) const {
    if (r <= lo || r >= 2.0 * lo) return 0.0;
    const double s = std::log(r / lo) / kLn2;
    return -30.0 * s * s * (1.0 - s) * (1.0 - s) / kLn2;
  }
  static double max_log_slope() { return 30.0 / 16.0 / kLn2; }
};

// --- log core ---------------------------------------------------------------

struct LogCoreImpl {
  double a;
  double delta;
  LogSmoothstep chi{delta};

  double bare(double r) const { return 1.0 / (r * r * r * std::pow(std::abs(std::log(r)), a)); }

  double value(double r) const {
    if (r >= 2.0 * delta) return 0.0;
    return chi.value(r) * bare(r);
  }
  double weight(double r) const {
    if (r >= 2.0 * delta) return 0.0;
    const double ell = std::abs(std::log(r));
    return bare(r) * (chi.log_slope(r) + chi.value(r) * (-3.0 + a / ell));
  }
  // 4 pi int_0^A r^2 V, A <= delta
  double core_mass(double A) const { return kFourPi * std::pow(std::abs(std::log(A)), 1.0 - a) / (a - 1.0); }
  // 4 pi int_0^A r^2 (r V'), A <= delta
  double core_weight_mass(double A) const {
    return -3.0 * core_mass(A) + kFourPi * std::pow(std::abs(std::log(A)), -a);
  }

  double mass(double A) const {
    if (A <= delta) return core_mass(A);
    const double top = std::min(A, 2.0 * delta);
    return core_mass(delta) +
           gk([&](double r) { return kFourPi * r * r * value(r); }, delta, top);
  }
  double l1() const { return mass(2.0 * delta); }

  double weight_l1() const {
    // r V' < 0 on the core where |log r| > a/3
    const double r_sign = std::exp(-a / 3.0);
    double core;
    if (delta <= r_sign) {
      core = -core_weight_mass(delta);
    } else {
      core = -core_weight_mass(r_sign) + (core_weight_mass(delta) - core_weight_mass(r_sign));
    }
    return core + gk([&](double r) { return kFourPi * r * r * std::abs(weight(r)); }, delta,
                     2.0 * delta);
  }

  template <class Core, class LogIntegrand, class Outer>
  double transform(double k, Core core, LogIntegrand log_integrand, Outer outer) const {
    const double r_s = k > 0.0 ? std::min(delta, 1e-4 / k) : delta;
    double sum = core(r_s);
    // log variable x = ln r on [ln r_s, ln delta], pieces bounded in phase and in x
    if (r_s < delta) {
      std::vector<double> cuts{r_s};
      const double dr_phase = 4.0 * kPi / k;
      double r = r_s;
      while (r < delta) {
        r = std::min({delta, r + dr_phase, r * std::exp(1.0)});
        cuts.push_back(r);
      }
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        sum += gk(log_integrand, std::log(cuts[i]), std::log(cuts[i + 1]), 10);
      }
    }
    sum += gk_oscillatory(outer, delta, 2.0 * delta, std::max(k, 1.0));
    return sum;
  }

  double fourier(double k) const {
    if (k == 0.0) return l1();
    return transform(
        k, [&](double rs) { return core_mass(rs); },
        [&](double x) { return kFourPi * sinc(k * std::exp(x)) / std::pow(-x, a); },
        [&](double r) { return kFourPi * r * r * value(r) * sinc(k * r); });
  }
  double weight_fourier(double k) const {
    if (k == 0.0) return -3.0 * l1();
    return transform(
        k, [&](double rs) { return core_weight_mass(rs); },
        [&](double x) {
          const double ell = -x;
          return kFourPi * sinc(k * std::exp(x)) * (-3.0 + a / ell) / std::pow(ell, a);
        },
        [&](double r) { return kFourPi * r * r * weight(r) * sinc(k * r); });
  }

  double support() const { return 2.0 * delta; }
  double bound() const {
    const double ell2 = std::abs(std::log(2.0 * delta));
    return (3.0 + a / ell2 + LogSmoothstep::max_log_slope()) / std::pow(ell2, a);
  }
};

// --- Gaussian ---------------------------------------------------------------

struct GaussianImpl {
  double w;

  double value(double r) const { return std::exp(-r * r / (w * w)); }
  double weight(double r) const { return -2.0 * r * r / (w * w) * value(r); }
  double fourier(double k) const { return kPi32 * w * w * w * std::exp(-k * k * w * w / 4.0); }
  double weight_fourier(double k) const { return fourier(k) * (-3.0 + 0.5 * k * k * w * w); }
  double mass(double A) const {
    const double x = A / w;
    return kPi32 * w * w * w * std::erf(x) - 2.0 * kPi * w * w * w * x * std::exp(-x * x);
  }
  double l1() const { return kPi32 * w * w * w; }
  double weight_l1() const { return 3.0 * l1(); }
  double support() const { return w * std::sqrt(45.0); }
  double bound() const { return 2.0 * w * w * w * std::pow(2.5, 2.5) * std::exp(-2.5); }
};

// --- regularized inverse cube ----------------------------------------------

struct InverseCubeImpl {
  double c;
  double L;
  LogSmoothstep chi{L};

  double bare(double r) const { return std::pow(r * r + c * c, -1.5); }
  double value(double r) const { return chi.value(r) * bare(r); }
  double weight(double r) const {
    const double s = r * r + c * c;
    return chi.log_slope(r) * bare(r) - 3.0 * chi.value(r) * r * r * std::pow(s, -2.5);
  }
  // integrals split at the cutoff's kinks r = L and r = 2L
  template <class F>
  double split(F&& f, double A) const {
    return gk(f, 0.0, std::min(A, L)) + gk(f, L, std::min(A, 2.0 * L));
  }
  template <class F>
  double split_oscillatory(F&& f, double k) const {
    return gk_oscillatory(f, 0.0, L, k) + gk_oscillatory(f, L, 2.0 * L, k);
  }
  double mass(double A) const {
    return split([&](double r) { return kFourPi * r * r * value(r); }, A);
  }
  double l1() const { return mass(2.0 * L); }
  double weight_l1() const {
    return split([&](double r) { return kFourPi * r * r * std::abs(weight(r)); }, 2.0 * L);
  }
  double fourier(double k) const {
    return split_oscillatory([&](double r) { return kFourPi * r * r * value(r) * sinc(k * r); },
                             std::max(k, 1.0));
  }
  double weight_fourier(double k) const {
    return split_oscillatory([&](double r) { return kFourPi * r * r * weight(r) * sinc(k * r); },
                             std::max(k, 1.0));
  }
  double support() const { return 2.0 * L; }
  double bound() const {
    // r^3 |r V'| <= r^3 (|r chi'| + 3) (r^2 + c^2)^{-3/2} <= max|r chi'| + 3
    return LogSmoothstep::max_log_slope() + 3.0;
  }
};

template <class Fn>
auto with_impl(const PotentialShape& shape, Fn&& fn) {
  return std::visit(
      [&](const auto& s) -> decltype(fn(GaussianImpl{1.0})) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LogCoreShape>) {
          return fn(LogCoreImpl{s.alpha_log, s.delta});
        } else if constexpr (std::is_same_v<S, GaussianShape>) {
          return fn(GaussianImpl{s.width});
        } else if constexpr (std::is_same_v<S, InverseCubeShape>) {
          return fn(InverseCubeImpl{s.core, s.outer});
        } else {
          fail(ErrorKind::Unsupported, "delta kernel has no pointwise representation");
        }
      },
      shape);
}

}  // namespace

Potential::Potential(PotentialShape shape, double eps, double coef)
    : shape_(std::move(shape)), eps_(eps), coef_(coef) {}

Potential make_log_potential(double alpha_log, double delta) {
  if (!(alpha_log > 1.0)) fail(ErrorKind::Domain, "log potential requires alpha_log > 1");
  if (!(delta > 0.0) || !(delta < 0.5))
    fail(ErrorKind::Domain, "log potential requires 0 < delta < 1/2 (|log r| vanishes at r = 1)");
  return Potential::log_core(alpha_log, delta);
}

Potential Potential::log_core(double alpha_log, double delta) {
  if (!(alpha_log > 1.0) || !(delta > 0.0) || !(delta < 0.5))
    fail(ErrorKind::Domain, "log potential requires alpha_log > 1 and 0 < delta < 1/2");
  return Potential(LogCoreShape{alpha_log, delta}, 1.0, 1.0);
}

Potential Potential::gaussian(double width, double amplitude) {
  if (!(width > 0.0)) fail(ErrorKind::Domain, "gaussian kernel requires width > 0");
  return Potential(GaussianShape{width}, 1.0, amplitude);
}

Potential Potential::inverse_cube(double core, double outer) {
  if (!(core > 0.0) || !(outer > 0.0))
    fail(ErrorKind::Domain, "inverse-cube kernel requires core > 0 and outer > 0");
  return Potential(InverseCubeShape{core, outer}, 1.0, 1.0);
}

Potential Potential::delta(double strength) { return Potential(DeltaShape{}, 1.0, strength); }

PotentialKind Potential::kind() const {
  return std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LogCoreShape>) return PotentialKind::LogCore;
        else if constexpr (std::is_same_v<S, GaussianShape>) return PotentialKind::Gaussian;
        else if constexpr (std::is_same_v<S, InverseCubeShape>) return PotentialKind::InverseCube;
        else return PotentialKind::Delta;
      },
      shape_);
}

std::string Potential::key() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LogCoreShape>)
          os << "log(" << exact(s.alpha_log) << "," << exact(s.delta) << ")";
        else if constexpr (std::is_same_v<S, GaussianShape>)
          os << "gaussian(" << exact(s.width) << ")";
        else if constexpr (std::is_same_v<S, InverseCubeShape>)
          os << "inverse_cube(" << exact(s.core) << "," << exact(s.outer) << ")";
        else
          os << "delta";
      },
      shape_);
  os << "*eps=" << exact(eps_) << "*c=" << exact(coef_);
  return os.str();
}

std::string Potential::describe() const {
  std::string s = key();
  if (is_scaled()) s = "scaled[" + s + "]";
  return s;
}

void Potential::require_kernel(const char* what) const {
  if (is_delta())
    fail(ErrorKind::Unsupported, std::string(what) + " is not defined for the delta kernel");
}

double Potential::evaluate(double r) const {
  require_kernel("evaluate");
  if (!(r > 0.0)) fail(ErrorKind::Domain, "potential evaluated at r <= 0");
  const double inv3 = 1.0 / (eps_ * eps_ * eps_);
  return coef_ * inv3 * with_impl(shape_, [&](const auto& impl) { return impl.value(r / eps_); });
}

double Potential::radial_weight(double r) const {
  require_kernel("radial_weight");
  if (!(r > 0.0)) fail(ErrorKind::Domain, "potential evaluated at r <= 0");
  const double inv3 = 1.0 / (eps_ * eps_ * eps_);
  return coef_ * inv3 * with_impl(shape_, [&](const auto& impl) { return impl.weight(r / eps_); });
}

double Potential::fourier(double k) const {
  if (is_delta()) return coef_;
  return coef_ * with_impl(shape_, [&](const auto& impl) { return impl.fourier(eps_ * k); });
}

double Potential::weight_fourier(double k) const {
  // x . grad(delta) = -3 delta in R^3
  if (is_delta()) return -3.0 * coef_;
  return coef_ * with_impl(shape_, [&](const auto& impl) { return impl.weight_fourier(eps_ * k); });
}

double Potential::mass_below(double a) const {
  require_kernel("mass_below");
  if (!(a > 0.0)) return 0.0;
  return coef_ * with_impl(shape_, [&](const auto& impl) { return impl.mass(a / eps_); });
}

double Potential::l1_norm() const {
  if (is_delta()) return std::abs(coef_);
  return std::abs(coef_) * with_impl(shape_, [&](const auto& impl) { return impl.l1(); });
}

double Potential::weight_l1_norm() const {
  if (is_delta()) return 3.0 * std::abs(coef_);
  return std::abs(coef_) * with_impl(shape_, [&](const auto& impl) { return impl.weight_l1(); });
}

double Potential::support_radius() const {
  if (is_delta()) return 0.0;
  return eps_ * with_impl(shape_, [&](const auto& impl) { return impl.support(); });
}

double Potential::pointwise_bound() const {
  require_kernel("pointwise_bound");
  return std::abs(coef_) * with_impl(shape_, [&](const auto& impl) { return impl.bound(); });
}

Potential Potential::scaled(double eps) const {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorKind::Domain, "scaling requires eps > 0");
  require_kernel("scaling");
  return Potential(shape_, eps_ * eps, coef_);
}

Potential Potential::with_coefficient(double c) const { return Potential(shape_, eps_, c); }

Potential Potential::normalized_l1() const {
  const double l1 = l1_norm();
  if (!(l1 > 0.0) || !std::isfinite(l1))
    fail(ErrorKind::Domain, "cannot normalize a kernel with non-finite or zero L1 norm");
  return Potential(shape_, eps_, coef_ / l1);
}

Potential scale(const Potential& base, double eps) { return base.scaled(eps); }

// --- condition checks -------------------------------------------------------

IntegrabilityEstimate estimate_radial_l1(const std::function<double(double)>& f,
                                         double r_outer) {
  // shells [-2X, -X] in x = ln r with X doubling, so a |log r|^-a core gives
  // shell ratios 2^{1-a}; the piece above -X0 is integrated directly
  const double x_top = std::log(r_outer);
  // r^3 f(r) must stay representable for r^-3 singular kernels
  const double x_floor = std::log(1e-100);
  auto integrand = [&](double x) {
    const double r = std::exp(x);
    return kFourPi * r * r * r * std::abs(f(r));
  };
  auto piece = [&](double lo, double hi) {
    // sub-divide long shells so the adaptive rule sees a smooth integrand
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / 4.0)));
    double s = 0.0;
    for (int p = 0; p < pieces; ++p)
      s += gk(integrand, lo + (hi - lo) * p / pieces, lo + (hi - lo) * (p + 1) / pieces, 10);
    return s;
  };
  const double X0 = std::max(1.0, -x_top);
  const double head = x_top > -X0 ? piece(-X0, x_top) : 0.0;
  std::vector<double> shells;
  for (double X = X0; -2.0 * X >= x_floor; X *= 2.0) shells.push_back(piece(-2.0 * X, -X));
  IntegrabilityEstimate est;
  double sum = head;
  for (double s : shells) sum += s;
  const std::size_t m = shells.size();
  if (m < 3) {
    est.value = sum;
    est.converged = std::isfinite(sum);
    return est;
  }
  const double last = shells[m - 1];
  const double prev = shells[m - 2];
  if (last <= 1e-300 || prev <= 0.0 || last <= 1e-17 * sum) {
    est.value = sum;
    est.converged = std::isfinite(sum);
    est.tail_ratio = prev > 0.0 ? last / prev : 0.0;
    return est;
  }
  const double q = last / prev;
  est.tail_ratio = q;
  if (q >= 0.95) {
    est.value = std::numeric_limits<double>::infinity();
    est.converged = false;
    return est;
  }
  est.value = sum + last * q / (1.0 - q);
  est.converged = true;
  return est;
}

ConditionReport check_conditions(const Potential& V, double alpha, double r_lo, double r_hi,
                                 int samples) {
  if (V.is_delta())
    fail(ErrorKind::Unsupported, "kernel conditions are not defined for the delta kernel");
  if (!(r_lo > 0.0) || !(r_hi > r_lo))
    fail(ErrorKind::Domain, "check_conditions requires 0 < r_lo < r_hi");
  if (samples < 1000) fail(ErrorKind::Domain, "check_conditions requires samples >= 1000");
  if (!(alpha > 2.0) || !std::isfinite(alpha))
    fail(ErrorKind::Domain, "check_conditions requires alpha in (2, inf)");

  ConditionReport rep;
  rep.alpha_requested = alpha;
  rep.alpha_measured = std::numeric_limits<double>::infinity();
  rep.c_v = std::numeric_limits<double>::infinity();
  const double ratio = std::log(r_hi / r_lo);
  // coercivity is a statement near the origin: the cutoff tail would drive the
  // infimum to zero, so c_V only sees the inner half of the support
  const double r_coercive = 0.5 * V.support_radius();
  bool connection = true;
  for (int i = 0; i < samples; ++i) {
    const double r = r_lo * std::exp(ratio * i / (samples - 1));
    const double v = V.evaluate(r);
    const double h = V.radial_weight(r);
    rep.c_measured = std::max(rep.c_measured, r * r * r * std::abs(h));
    if (v > 0.0) {
      rep.focusing = true;
      ++rep.core_samples;
      rep.alpha_measured = std::min(rep.alpha_measured, -h / v);
      if (r <= r_coercive) rep.c_v = std::min(rep.c_v, v * std::pow(r, alpha));
      if (h > -alpha * v) connection = false;
    }
  }
  rep.connection_ok = connection && rep.core_samples > 0;
  if (rep.core_samples == 0) rep.alpha_measured = 0.0;
  if (!std::isfinite(rep.c_v)) rep.c_v = 0.0;

  rep.l1_norm = V.l1_norm();
  rep.weight_l1_norm = V.weight_l1_norm();
  const double outer = V.support_radius();
  const auto l1_est = estimate_radial_l1([&](double r) { return V.evaluate(r); }, outer);
  const auto w_est = estimate_radial_l1([&](double r) { return V.radial_weight(r); }, outer);
  rep.integrable_ok = l1_est.converged && w_est.converged && std::isfinite(rep.l1_norm) &&
                      std::isfinite(rep.weight_l1_norm);

  rep.c_bound = V.pointwise_bound();
  rep.pointwise_ok = std::isfinite(rep.c_measured) && rep.c_measured <= rep.c_bound * (1.0 + 1e-9);
  return rep;
}

}  // namespace hartree
