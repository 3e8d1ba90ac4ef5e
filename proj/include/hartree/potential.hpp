#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>

namespace hartree {

enum class PotentialKind { LogCore, Gaussian, InverseCube, Delta };

/// Log-core kernel shape: chi(r) / (r^3 |log r|^a), chi a C^2
/// smoothstep in log r from 1 at r = delta to 0 at r = 2 delta.
struct LogCoreShape {
  double alpha_log;
  double delta;
};

/// exp(-r^2 / width^2).
struct GaussianShape {
  double width;
};

/// chi_L(r) / (r^2 + core^2)^{3/2}, chi_L the same log-smoothstep between L and 2L.
struct InverseCubeShape {
  double core;
  double outer;
};

/// Contact interaction: selects the local cubic nonlinearity.
struct DeltaShape {};

using PotentialShape = std::variant<LogCoreShape, GaussianShape, InverseCubeShape, DeltaShape>;

/// Radial convolution kernel V(r) = coefficient * eps^-3 * shape(r / eps).
/// Immutable value type; copies are cheap.
class Potential {
 public:
  static Potential log_core(double alpha_log, double delta);
  static Potential gaussian(double width, double amplitude = 1.0);
  static Potential inverse_cube(double core, double outer);
  static Potential delta(double strength = 1.0);

  PotentialKind kind() const;
  const PotentialShape& shape() const { return shape_; }
  bool is_delta() const { return kind() == PotentialKind::Delta; }
  bool is_scaled() const { return eps_ != 1.0; }
  double epsilon() const { return eps_; }
  double coefficient() const { return coef_; }
  std::string describe() const;

  /// V(r). Throws Unsupported for the delta kernel.
  double evaluate(double r) const;
  /// r V'(r), which equals sum_j x_j d_j V for radial V.
  double radial_weight(double r) const;

  /// Radial Fourier transform 4 pi int r^2 V(r) sin(kr)/(kr) dr.
  double fourier(double k) const;
  /// Same transform of r V'(r).
  double weight_fourier(double k) const;

  /// 4 pi int_0^a V(r) r^2 dr.
  double mass_below(double a) const;
  double l1_norm() const;
  /// || r V' ||_{L1}.
  double weight_l1_norm() const;

  /// Radius beyond which V (and r V') vanish or are below double precision.
  double support_radius() const;
  /// Upper bound on sup r^3 |r V'(r)| derived from the closed form.
  double pointwise_bound() const;

  Potential scaled(double eps) const;
  Potential with_coefficient(double c) const;
  /// Rescaled so that ||V||_{L1} = 1.
  Potential normalized_l1() const;

  /// Stable identity string (shape, parameters, eps, coefficient) for caching.
  std::string key() const;

 private:
  Potential(PotentialShape shape, double eps, double coef);
  void require_kernel(const char* what) const;

  PotentialShape shape_;
  double eps_ = 1.0;
  double coef_ = 1.0;
};

/// Example kernel family; requires alpha_log > 1 and 0 < delta < 1/2.
Potential make_log_potential(double alpha_log, double delta);
/// V_eps(r) = eps^-3 V(r/eps); requires eps > 0 and a non-delta base.
Potential scale(const Potential& base, double eps);

struct ConditionReport {
  double alpha_requested = 0.0;
  /// inf over core samples of -r V'(r) / V(r)
  double alpha_measured = 0.0;
  bool connection_ok = false;

  double l1_norm = 0.0;
  double weight_l1_norm = 0.0;
  bool integrable_ok = false;

  /// sup over samples of r^3 |r V'(r)|
  double c_measured = 0.0;
  double c_bound = 0.0;
  bool pointwise_ok = false;

  /// inf of V(r) r^alpha over samples in the inner half of the support
  double c_v = 0.0;
  bool focusing = false;
  int core_samples = 0;
};

ConditionReport check_conditions(const Potential& V, double alpha, double r_lo, double r_hi,
                                 int samples);

struct IntegrabilityEstimate {
  double value = 0.0;
  bool converged = false;
  double tail_ratio = 0.0;
};

/// 4 pi int_0^r_outer r^2 |f(r)| dr over shells geometric in |log r|, with the
/// tail extrapolated from the shell-mass ratio. Detects logarithmic divergence
/// at the origin (ratio >= 1).
IntegrabilityEstimate estimate_radial_l1(const std::function<double(double)>& f, double r_outer);

}  // namespace hartree
