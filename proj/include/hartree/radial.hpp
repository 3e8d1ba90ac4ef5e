#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace hartree {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

/// Uniform radial mesh on (0, r_max) for spherically symmetric functions on R^3.
/// Interior nodes r_j = (j+1) dr for j = 0..n-1 with dr = r_max/(n+1); the
/// origin and r_max are implied Dirichlet points of w = r u.
class RadialGrid {
 public:
  RadialGrid(int n, double r_max);

  int n() const noexcept { return n_; }
  double r_max() const noexcept { return r_max_; }
  double dr() const noexcept { return dr_; }

  double r(int j) const noexcept { return (j + 1) * dr_; }
  /// Sine wavenumber k_m = (m+1) pi / r_max.
  double k(int m) const noexcept { return (m + 1) * kPi / r_max_; }
  double k_max() const noexcept { return k(n_ - 1); }

  std::vector<double> nodes() const;
  std::vector<double> wavenumbers() const;

  /// Same node count, truncation radius r_max / lambda (nodes map onto lambda x).
  RadialGrid rescaled(double lambda) const;

  bool operator==(const RadialGrid&) const = default;

 private:
  int n_;
  double r_max_;
  double dr_;
};

/// Complex samples u(r_j) of a radial function.
class RadialField {
 public:
  RadialField(RadialGrid grid, std::vector<cplx> values);
  explicit RadialField(RadialGrid grid);

  static RadialField from_function(const RadialGrid& grid,
                                   const std::function<cplx(double)>& f);

  const RadialGrid& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> mutable_values() noexcept { return values_; }
  cplx operator[](int j) const { return values_[j]; }
  int size() const noexcept { return grid_.n(); }

  bool all_finite() const;
  std::vector<double> density() const;  // |u|^2

 private:
  RadialGrid grid_;
  std::vector<cplx> values_;
};

/// Real radial profile (densities, potentials, cut-offs).
struct RealProfile {
  RadialGrid grid;
  std::vector<double> values;

  RealProfile(RadialGrid g, std::vector<double> v);
  static RealProfile from_function(const RadialGrid& grid,
                                   const std::function<double(double)>& f);
};

enum class NormKind { L2, L3, L4, H1dot, Hhalfdot };

/// 4 pi sum_j f(r_j) r_j^2 dr. Throws InvalidInput on non-finite samples.
double integrate(const RadialGrid& grid, std::span<const double> f);
double integrate(const RealProfile& f);

double norm(const RadialField& u, NormKind kind);

/// ||grad u||_2^2 from a second-order central difference of w = r u.
double h1_seminorm_squared_fd(const RadialField& u);

/// Normalized sine coefficients of w = r u; ||u||_2^2 = 2 pi r_max sum |c_m|^2.
std::vector<cplx> sine_coefficients(const RadialField& u);
RadialField from_sine_coefficients(const RadialGrid& grid, std::span<const cplx> coeffs);

/// inverse(mult(k_m) * transform(r u)) / r.
RadialField spectral_map(const RadialField& u, const std::function<cplx(double)>& multiplier);
RealProfile spectral_map(const RealProfile& f, const std::function<double(double)>& multiplier);

/// Radial derivative u'(r_j) computed spectrally from the sine series of r u.
std::vector<cplx> radial_derivative(const RadialField& u);

/// Band-limited evaluation of the sine series of u on another grid (zero past r_max).
RadialField resample(const RadialField& u, const RadialGrid& target);

/// Cumulative integral of samples g on the grid, piecewise-quintic in each cell.
/// `origin_odd` selects the parity used for ghost points at r < 0, and the samples
/// are mirrored evenly about r_max.
class CumulativeIntegral {
 public:
  CumulativeIntegral(const RadialGrid& grid, std::span<const double> samples, bool origin_odd);

  /// int_0^a g(r) dr for 0 <= a <= r_max (a > r_max clamps to the full integral).
  double operator()(double a) const;
  /// Value at node index i in 0..n+1 (0 is the origin, n+1 is r_max).
  double at_node(int i) const { return cumulative_[i]; }
  double total() const { return cumulative_.back(); }

 private:
  double sample(int i) const;
  double partial_cell(int cell, double theta) const;

  RadialGrid grid_;
  std::vector<double> g_;  // g at nodes 0..n+1
  bool origin_odd_;
  std::vector<double> cumulative_;
};

/// 4 pi int_{a <= |x| <= b} |u|^2 dx.
double shell_mass(const RadialField& u, double a, double b);

/// Morrey-Campanato norm with the squared density:
/// max over dyadic R' in {R, 2R, ...}, R' <= r_max/2, of (1/R') int_{R'<|x|<2R'} |u|^2.
double rho_norm(const RadialField& u, double R);

/// Hoelder constant for the shell form of the radial Gagliardo-Nirenberg bound:
/// (1/R) int_{R<|x|<2R} |u|^2 <= (28 pi / 3)^{1/3} ||u||_{L3}^2.
double shell_gn_constant();
/// Ball form: (1/R) int_{|x|<R} |u|^2 <= (4 pi / 3)^{1/3} ||u||_{L3}^2.
double ball_gn_constant();

}  // namespace hartree
