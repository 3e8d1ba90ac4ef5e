#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hartree {

/// Discrete sine transform (type I) of length n, normalized so that
///   w_j = sum_m c_m sin(pi (j+1)(m+1) / (n+1)),   j, m = 0..n-1.
/// forward() maps samples w to coefficients c, inverse() maps back.
/// Plans are created once per length and shared; execution is thread safe.
class SineTransform {
 public:
  explicit SineTransform(int n);

  int size() const noexcept { return n_; }

  void forward(std::span<const double> samples, std::span<double> coeffs) const;
  void inverse(std::span<const double> coeffs, std::span<double> samples) const;

  void forward(std::span<const std::complex<double>> samples,
               std::span<std::complex<double>> coeffs) const;
  void inverse(std::span<const std::complex<double>> coeffs,
               std::span<std::complex<double>> samples) const;

  /// Derivative of the sine series at the n+2 points r = j*dr, j = 0..n+1,
  /// given coefficients already multiplied by their wavenumbers:
  /// out_j = sum_m a_m cos(pi j (m+1)/(n+1)).
  void cosine_synthesis(std::span<const double> scaled_coeffs,
                        std::span<double> out) const;

 private:
  void sine_sums(std::span<const double> x, std::span<double> out, double scale) const;
  void sine_sums(std::span<const std::complex<double>> x, std::span<std::complex<double>> out,
                 double scale) const;

  int n_;
  void* real_plan_;
  void* complex_plan_;
  void* cosine_plan_;
};

}  // namespace hartree
