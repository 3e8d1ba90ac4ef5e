#include "hartree/sine_transform.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

// FFTW planning is not thread safe; plans are cached forever per length.
std::mutex plan_mutex;

struct Plans {
  fftw_plan real = nullptr;     // r2c of length 2(n+1)
  fftw_plan complex = nullptr;  // forward c2c of length 2(n+1)
  fftw_plan cosine = nullptr;   // REDFT00 of length n+2
};

Plans& plans_for(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // FFTW_ESTIMATE keeps the chosen algorithm (and so the rounding) independent of timing
  const int N = 2 * (n + 1);
  std::vector<double> a(2 * N), b(2 * N);
  auto* ca = reinterpret_cast<fftw_complex*>(a.data());
  auto* cb = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p;
  p.real = fftw_plan_dft_r2c_1d(N, a.data(), cb, flags);
  p.complex = fftw_plan_dft_1d(N, ca, cb, FFTW_FORWARD, flags);
  p.cosine = fftw_plan_r2r_1d(n + 2, a.data(), b.data(), FFTW_REDFT00, flags);
  if (p.real == nullptr || p.complex == nullptr || p.cosine == nullptr)
    fail(ErrorKind::InvalidInput, "fftw planning failed for n=" + std::to_string(n));
  return cache.emplace(n, p).first->second;
}

}  // namespace

// The sine sums S_k = sum_j x_j sin(pi k (j+1) / (n+1)) come from the DFT of the odd
// extension (0, x, 0, -reversed x) of length 2(n+1), whose transform is -2i S_k.
// FFTW's own RODFT00 is several times slower for lengths with large prime factors.

SineTransform::SineTransform(int n) : n_(n) {
  if (n < 1) fail(ErrorKind::InvalidInput, "sine transform length must be positive");
  auto& p = plans_for(n);
  real_plan_ = p.real;
  complex_plan_ = p.complex;
  cosine_plan_ = p.cosine;
}

void SineTransform::sine_sums(std::span<const double> x, std::span<double> out, double scale) const {
  const int N = 2 * (n_ + 1);
  std::vector<double> ext(N, 0.0);
  std::vector<std::complex<double>> X(N / 2 + 1);
  for (int j = 0; j < n_; ++j) {
    ext[j + 1] = x[j];
    ext[N - 1 - j] = -x[j];
  }
  fftw_execute_dft_r2c(static_cast<fftw_plan>(real_plan_), ext.data(),
                       reinterpret_cast<fftw_complex*>(X.data()));
  for (int m = 0; m < n_; ++m) out[m] = -0.5 * scale * X[m + 1].imag();
}

void SineTransform::sine_sums(std::span<const std::complex<double>> x,
                              std::span<std::complex<double>> out, double scale) const {
  const int N = 2 * (n_ + 1);
  std::vector<std::complex<double>> ext(N, 0.0), X(N);
  for (int j = 0; j < n_; ++j) {
    ext[j + 1] = x[j];
    ext[N - 1 - j] = -x[j];
  }
  fftw_execute_dft(static_cast<fftw_plan>(complex_plan_), reinterpret_cast<fftw_complex*>(ext.data()),
                   reinterpret_cast<fftw_complex*>(X.data()));
  // X_k = -2i S_k
  const std::complex<double> factor(0.0, 0.5 * scale);
  for (int m = 0; m < n_; ++m) out[m] = factor * X[m + 1];
}

void SineTransform::forward(std::span<const double> samples, std::span<double> coeffs) const {
  sine_sums(samples, coeffs, 2.0 / (n_ + 1));
}

void SineTransform::inverse(std::span<const double> coeffs, std::span<double> samples) const {
  sine_sums(coeffs, samples, 1.0);
}

void SineTransform::forward(std::span<const std::complex<double>> samples,
                            std::span<std::complex<double>> coeffs) const {
  sine_sums(samples, coeffs, 2.0 / (n_ + 1));
}

void SineTransform::inverse(std::span<const std::complex<double>> coeffs,
                            std::span<std::complex<double>> samples) const {
  sine_sums(coeffs, samples, 1.0);
}

void SineTransform::cosine_synthesis(std::span<const double> scaled_coeffs,
                                     std::span<double> out) const {
  // REDFT00 of length n+2: Y_j = X_0 + (-1)^j X_{n+1} + 2 sum_{m=1}^{n} X_m cos(pi j m/(n+1)).
  std::vector<double> in(n_ + 2, 0.0);
  for (int m = 0; m < n_; ++m) in[m + 1] = scaled_coeffs[m];
  fftw_execute_r2r(static_cast<fftw_plan>(cosine_plan_), in.data(), out.data());
  for (auto& v : out) v *= 0.5;
}

}  // namespace hartree
