#include "hartree/convolution.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "hartree/errors.hpp"
#include "hartree/format.hpp"
#include "hartree/sine_transform.hpp"
#include "quadrature.hpp"

namespace hartree {

NonlinearMode NonlinearMode::hartree(Potential V) { return NonlinearMode(std::move(V)); }

NonlinearMode NonlinearMode::cubic_nls(double strength) {
  return NonlinearMode(Potential::delta(strength));
}

std::string NonlinearMode::describe() const {
  if (is_local()) return "cubic_nls(g=" + exact(potential_.coefficient()) + ")";
  return "hartree(" + potential_.describe() + ")";
}

namespace {

// Monomial coefficients of the Lagrange basis on local nodes x = -2..3:
// L_q(x) = sum_m coeff[q][m] x^m.
std::array<std::array<double, 6>, 6> lagrange_monomials() {
  std::array<std::array<double, 6>, 6> out{};
  for (int q = 0; q < 6; ++q) {
    std::array<double, 6> poly{};
    poly[0] = 1.0;
    int deg = 0;
    double denom = 1.0;
    for (int p = 0; p < 6; ++p) {
      if (p == q) continue;
      const double xp = p - 2;
      // poly *= (x - xp)
      for (int m = deg + 1; m >= 1; --m) poly[m] = poly[m - 1] - xp * poly[m];
      poly[0] = -xp * poly[0];
      ++deg;
      denom *= (q - 2) - xp;
    }
    for (int m = 0; m < 6; ++m) out[q][m] = poly[m] / denom;
  }
  return out;
}

// Moments int t V(t) x^m dt over x = (t - t0)/h in [x0, x1], m = 0..5, from a
// single set of kernel samples.
template <class F>
std::array<double, 6> cell_moments(F& tv, double t0, double h, double x0, double x1) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();
  const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
  std::array<double, 6> mu{};
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    for (double sign : {-1.0, 1.0}) {
      const double x = mid + sign * half * nodes[q];
      const double f = weights[q] * half * h * tv(t0 + x * h);
      double p = 1.0;
      for (int m = 0; m < 6; ++m, p *= x) mu[m] += f * p;
    }
  }
  return mu;
}

}  // namespace

KernelTable::KernelTable(const Potential& V, const RadialGrid& grid)
    : potential_(V), grid_(grid), fourier_(grid.n()), weight_fourier_(grid.n()) {
  for (int m = 0; m < grid.n(); ++m) {
    fourier_[m] = V.fourier(grid.k(m));
    weight_fourier_[m] = V.weight_fourier(grid.k(m));
    if (!std::isfinite(fourier_[m]) || !std::isfinite(weight_fourier_[m])) spectral_ok_ = false;
  }
}

const std::vector<double>& KernelTable::direct_weights() const {
  std::call_once(direct_once_, [this] {
    const auto& V = potential_;
    if (V.is_delta()) fail(ErrorKind::Unsupported, "direct convolution with the delta kernel");
    const double h = grid_.dr();
    const int cells =
        std::min(static_cast<int>(std::ceil(V.support_radius() / h)) + 1, 2 * grid_.n() + 2);
    direct_weights_.assign(cells + 4, 0.0);
    const auto coeff = lagrange_monomials();

    auto tv = [&](double t) { return t > 0.0 ? t * V.evaluate(t) : 0.0; };
    for (int i = 0; i < cells; ++i) {
      const double t0 = i * h;
      std::array<double, 6> mu{};
      if (i == 0) {
        // int_0^h t V(t) (t/h)^m dt; m = 0 never contributes because D(0) = 0
        mu[1] = V.mass_below(h) / (kFourPi * h);
        for (int m = 2; m < 6; ++m) {
          mu[m] = detail::gk([&](double t) { return tv(t) * std::pow(t / h, m); }, 0.0, h, 15,
                             1e-14);
        }
      } else {
        // fixed rule on the cell and on its halves; cells where the two disagree
        // (kinks in the kernel) fall back to adaptive quadrature
        const auto whole = cell_moments(tv, t0, h, 0.0, 1.0);
        auto halves = cell_moments(tv, t0, h, 0.0, 0.5);
        const auto upper = cell_moments(tv, t0, h, 0.5, 1.0);
        double scale = 0.0, diff = 0.0;
        for (int m = 0; m < 6; ++m) {
          halves[m] += upper[m];
          scale = std::max(scale, std::abs(halves[m]));
          diff = std::max(diff, std::abs(halves[m] - whole[m]));
        }
        if (diff <= 1e-13 * scale) {
          mu = halves;
        } else {
          for (int m = 0; m < 6; ++m) {
            mu[m] = detail::gk([&](double t) { return tv(t) * std::pow((t - t0) / h, m); }, t0,
                               t0 + h, 12, 1e-14);
          }
        }
      }
      for (int q = 0; q < 6; ++q) {
        const int node = i - 2 + q;
        if (node == 0) continue;
        double w = 0.0;
        for (int m = (i == 0 ? 1 : 0); m < 6; ++m) w += coeff[q][m] * mu[m];
        // D is odd: D(t_{-p}) = -D(t_p)
        if (node < 0) direct_weights_[-node] -= w;
        else direct_weights_[node] += w;
      }
    }
  });
  return direct_weights_;
}

std::shared_ptr<const KernelTable> kernel_table(const Potential& V, const RadialGrid& grid) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const KernelTable>> cache;
  const std::string key =
      V.key() + "@" + std::to_string(grid.n()) + ":" + exact(grid.r_max());
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const KernelTable>(V, grid);
  cache.emplace(key, table);
  return table;
}

namespace {

void check_density(const Potential& V, const RealProfile& density) {
  if (V.is_delta()) fail(ErrorKind::Unsupported, "convolution with the delta kernel");
  for (double v : density.values) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "non-finite density sample");
    if (v < -1e-12) fail(ErrorKind::InvalidInput, "negative density sample");
  }
}

RealProfile spectral_product(const RadialGrid& g, const std::vector<double>& multiplier,
                             const RealProfile& density) {
  const int n = g.n();
  std::vector<double> w(n), c(n);
  for (int j = 0; j < n; ++j) w[j] = g.r(j) * density.values[j];
  SineTransform dst(n);
  dst.forward(w, c);
  for (int m = 0; m < n; ++m) c[m] *= multiplier[m];
  dst.inverse(c, w);
  for (int j = 0; j < n; ++j) w[j] /= g.r(j);
  return RealProfile(g, std::move(w));
}

RealProfile direct_with_table(const KernelTable& table, const RealProfile& density) {
  const auto& g = density.grid;
  const int n = g.n();
  const auto& omega = table.direct_weights();
  std::vector<double> srho(n);
  for (int j = 0; j < n; ++j) srho[j] = g.r(j) * density.values[j];
  CumulativeIntegral S(g, srho, true);
  const int last = n + 1;
  auto S_at = [&](int idx) { return idx > last ? S.total() : S.at_node(idx); };
  const int J = static_cast<int>(omega.size()) - 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int I = i + 1;
    double acc = 0.0;
    for (int j = 1; j <= J; ++j) acc += omega[j] * (S_at(I + j) - S_at(std::abs(I - j)));
    out[i] = 2.0 * kPi * acc / g.r(i);
  }
  return RealProfile(g, std::move(out));
}

}  // namespace

RealProfile convolve_direct(const Potential& V, const RealProfile& density) {
  check_density(V, density);
  return direct_with_table(*kernel_table(V, density.grid), density);
}

ConvolutionResult convolve_spectral(const KernelTable& table, const RealProfile& density) {
  check_density(table.potential(), density);
  if (!(table.grid() == density.grid)) fail(ErrorKind::InvalidInput, "kernel table grid mismatch");
  if (!table.spectral_ok()) return {direct_with_table(table, density), true};
  return {spectral_product(density.grid, table.fourier(), density), false};
}

ConvolutionResult convolve_spectral(const Potential& V, const RealProfile& density) {
  check_density(V, density);
  return convolve_spectral(*kernel_table(V, density.grid), density);
}

RealProfile convolve_weight(const KernelTable& table, const RealProfile& density) {
  return spectral_product(density.grid, table.weight_fourier(), density);
}

RealProfile nonlinear_potential(const RadialField& u, const NonlinearMode& mode) {
  RealProfile rho(u.grid(), u.density());
  if (mode.is_local()) {
    const double g = mode.potential().coefficient();
    for (auto& v : rho.values) v *= g;
    return rho;
  }
  return convolve_spectral(mode.potential(), rho).values;
}

}  // namespace hartree
