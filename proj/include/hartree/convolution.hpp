#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "hartree/potential.hpp"
#include "hartree/radial.hpp"

namespace hartree {

/// Hartree nonlinearity V * |u|^2, or the local cubic limit |u|^2.
class NonlinearMode {
 public:
  static NonlinearMode hartree(Potential V);
  static NonlinearMode cubic_nls(double strength = 1.0);

  bool is_local() const { return potential_.is_delta(); }
  /// The kernel; a delta kernel (carrying the strength) in cubic-NLS mode.
  const Potential& potential() const { return potential_; }
  std::string describe() const;

 private:
  explicit NonlinearMode(Potential V) : potential_(std::move(V)) {}
  Potential potential_;
};

/// Per-(kernel, grid) tables: the kernel transforms at the sine wavenumbers and
/// the product-integration weights of the real-space path. Built once, read-only.
class KernelTable {
 public:
  KernelTable(const Potential& V, const RadialGrid& grid);

  const Potential& potential() const { return potential_; }
  const RadialGrid& grid() const { return grid_; }

  /// V^(k_m)
  const std::vector<double>& fourier() const { return fourier_; }
  /// transform of r V'(r) at k_m
  const std::vector<double>& weight_fourier() const { return weight_fourier_; }
  bool spectral_ok() const { return spectral_ok_; }

  /// Weights Omega_j, j = 0..J, with int_0^inf t V(t) D(t) dt = sum_j Omega_j D(t_j)
  /// for any smooth odd D sampled at t_j = j dr.
  const std::vector<double>& direct_weights() const;

 private:
  Potential potential_;
  RadialGrid grid_;
  std::vector<double> fourier_;
  std::vector<double> weight_fourier_;
  bool spectral_ok_ = true;
  mutable std::once_flag direct_once_;
  mutable std::vector<double> direct_weights_;
};

/// Shared, cached table for a kernel on a grid.
std::shared_ptr<const KernelTable> kernel_table(const Potential& V, const RadialGrid& grid);

struct ConvolutionResult {
  RealProfile values;
  /// set when the kernel transform could not be tabulated and the direct path was used
  bool used_fallback = false;
};

/// O(n J) real-space convolution through the bipolar identity
/// (V*rho)(r) = (2 pi / r) int t V(t) [S(r+t) - S(|r-t|)] dt,  S(s) = int_0^s s' rho(s') ds'.
RealProfile convolve_direct(const Potential& V, const RealProfile& density);

/// Fourier-diagonal convolution on the sine basis.
ConvolutionResult convolve_spectral(const Potential& V, const RealProfile& density);

/// Same, reusing an existing table (the hot path of the integrator).
ConvolutionResult convolve_spectral(const KernelTable& table, const RealProfile& density);

/// Convolution of the radial weight r V'(r) with a density (spectral path).
RealProfile convolve_weight(const KernelTable& table, const RealProfile& density);

/// W = V * |u|^2 (Hartree) or W = g |u|^2 (cubic NLS).
RealProfile nonlinear_potential(const RadialField& u, const NonlinearMode& mode);

}  // namespace hartree
