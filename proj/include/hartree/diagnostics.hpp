#pragma once

#include <span>
#include <vector>

#include "hartree/convolution.hpp"
#include "hartree/radial.hpp"

namespace hartree {

struct ConservedSet {
  double mass = 0.0;
  double energy = 0.0;
  /// identically zero for radial fields
  double momentum = 0.0;
  /// ||grad u||_2^2
  double kinetic = 0.0;
  /// int (V * |u|^2) |u|^2
  double interaction = 0.0;
};

/// Mass, energy 1/2 ||grad u||^2 - 1/4 int (V*|u|^2)|u|^2 and momentum.
ConservedSet conserved(const RadialField& u, const NonlinearMode& mode);
/// Same with the nonlinear potential W = V * |u|^2 already computed.
ConservedSet conserved(const RadialField& u, const RealProfile& W);

/// psi_R(r) = R^2 psi(r/R) with psi = s^2/2 on [0, 2], 0 past 3 and a quintic
/// Hermite bridge (C^2) in between; derivative and Laplacian sampled alongside.
struct Cutoff {
  double R = 0.0;
  RealProfile psi;
  RealProfile dpsi;
  RealProfile laplacian;
};

Cutoff cutoff_psi(double R, const RadialGrid& grid);

struct VirialSet {
  /// int psi_R |u|^2
  double Va = 0.0;
  /// 2 Im int grad psi_R . grad u conj(u)
  double Pa = 0.0;
  /// 8 ||grad u||^2 + 2 int int (x-y).grad V(x-y) |u(x)|^2 |u(y)|^2
  double rhs_full = 0.0;
  /// 1/2 ||grad u||^2 + 1/8 (same double integral)
  double K_V = 0.0;
  /// the double integral alone
  double weight_interaction = 0.0;
};

VirialSet virial(const RadialField& u, const NonlinearMode& mode, double R);
/// Hot-path variant reusing a cut-off and, for Hartree modes, a kernel table.
VirialSet virial(const RadialField& u, const NonlinearMode& mode, const Cutoff& cutoff,
                 const KernelTable* table);

/// (1/lambda) int_{|x| <= D lambda} |u|^2.
double local_mass(const RadialField& u, double D, double lambda);

struct AnnuliMasses {
  /// (1/lambda_i) int_{lambda_i/M <= |x| <= lambda_i M} |u|^2
  std::vector<double> scaled;
  /// the same integrals without the 1/lambda_i factor
  std::vector<double> raw;
  /// lambda_{i+1} / M >= lambda_i M for each adjacent pair
  std::vector<bool> disjoint;
};

AnnuliMasses annuli_masses(const RadialField& u, std::span<const double> scales, double M);

/// Im int grad psi_R . grad u conj(u), i.e. Pa / 2.
double momentum_virial(const RadialField& u, double R);

/// E(u) >= 1/2 (1 - (||u||_L3 / c_V)^2) ||grad u||^2, evaluated with a measured c_V.
struct CoercivityCheck {
  double energy = 0.0;
  double bound = 0.0;
  bool holds = false;
};

CoercivityCheck coercivity(const RadialField& u, const NonlinearMode& mode, double c_v);

struct ConcavityBound {
  /// int |x|^2 |u|^2 and its first time derivative 4 Im int conj(u) x . grad u
  double moment = 0.0;
  double moment_rate = 0.0;
  double energy = 0.0;
  /// zero of I0 + I0' t + 8 E t^2, infinite unless E < 0
  double t_star = 0.0;
};

/// Upper bound on the blow-up time from d^2/dt^2 int |x|^2 |u|^2 <= 16 E.
ConcavityBound concavity_bound(const RadialField& u0, const NonlinearMode& mode);

// --- blow-up time and rate fits ----------------------------------------------

struct BlowupTimeFit {
  double t_est = 0.0;
  /// slope of lambda^2 against t (negative when focusing)
  double slope = 0.0;
  int samples = 0;
  bool ok = false;
};

/// Linear fit of lambda^2 against t over the final decade of lambda
/// (lambda <= 10 lambda_last); T is the zero crossing.
BlowupTimeFit estimate_blowup_time(std::span<const double> t, std::span<const double> lambda);

struct RateSample {
  double t = 0.0;
  double h1 = 0.0;
  double l3 = 0.0;
};

struct RateFit {
  double t_est = 0.0;
  /// slope of log ||u||_L3 against log log(1/(T - t))
  double gamma_hat = 0.0;
  double intercept = 0.0;
  /// rms residual of the gamma regression
  double gamma_residual = 0.0;
  /// median of ||u||_H1 (T - t)^{1/4}
  double c_quarter = 0.0;
  double c_quarter_min = 0.0;
  double c_quarter_max = 0.0;
  /// c_quarter_min > 0 across the window
  bool bounded_below = false;
  double window_begin = 0.0;
  double window_end = 0.0;
  int samples = 0;
  std::vector<double> residuals;
};

/// Fits over the samples with 0 < T - t < 1. Throws FitRefused with fewer than 8.
RateFit rate_fit(std::span<const RateSample> samples, double t_est);

// --- regime predicates --------------------------------------------------------

struct RegimeReport {
  /// 4 ||v||_L3 / c_V
  double M0 = 0.0;
  bool m0_ok = false;
  /// tau^{1/2} max(E^{V_lambda}(v), 0) with E^{V_lambda}(v) = lambda E^V(u)
  double tau_energy = 0.0;
  bool tau_ok = false;
};

/// Predicates of the local virial estimate for the renormalized data of u.
RegimeReport regime_predicates(double l3_norm, double energy, double lambda, double c_v,
                               double tau);

}  // namespace hartree
