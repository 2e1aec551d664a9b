#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "upconv/hom.hpp"

namespace upconv {

/// Result of fitting N_c(dt) = C (1 - V exp(-dt^2 / 2 sigma^2)) to a
/// coincidence curve.  Parameter order in the covariance is (C, V, sigma).
struct FitResult {
  double baseline = 0.0;
  double baseline_stderr = 0.0;
  double visibility = 0.0;
  double visibility_stderr = 0.0;
  double sigma_ps = 0.0;
  double sigma_stderr = 0.0;
  std::array<double, 9> covariance{};  // row-major 3x3
  double chi2_reduced = 0.0;
  int n_iterations = 0;
  bool converged = false;
  bool visibility_out_of_range = false;  // fitted V outside [0, 1.05]
  bool degenerate = false;               // flat curve, V consistent with 0
  bool centering_warning = false;        // minimum bin not within one step of dt=0

  DipModel model() const { return {baseline, std::min(std::max(visibility, 0.0), 1.0), sigma_ps}; }
};

/// Weighted nonlinear least squares with Poisson weights 1/max(N,1) and a
/// gain-ratio damped Gauss-Newton iteration.  Requires at least 5 points
/// and at least one point beyond twice the initial sigma guess so the
/// baseline is constrained.  Input curves must be centered on dt = 0 (the
/// model has no center parameter); an off-center minimum only raises
/// centering_warning.
FitResult fit_dip(std::span<const double> delays_ps, std::span<const double> counts);

/// Same fit started from an explicit (C, V, sigma) point instead of the
/// data-driven initialization; used to probe convergence robustness.
FitResult fit_dip(std::span<const double> delays_ps, std::span<const double> counts,
                  const DipModel& init);

/// Largest relative disagreement between the analytic model derivatives
/// d N_c / d(C, V, sigma) and central finite differences at one delay.
double jacobian_check(const DipModel& model, double delta_tau_ps);

struct CoherenceReport {
  double sigma_fit_ps = 0.0;
  double sigma_theory_ps = 0.0;
  double z_score = 0.0;
  bool consistent = false;  // z < 3
};

/// Compares a fitted sigma against the transform-limit value for the given
/// bandwidth.
CoherenceReport coherence_consistency(const FitResult& fit, double bandwidth_ghz);

struct BootstrapErrors {
  double baseline_stderr = 0.0;
  double visibility_stderr = 0.0;
  double sigma_stderr = 0.0;
  int n_replicas = 0;
};

/// Curvature-error cross-check: refits Poisson-resampled replicas of the
/// curve and reports the sample spread of the parameters.
BootstrapErrors bootstrap_errors(std::span<const double> delays_ps,
                                 std::span<const double> counts,
                                 int n_replicas = 200, std::uint64_t seed = 1);

}  // namespace upconv
