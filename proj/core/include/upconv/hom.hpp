#pragma once

#include <span>
#include <variant>
#include <vector>

#include "upconv/wavepacket.hpp"

namespace upconv {

/// Coincidence-dip model N_c(dt) = C (1 - V exp(-dt^2 / 2 sigma^2)).
struct DipModel {
  double baseline = 0.0;    // C, counts
  double visibility = 0.0;  // V, in [0, 1]
  double sigma_ps = 0.0;    // 1/e half-width of the photon temporal intensity

  void validate() const;
};

double eval_dip_model(const DipModel& model, double delta_tau_ps);

/// Coincidence probability at an ideal 50/50 coupler for two independent
/// single photons.  `distinguishability_overlap` is the residual scalar
/// overlap of all non-spectral degrees of freedom (1 = perfectly matched).
double coincidence_probability_separable(const SpectralWavepacket& wp1,
                                         const SpectralWavepacket& wp2,
                                         double delay_ps,
                                         double distinguishability_overlap = 1.0);

struct JointQuadratureOptions {
  std::size_t grid_points = 512;      // tensor grid intervals per axis (floor)
  std::size_t max_grid_points = 8192; // refinement cap
  double span_sigmas = 6.0;           // half-span in amplitude sigmas
  double richardson_tol = 1e-5;       // successive grid-halving agreement
};

/// Thrown when the tensor quadrature fails its grid-halving check.
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Coincidence probability for a general two-photon state:
/// P_c(tau) = 1/2 (1 - Re (integral) F*(n1,n2;tau) F(n2,n1;tau) dn1 dn2),
/// evaluated by tensor-grid double quadrature.  For the anticorrelated
/// Gaussian state this oscillates at the difference frequency inside a
/// Gaussian envelope (quantum beating).
double coincidence_probability_joint(const JointSpectralAmplitude& jsa,
                                     double delay_ps,
                                     const JointQuadratureOptions& opt = {});

struct ProbabilityCurve {
  std::vector<double> delays_ps;
  std::vector<double> values;  // probabilities, or counts for the model generator
};

struct SeparablePair {
  SpectralWavepacket wp1;
  SpectralWavepacket wp2;
  double distinguishability_overlap = 1.0;
};

using CurveGenerator = std::variant<SeparablePair, JointSpectralAmplitude, DipModel>;

/// Evaluates the chosen generator over a strictly increasing delay grid.
ProbabilityCurve hom_dip_curve(const CurveGenerator& generator,
                               std::span<const double> delays_ps,
                               const JointQuadratureOptions& opt = {});

/// Delays of the local minima of a sampled curve, refined by parabolic
/// interpolation; used to measure beat periods.
std::vector<double> local_minima_delays(const ProbabilityCurve& curve);

}  // namespace upconv
