#pragma once

#include <complex>

#include "upconv/wavepacket.hpp"

namespace upconv {

/// Coherent amplitudes of the long- and short-wavelength modes coupled by
/// the pump inside one up-converter.
struct ModePairState {
  std::complex<double> amplitude_long{0.0, 0.0};
  std::complex<double> amplitude_short{0.0, 0.0};

  double norm_squared() const {
    return std::norm(amplitude_long) + std::norm(amplitude_short);
  }
};

/// One quantum frequency up-converter: pump, conversion strength, Gaussian
/// phase-matching response and the rate of pump-induced spurious photons
/// it sends toward the detectors.
struct ConverterSpec {
  double pump_frequency_thz = 0.0;
  double peak_efficiency = 0.0;       // sin^2 of the conversion angle, in [0,1]
  double response_center_thz = 0.0;   // input-side center of phase matching
  double response_fwhm_ghz = 0.0;
  double noise_rate_cps = 0.0;

  // Optional multiplicative response perturbation emulating domain-period
  // fluctuation ripple; off by default.
  double ripple_amplitude = 0.0;
  double ripple_period_ghz = 0.0;

  // Recorded for provenance only; the model is driven by peak_efficiency.
  double pump_power_mw = 0.0;

  void validate() const;

  /// Normalized phase-matching response R(f), R(center) = 1, clamped to
  /// [0, 1] when the ripple perturbation is enabled.
  double response(double input_frequency_thz) const;
};

/// Closed-form two-mode rotation: the long/short amplitudes rotate by
/// theta = chi * t.
ModePairState evolve_modes(const ModePairState& state, double theta_rad);

/// Fixed-step 4th-order integration of the coupled-mode equations
/// d a_L/dt = -chi a_S, d a_S/dt = chi a_L; the independent check for
/// evolve_modes.
ModePairState integrate_heisenberg(const ModePairState& state, double chi_per_s,
                                   double t_s, double dt_s);

/// eta(f) = peak_efficiency * R(f).
double conversion_efficiency(const ConverterSpec& spec, double input_frequency_thz);

struct ConversionResult {
  SpectralWavepacket output;
  double survival_probability = 0.0;
  bool below_threshold = false;  // survival < 1e-12, reported as zero
};

/// Filters the input photon by the phase-matching response and translates
/// its center by the pump frequency.  The output stays Gaussian (response
/// filtering of a Gaussian is Gaussian); survival is the spectrally
/// averaged conversion efficiency.
ConversionResult convert_wavepacket(const ConverterSpec& spec,
                                    const SpectralWavepacket& wp);

/// Mean photon number in the short-wavelength output for given input
/// occupancies: n_short0 cos^2(theta) + n_long0 sin^2(theta).
double mean_upconverted_photons(double n_long0, double n_short0, double theta_rad);

/// Photons created by the conversion channel itself with vacuum at both
/// inputs: exactly zero.  Converter noise is modeled separately through
/// noise_rate_cps, never through the conversion dynamics.
double spontaneous_noise_in_ideal_sfg();

}  // namespace upconv
