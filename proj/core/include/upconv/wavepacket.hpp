#pragma once

#include <complex>
#include <utility>

namespace upconv {

/// Transform-limited Gaussian single-photon spectral amplitude.
///
/// `fwhm_bandwidth_ghz` is the FWHM of the spectral *intensity*; the delay
/// enters as the linear spectral phase exp(i 2 pi nu delay).  The spectral
/// intensity integrates to amplitude_scale^2.
struct SpectralWavepacket {
  double center_frequency_thz = 0.0;
  double fwhm_bandwidth_ghz = 0.0;
  double delay_ps = 0.0;
  double amplitude_scale = 1.0;

  void validate() const;  // throws std::domain_error on bad fields

  // rms width of the spectral intensity, THz
  double sigma_nu_thz() const;
  // rms width of the spectral amplitude (= sqrt(2) * sigma_nu), THz
  double amplitude_sigma_thz() const;

  std::complex<double> amplitude(double nu_thz) const;
  double spectral_intensity(double nu_thz) const;
};

/// |M| and arg M of the mode-overlap integral between two wavepackets.
struct OverlapResult {
  double magnitude = 0.0;
  double phase_rad = 0.0;
};

/// Two-photon spectral amplitude F(nu1, nu2).
///
/// Two shapes are supported:
///  - separable: F = phi1(nu1) * phi2(nu2), a product of two single-photon
///    amplitudes;
///  - anticorrelated: Gaussian in the sum frequency (set by the pump pulse)
///    times a Gaussian in the difference frequency.  The difference part is
///    symmetrized over +/- difference_center so the state is
///    exchange-symmetric: either arm may carry either color.  With
///    difference_center = 0 this reduces to two identical photons.
///
/// `delay_ps` is an extra delay applied to arm 2 (phase exp(i 2 pi nu2 tau)).
struct JointSpectralAmplitude {
  enum class Kind { separable, anticorrelated };

  Kind kind = Kind::separable;

  // separable
  SpectralWavepacket wp1;
  SpectralWavepacket wp2;

  // anticorrelated
  double sum_center_thz = 0.0;
  double sum_bandwidth_ghz = 0.0;        // intensity FWHM of nu1+nu2
  double difference_center_ghz = 0.0;    // center of nu1-nu2
  double difference_bandwidth_ghz = 0.0; // intensity FWHM of nu1-nu2

  double delay_ps = 0.0;

  static JointSpectralAmplitude separable(const SpectralWavepacket& a,
                                          const SpectralWavepacket& b,
                                          double delay_ps = 0.0);
  static JointSpectralAmplitude anticorrelated(double sum_center_thz,
                                               double sum_bandwidth_ghz,
                                               double difference_center_ghz,
                                               double difference_bandwidth_ghz,
                                               double delay_ps = 0.0);

  void validate() const;

  /// F(nu1, nu2) including the arm-2 delay phase; normalized so that the
  /// squared modulus integrates to one.
  std::complex<double> value(double nu1_thz, double nu2_thz) const;
};

/// 1/e half-width (ps) of the temporal intensity of a transform-limited
/// Gaussian photon with the given intensity-FWHM bandwidth.  This is the
/// sigma that makes the two-identical-photon coincidence dip equal to
/// C (1 - V exp(-tau^2 / 2 sigma^2)) with V = 1.
double coherence_sigma_from_bandwidth(double fwhm_bandwidth_ghz);

/// M(tau) = integral phi1*(nu) phi2(nu) exp(i 2 pi nu tau) dnu for
/// unit-normalized amplitudes.  Closed form when the two bandwidths are
/// equal, adaptive quadrature otherwise.
OverlapResult mode_overlap(const SpectralWavepacket& wp1,
                           const SpectralWavepacket& wp2,
                           double relative_delay_ps);

/// Temporal intensity profile at time t (ps); integrates to
/// amplitude_scale^2 over t, peak at t = delay, 1/e half-width equal to
/// coherence_sigma_from_bandwidth(fwhm).
double temporal_intensity(const SpectralWavepacket& wp, double t_ps);

}  // namespace upconv
