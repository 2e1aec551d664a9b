#pragma once

#include <utility>

#include "upconv/rng.hpp"
#include "upconv/wavepacket.hpp"

namespace upconv {

enum class PairStatistics { poisson, thermal };

/// Pulsed fiber photon-pair source: per-pulse pair statistics, the two
/// filtered output channels, Raman noise singles and optional timing
/// jitter.
struct SourceSpec {
  double pump_wavelength_nm = 1551.1;
  double pump_pulse_fwhm_ps = 100.0;
  double mean_pairs_per_pulse = 0.05;
  double signal_center_thz = 193.676;
  double idler_center_thz = 192.879;
  double channel_fwhm_ghz = 25.0;
  double raman_mean_signal = 0.05;  // Raman singles per pulse in the signal channel
  double raman_mean_idler = 0.05;
  double timing_jitter_sigma_ps = 0.0;
  PairStatistics pair_statistics = PairStatistics::poisson;
  // When set, sweeping mean_pairs_per_pulse keeps the Raman means equal to
  // it (the default Raman level is one noise photon per pair).
  bool raman_tracks_pairs = false;

  void validate() const;
};

/// One Monte Carlo draw of a pump pulse.
struct PulseEmission {
  int n_pairs = 0;
  int n_raman_signal = 0;
  int n_raman_idler = 0;
  double jitter_offset_signal_ps = 0.0;
  double jitter_offset_idler_ps = 0.0;
};

/// Draws pair and Raman numbers (independent) and per-channel jitter
/// offsets; jitter offsets are exactly zero when the jitter sigma is zero.
PulseEmission sample_emission(const SourceSpec& spec, RngStream& rng);

/// The deterministic signal/idler wavepackets defined by the channel
/// filters.
std::pair<SpectralWavepacket, SpectralWavepacket> emitted_wavepackets(
    const SourceSpec& spec);

/// Frequency-anticorrelated two-photon state of the source: the sum
/// frequency is pinned by the pump pulse, the difference frequency carries
/// the signal/idler detuning with a width set by the channel filters.
JointSpectralAmplitude anticorrelated_jsa(const SourceSpec& spec);

}  // namespace upconv
