#include "upconv/pair_source.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "upconv/units.hpp"

namespace upconv {

void SourceSpec::validate() const {
  if (!(mean_pairs_per_pulse >= 0.0))
    throw std::domain_error("SourceSpec: mean_pairs_per_pulse must be >= 0");
  if (!(raman_mean_signal >= 0.0) || !(raman_mean_idler >= 0.0))
    throw std::domain_error("SourceSpec: Raman means must be >= 0");
  if (!(timing_jitter_sigma_ps >= 0.0))
    throw std::domain_error("SourceSpec: timing_jitter_sigma must be >= 0");
  if (!(channel_fwhm_ghz > 0.0))
    throw std::domain_error("SourceSpec: channel_fwhm must be > 0");
  if (!(pump_pulse_fwhm_ps > 0.0))
    throw std::domain_error("SourceSpec: pump_pulse_fwhm must be > 0");
  if (!(pump_wavelength_nm > 0.0))
    throw std::domain_error("SourceSpec: pump_wavelength must be > 0");
  if (signal_center_thz == idler_center_thz)
    throw std::domain_error("SourceSpec: signal and idler centers must differ");
  if (!(signal_center_thz > 0.0) || !(idler_center_thz > 0.0))
    throw std::domain_error("SourceSpec: channel centers must be > 0");
}

PulseEmission sample_emission(const SourceSpec& spec, RngStream& rng) {
  spec.validate();
  PulseEmission e;
  e.n_pairs = spec.pair_statistics == PairStatistics::thermal
                  ? rng.thermal(spec.mean_pairs_per_pulse)
                  : rng.poisson(spec.mean_pairs_per_pulse);
  e.n_raman_signal = rng.poisson(spec.raman_mean_signal);
  e.n_raman_idler = rng.poisson(spec.raman_mean_idler);
  if (spec.timing_jitter_sigma_ps > 0.0) {
    e.jitter_offset_signal_ps = rng.normal(spec.timing_jitter_sigma_ps);
    e.jitter_offset_idler_ps = rng.normal(spec.timing_jitter_sigma_ps);
  }
  return e;
}

std::pair<SpectralWavepacket, SpectralWavepacket> emitted_wavepackets(
    const SourceSpec& spec) {
  spec.validate();
  SpectralWavepacket signal{spec.signal_center_thz, spec.channel_fwhm_ghz, 0.0, 1.0};
  SpectralWavepacket idler{spec.idler_center_thz, spec.channel_fwhm_ghz, 0.0, 1.0};
  return {signal, idler};
}

JointSpectralAmplitude anticorrelated_jsa(const SourceSpec& spec) {
  spec.validate();
  // Sum frequency: pinned by the transform-limited pump pulse.
  const double sum_bw_ghz =
      units::thz_to_ghz(units::kGaussianTbp / spec.pump_pulse_fwhm_ps);
  // Difference frequency: two independent channel filters, so the
  // difference-intensity FWHM is sqrt(2) times the channel FWHM.
  const double diff_bw_ghz = std::numbers::sqrt2 * spec.channel_fwhm_ghz;
  const double diff_center_ghz =
      units::thz_to_ghz(spec.signal_center_thz - spec.idler_center_thz);
  return JointSpectralAmplitude::anticorrelated(
      spec.signal_center_thz + spec.idler_center_thz, sum_bw_ghz, diff_center_ghz,
      diff_bw_ghz);
}

}  // namespace upconv
