#pragma once

namespace upconv::units {

// Frequencies are carried in THz (centers) and GHz (bandwidths), times in
// ps.  THz and ps are exact reciprocals (1 THz * 1 ps = 1), so phase
// factors exp(i*2*pi*nu*tau) need no scale constants.  Every unit
// conversion in the library goes through this header.

inline constexpr double kSpeedOfLightNmThz = 299792.458;  // c in nm*THz

constexpr double ghz_to_thz(double ghz) { return ghz * 1e-3; }
constexpr double thz_to_ghz(double thz) { return thz * 1e3; }
constexpr double nm_to_thz(double nm) { return kSpeedOfLightNmThz / nm; }
constexpr double thz_to_nm(double thz) { return kSpeedOfLightNmThz / thz; }
constexpr double mhz_to_per_ps(double mhz) { return mhz * 1e-6; }
constexpr double cps_to_per_pulse(double cps, double repetition_rate_mhz) {
  return cps / (repetition_rate_mhz * 1e6);
}

// Intensity FWHM <-> rms width of the underlying Gaussian intensity.
inline constexpr double kFwhmToRms = 0.42466090014400953;  // 1/(2*sqrt(2 ln 2))

constexpr double fwhm_to_rms(double fwhm) { return fwhm * kFwhmToRms; }
constexpr double rms_to_fwhm(double rms) { return rms / kFwhmToRms; }

// Gaussian time-bandwidth product, intensity FWHM * intensity FWHM.
inline constexpr double kGaussianTbp = 0.4412712003053032;  // 2 ln 2 / pi

}  // namespace upconv::units
