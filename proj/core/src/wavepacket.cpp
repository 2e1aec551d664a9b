#include "upconv/wavepacket.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "quadrature.hpp"
#include "upconv/units.hpp"

namespace upconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unit Gaussian amplitude with intensity-rms sigma: |g|^2 is the normal
// density, so the spectral intensity integrates to one.
double gaussian_amplitude(double x, double center, double sigma) {
  const double z = (x - center) / sigma;
  return std::exp(-0.25 * z * z) / std::sqrt(sigma * std::sqrt(kTwoPi));
}

}  // namespace

void SpectralWavepacket::validate() const {
  if (!(fwhm_bandwidth_ghz > 0.0))
    throw std::domain_error("SpectralWavepacket: fwhm_bandwidth must be > 0");
  if (!(center_frequency_thz > 0.0))
    throw std::domain_error("SpectralWavepacket: center_frequency must be > 0");
  if (!(amplitude_scale >= 0.0) || !std::isfinite(amplitude_scale))
    throw std::domain_error("SpectralWavepacket: amplitude_scale must be >= 0");
  if (!std::isfinite(delay_ps))
    throw std::domain_error("SpectralWavepacket: delay must be finite");
}

double SpectralWavepacket::sigma_nu_thz() const {
  return units::fwhm_to_rms(units::ghz_to_thz(fwhm_bandwidth_ghz));
}

double SpectralWavepacket::amplitude_sigma_thz() const {
  return std::numbers::sqrt2 * sigma_nu_thz();
}

std::complex<double> SpectralWavepacket::amplitude(double nu_thz) const {
  const double mag =
      amplitude_scale * gaussian_amplitude(nu_thz, center_frequency_thz, sigma_nu_thz());
  const double phase = kTwoPi * nu_thz * delay_ps;
  return std::polar(mag, phase);
}

double SpectralWavepacket::spectral_intensity(double nu_thz) const {
  return std::norm(amplitude(nu_thz));
}

double coherence_sigma_from_bandwidth(double fwhm_bandwidth_ghz) {
  if (!(fwhm_bandwidth_ghz > 0.0))
    throw std::domain_error("coherence_sigma_from_bandwidth: bandwidth must be > 0");
  // sigma = sqrt(ln 2) / (pi * dnu_fwhm); fixed by requiring the analytic
  // two-identical-photon dip to match C(1 - V exp(-tau^2/2 sigma^2)).
  return std::sqrt(std::numbers::ln2) /
         (std::numbers::pi * units::ghz_to_thz(fwhm_bandwidth_ghz));
}

OverlapResult mode_overlap(const SpectralWavepacket& wp1,
                           const SpectralWavepacket& wp2,
                           double relative_delay_ps) {
  wp1.validate();
  wp2.validate();

  // The wavepackets' own delays and the requested delay all enter as the
  // same linear spectral phase.
  const double tau = relative_delay_ps + wp2.delay_ps - wp1.delay_ps;
  const double s1 = wp1.sigma_nu_thz();
  const double s2 = wp2.sigma_nu_thz();

  if (std::abs(s1 - s2) <= 1e-12 * (s1 + s2)) {
    // Closed form for equal widths:
    // |M|^2 = exp(-dc^2 / 4 sigma^2) * exp(-tau^2 / 2 sigma_coh^2)
    const double s = 0.5 * (s1 + s2);
    const double dc = wp2.center_frequency_thz - wp1.center_frequency_thz;
    const double mean_c = 0.5 * (wp1.center_frequency_thz + wp2.center_frequency_thz);
    const double log_mag =
        -dc * dc / (8.0 * s * s) - 2.0 * std::numbers::pi * std::numbers::pi * s * s * tau * tau;
    return {std::exp(log_mag), kTwoPi * mean_c * tau};
  }

  // General path: quadrature over the union of the two supports.
  const double a1 = wp1.amplitude_sigma_thz();
  const double a2 = wp2.amplitude_sigma_thz();
  const double lo = std::min(wp1.center_frequency_thz - 6.0 * a1,
                             wp2.center_frequency_thz - 6.0 * a2);
  const double hi = std::max(wp1.center_frequency_thz + 6.0 * a1,
                             wp2.center_frequency_thz + 6.0 * a2);
  const double norm = wp1.amplitude_scale * wp2.amplitude_scale;

  auto integrand = [&](double nu) {
    return std::conj(wp1.amplitude(nu)) * wp2.amplitude(nu) *
           std::polar(1.0, kTwoPi * nu * relative_delay_ps);
  };
  const std::complex<double> m =
      detail::adaptive_simpson(integrand, lo, hi, 1e-8) / (norm > 0.0 ? norm : 1.0);
  return {std::abs(m), std::arg(m)};
}

double temporal_intensity(const SpectralWavepacket& wp, double t_ps) {
  wp.validate();
  const double sigma = coherence_sigma_from_bandwidth(wp.fwhm_bandwidth_ghz);
  const double z = (t_ps - wp.delay_ps) / sigma;
  const double peak =
      wp.amplitude_scale * wp.amplitude_scale / (sigma * std::sqrt(std::numbers::pi));
  return peak * std::exp(-z * z);
}

JointSpectralAmplitude JointSpectralAmplitude::separable(const SpectralWavepacket& a,
                                                         const SpectralWavepacket& b,
                                                         double delay_ps) {
  JointSpectralAmplitude jsa;
  jsa.kind = Kind::separable;
  jsa.wp1 = a;
  jsa.wp2 = b;
  jsa.delay_ps = delay_ps;
  return jsa;
}

JointSpectralAmplitude JointSpectralAmplitude::anticorrelated(
    double sum_center_thz, double sum_bandwidth_ghz, double difference_center_ghz,
    double difference_bandwidth_ghz, double delay_ps) {
  JointSpectralAmplitude jsa;
  jsa.kind = Kind::anticorrelated;
  jsa.sum_center_thz = sum_center_thz;
  jsa.sum_bandwidth_ghz = sum_bandwidth_ghz;
  jsa.difference_center_ghz = difference_center_ghz;
  jsa.difference_bandwidth_ghz = difference_bandwidth_ghz;
  jsa.delay_ps = delay_ps;
  return jsa;
}

void JointSpectralAmplitude::validate() const {
  if (kind == Kind::separable) {
    wp1.validate();
    wp2.validate();
  } else {
    if (!(sum_bandwidth_ghz > 0.0) || !(difference_bandwidth_ghz > 0.0))
      throw std::domain_error("JointSpectralAmplitude: bandwidths must be > 0");
    if (!(sum_center_thz > 0.0))
      throw std::domain_error("JointSpectralAmplitude: sum_center must be > 0");
  }
  if (!std::isfinite(delay_ps))
    throw std::domain_error("JointSpectralAmplitude: delay must be finite");
}

std::complex<double> JointSpectralAmplitude::value(double nu1_thz, double nu2_thz) const {
  const std::complex<double> delay_phase = std::polar(1.0, kTwoPi * nu2_thz * delay_ps);
  if (kind == Kind::separable) {
    const double n1 = wp1.amplitude_scale > 0.0 ? wp1.amplitude_scale : 1.0;
    const double n2 = wp2.amplitude_scale > 0.0 ? wp2.amplitude_scale : 1.0;
    return wp1.amplitude(nu1_thz) / n1 * (wp2.amplitude(nu2_thz) / n2) * delay_phase;
  }

  const double su = units::fwhm_to_rms(units::ghz_to_thz(sum_bandwidth_ghz));
  const double sv = units::fwhm_to_rms(units::ghz_to_thz(difference_bandwidth_ghz));
  const double fd = units::ghz_to_thz(difference_center_ghz);
  const double u = nu1_thz + nu2_thz;
  const double v = nu1_thz - nu2_thz;

  auto g = [](double x, double c, double s) {
    const double z = (x - c) / s;
    return std::exp(-0.25 * z * z);
  };
  // Exchange-symmetric two-peak structure in the difference frequency;
  // kappa is the overlap of the +fd and -fd lobes.
  const double kappa = std::exp(-fd * fd / (2.0 * sv * sv));
  const double norm =
      std::sqrt(kTwoPi * su * sv * (1.0 + kappa));
  const double f =
      g(u, sum_center_thz, su) * (g(v, fd, sv) + g(v, -fd, sv)) / norm;
  return f * delay_phase;
}

}  // namespace upconv
