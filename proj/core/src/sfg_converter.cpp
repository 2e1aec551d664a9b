#include "upconv/sfg_converter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "quadrature.hpp"
#include "upconv/units.hpp"

namespace upconv {

void ConverterSpec::validate() const {
  if (!(peak_efficiency >= 0.0 && peak_efficiency <= 1.0))
    throw std::domain_error("ConverterSpec: peak_efficiency must be in [0,1]");
  if (!(response_fwhm_ghz > 0.0))
    throw std::domain_error("ConverterSpec: response_fwhm must be > 0");
  if (!(noise_rate_cps >= 0.0))
    throw std::domain_error("ConverterSpec: noise_rate must be >= 0");
  if (!(pump_frequency_thz >= 0.0))
    throw std::domain_error("ConverterSpec: pump_frequency must be >= 0");
  if (ripple_amplitude != 0.0 && !(ripple_period_ghz > 0.0))
    throw std::domain_error("ConverterSpec: ripple_period must be > 0 when ripple is on");
}

double ConverterSpec::response(double input_frequency_thz) const {
  const double d = input_frequency_thz - response_center_thz;
  const double fwhm = units::ghz_to_thz(response_fwhm_ghz);
  double r = std::exp(-4.0 * std::numbers::ln2 * d * d / (fwhm * fwhm));
  if (ripple_amplitude != 0.0) {
    const double period = units::ghz_to_thz(ripple_period_ghz);
    r *= 1.0 + ripple_amplitude *
                   std::sin(2.0 * std::numbers::pi * input_frequency_thz / period);
    r = std::clamp(r, 0.0, 1.0);
  }
  return r;
}

ModePairState evolve_modes(const ModePairState& state, double theta_rad) {
  if (!std::isfinite(theta_rad))
    throw std::domain_error("evolve_modes: theta must be finite");
  const double c = std::cos(theta_rad);
  const double s = std::sin(theta_rad);
  return {state.amplitude_long * c - state.amplitude_short * s,
          state.amplitude_short * c + state.amplitude_long * s};
}

ModePairState integrate_heisenberg(const ModePairState& state, double chi_per_s,
                                   double t_s, double dt_s) {
  if (t_s == 0.0) return state;
  if (!(dt_s > 0.0))
    throw std::domain_error("integrate_heisenberg: dt must be > 0");
  if (!(t_s > 0.0))
    throw std::domain_error("integrate_heisenberg: t must be >= 0");

  const auto n = static_cast<std::size_t>(std::ceil(t_s / dt_s));
  const double h = t_s / static_cast<double>(n);

  auto deriv = [chi_per_s](const ModePairState& y) {
    return ModePairState{-chi_per_s * y.amplitude_short, chi_per_s * y.amplitude_long};
  };
  auto axpy = [](const ModePairState& y, double a, const ModePairState& k) {
    return ModePairState{y.amplitude_long + a * k.amplitude_long,
                         y.amplitude_short + a * k.amplitude_short};
  };

  ModePairState y = state;
  for (std::size_t i = 0; i < n; ++i) {
    const ModePairState k1 = deriv(y);
    const ModePairState k2 = deriv(axpy(y, 0.5 * h, k1));
    const ModePairState k3 = deriv(axpy(y, 0.5 * h, k2));
    const ModePairState k4 = deriv(axpy(y, h, k3));
    y.amplitude_long += (h / 6.0) * (k1.amplitude_long + 2.0 * k2.amplitude_long +
                                     2.0 * k3.amplitude_long + k4.amplitude_long);
    y.amplitude_short += (h / 6.0) * (k1.amplitude_short + 2.0 * k2.amplitude_short +
                                      2.0 * k3.amplitude_short + k4.amplitude_short);
  }
  return y;
}

double conversion_efficiency(const ConverterSpec& spec, double input_frequency_thz) {
  spec.validate();
  return spec.peak_efficiency * spec.response(input_frequency_thz);
}

ConversionResult convert_wavepacket(const ConverterSpec& spec,
                                    const SpectralWavepacket& wp) {
  spec.validate();
  wp.validate();

  const double s_in = wp.sigma_nu_thz();
  const double s_r = units::fwhm_to_rms(units::ghz_to_thz(spec.response_fwhm_ghz));
  const double detune = wp.center_frequency_thz - spec.response_center_thz;

  double survival;
  if (spec.ripple_amplitude == 0.0) {
    // <eta> over the spectral intensity, Gaussian x Gaussian closed form.
    survival = spec.peak_efficiency * s_r / std::sqrt(s_in * s_in + s_r * s_r) *
               std::exp(-detune * detune / (2.0 * (s_in * s_in + s_r * s_r)));
  } else {
    const double lo = wp.center_frequency_thz - 8.0 * wp.amplitude_sigma_thz();
    const double hi = wp.center_frequency_thz + 8.0 * wp.amplitude_sigma_thz();
    auto integrand = [&](double nu) {
      return wp.spectral_intensity(nu) * conversion_efficiency(spec, nu);
    };
    survival = detail::adaptive_simpson(integrand, lo, hi, 1e-12) /
               (wp.amplitude_scale > 0.0 ? wp.amplitude_scale * wp.amplitude_scale : 1.0);
  }

  // Amplitude filtering by sqrt(R) pulls in the width (product of
  // Gaussians).  The center is translated by the pump frequency alone; the
  // small pull of a detuned response on the center is not modeled.
  const double s_out2 = s_in * s_in * s_r * s_r / (s_in * s_in + s_r * s_r);

  ConversionResult result;
  result.output = wp;
  result.output.center_frequency_thz = wp.center_frequency_thz + spec.pump_frequency_thz;
  result.output.fwhm_bandwidth_ghz =
      units::thz_to_ghz(units::rms_to_fwhm(std::sqrt(s_out2)));
  result.survival_probability = survival;
  if (survival < 1e-12) {
    result.survival_probability = 0.0;
    result.below_threshold = true;
  }
  return result;
}

double mean_upconverted_photons(double n_long0, double n_short0, double theta_rad) {
  const double c = std::cos(theta_rad);
  const double s = std::sin(theta_rad);
  return n_short0 * c * c + n_long0 * s * s;
}

double spontaneous_noise_in_ideal_sfg() { return 0.0; }

}  // namespace upconv
