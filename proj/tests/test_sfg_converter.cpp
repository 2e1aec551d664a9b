#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "test_helpers.hpp"
#include "upconv/rng.hpp"
#include "upconv/sfg_converter.hpp"
#include "upconv/units.hpp"

using namespace upconv;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

ConverterSpec paper_signal_converter() {
  ConverterSpec c;
  c.pump_frequency_thz = 226.477;
  c.peak_efficiency = 0.02;
  c.response_center_thz = 193.676;
  c.response_fwhm_ghz = 40.0;
  return c;
}

bool within_ulps(double a, double b, int ulps) {
  double lo = b, hi = b;
  for (int i = 0; i < ulps; ++i) {
    lo = std::nextafter(lo, -1e300);
    hi = std::nextafter(hi, 1e300);
  }
  return a >= lo && a <= hi;
}

}  // namespace

TEST_SUITE("sfg_converter") {

TEST_CASE("two-mode rotation basics") {
  const ModePairState in{{1.0, 0.0}, {0.0, 0.0}};

  const ModePairState id = evolve_modes(in, 0.0);
  CHECK(id.amplitude_long == std::complex<double>{1.0, 0.0});
  CHECK(id.amplitude_short == std::complex<double>{0.0, 0.0});

  // quarter rotation: complete up-conversion
  const ModePairState full = evolve_modes(in, kHalfPi);
  CHECK(std::abs(full.amplitude_long) < 1e-12);
  CHECK(std::abs(full.amplitude_short - 1.0) < 1e-12);

  const ModePairState half = evolve_modes(in, kHalfPi / 2.0);
  CHECK(std::real(half.amplitude_long) ==
        doctest::Approx(std::numbers::sqrt2 / 2.0).epsilon(1e-12));
  CHECK(std::real(half.amplitude_short) ==
        doctest::Approx(std::numbers::sqrt2 / 2.0).epsilon(1e-12));
  CHECK(half.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rotation is unitary and composes additively") {
  RngStream rng(3);
  for (int i = 0; i < 50; ++i) {
    const ModePairState s{{rng.uniform() - 0.5, rng.uniform() - 0.5},
                          {rng.uniform() - 0.5, rng.uniform() - 0.5}};
    const double t1 = 6.283185307179586 * rng.uniform();
    const double t2 = 6.283185307179586 * rng.uniform();

    const ModePairState once = evolve_modes(s, t1);
    CHECK(once.norm_squared() == doctest::Approx(s.norm_squared()).epsilon(1e-12));

    const ModePairState chained = evolve_modes(once, t2);
    const ModePairState direct = evolve_modes(s, t1 + t2);
    CHECK(std::abs(chained.amplitude_long - direct.amplitude_long) < 1e-12);
    CHECK(std::abs(chained.amplitude_short - direct.amplitude_short) < 1e-12);
  }
}

TEST_CASE("coupled-mode integration matches the closed form") {
  const ModePairState in{{1.0, 0.0}, {0.0, 0.0}};

  SUBCASE("zero time returns the input unchanged") {
    const ModePairState out = integrate_heisenberg(in, 3.0, 0.0, 1.0);
    CHECK(out.amplitude_long == in.amplitude_long);
    CHECK(out.amplitude_short == in.amplitude_short);
  }
  SUBCASE("complete transfer at a quarter period") {
    const ModePairState out = integrate_heisenberg(in, 1.0, kHalfPi, kHalfPi / 2000.0);
    CHECK(std::abs(out.amplitude_long) < 1e-9);
    CHECK(std::abs(out.amplitude_short - 1.0) < 1e-9);
  }
  SUBCASE("sweep over a full period") {
    double worst = 0.0, worst_norm = 0.0;
    for (int k = 1; k <= 1000; ++k) {
      const double theta = 6.283185307179586 * k / 1000.0;
      const ModePairState ode = integrate_heisenberg(in, 1.0, theta, theta / 4000.0);
      const ModePairState closed = evolve_modes(in, theta);
      worst = std::max(worst,
                       std::max(std::abs(ode.amplitude_long - closed.amplitude_long),
                                std::abs(ode.amplitude_short - closed.amplitude_short)));
      worst_norm = std::max(worst_norm, std::abs(ode.norm_squared() - 1.0));
    }
    CHECK(worst < 1e-9);
    CHECK(worst_norm < 1e-12);
  }
  SUBCASE("bad step") {
    CHECK_THROWS_AS(integrate_heisenberg(in, 1.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(integrate_heisenberg(in, 1.0, 1.0, -0.1), std::domain_error);
  }
}

TEST_CASE("conversion efficiency response") {
  const ConverterSpec c = paper_signal_converter();
  CHECK(conversion_efficiency(c, c.response_center_thz) ==
        doctest::Approx(0.02).epsilon(1e-12));

  // half maximum at +- FWHM/2 by definition
  const double half = units::ghz_to_thz(20.0);
  CHECK(conversion_efficiency(c, c.response_center_thz + half) ==
        doctest::Approx(0.01).epsilon(1e-12));
  CHECK(conversion_efficiency(c, c.response_center_thz - half) ==
        doctest::Approx(0.01).epsilon(1e-12));

  // two FWHM out: 2^-16 of the peak
  CHECK(conversion_efficiency(c, c.response_center_thz + units::ghz_to_thz(80.0)) ==
        doctest::Approx(3.0517578125e-07).epsilon(1e-9));
}

TEST_CASE("convert_wavepacket translates by the pump exactly") {
  const SpectralWavepacket signal{193.676, 25.0, 0.0, 1.0};
  const SpectralWavepacket idler{192.879, 25.0, 0.0, 1.0};

  ConverterSpec conv_s = paper_signal_converter();
  ConverterSpec conv_i = paper_signal_converter();
  conv_i.pump_frequency_thz = 227.274;
  conv_i.response_center_thz = 192.879;

  const auto out_s = convert_wavepacket(conv_s, signal);
  const auto out_i = convert_wavepacket(conv_i, idler);
  CHECK(within_ulps(out_s.output.center_frequency_thz, 420.153, 1));
  CHECK(within_ulps(out_i.output.center_frequency_thz, 420.153, 1));
  CHECK(out_s.output.center_frequency_thz == out_i.output.center_frequency_thz);
}

TEST_CASE("energy conservation holds for arbitrary inputs") {
  RngStream rng(5);
  for (int i = 0; i < 30; ++i) {
    ConverterSpec c;
    c.pump_frequency_thz = 100.0 + 200.0 * rng.uniform();
    c.peak_efficiency = rng.uniform();
    c.response_center_thz = 150.0 + 100.0 * rng.uniform();
    c.response_fwhm_ghz = 10.0 + 90.0 * rng.uniform();
    const SpectralWavepacket wp{c.response_center_thz + 0.01 * (rng.uniform() - 0.5),
                                5.0 + 40.0 * rng.uniform(), 0.0, 1.0};
    const auto out = convert_wavepacket(c, wp);
    CHECK(within_ulps(out.output.center_frequency_thz - wp.center_frequency_thz,
                      c.pump_frequency_thz, 2));
  }
}

TEST_CASE("flat response preserves the shape and passes the peak efficiency") {
  ConverterSpec c = paper_signal_converter();
  c.response_fwhm_ghz = 1e9;  // effectively flat across the photon
  const SpectralWavepacket wp{193.676, 25.0, 0.0, 1.0};
  const auto out = convert_wavepacket(c, wp);
  CHECK(out.survival_probability == doctest::Approx(0.02).epsilon(1e-6));
  CHECK(out.output.fwhm_bandwidth_ghz == doctest::Approx(25.0).epsilon(1e-6));
  CHECK_FALSE(out.below_threshold);
}

TEST_CASE("survival matches quadrature of the response-weighted intensity") {
  const ConverterSpec c = paper_signal_converter();
  for (double detune_ghz : {0.0, 15.0, 60.0}) {
    SpectralWavepacket wp{193.676 + units::ghz_to_thz(detune_ghz), 25.0, 0.0, 1.0};
    const double quad = testutil::simpson_real(
        [&](double nu) {
          return wp.spectral_intensity(nu) * conversion_efficiency(c, nu);
        },
        wp.center_frequency_thz - 0.3, wp.center_frequency_thz + 0.3, 1 << 14);
    const auto out = convert_wavepacket(c, wp);
    CHECK(out.survival_probability == doctest::Approx(quad).epsilon(1e-6));
  }
}

TEST_CASE("survival never exceeds the peak efficiency") {
  RngStream rng(9);
  for (int i = 0; i < 40; ++i) {
    ConverterSpec c;
    c.pump_frequency_thz = 200.0;
    c.peak_efficiency = rng.uniform();
    c.response_center_thz = 193.0;
    c.response_fwhm_ghz = 1.0 + 100.0 * rng.uniform();
    const SpectralWavepacket wp{193.0 + 0.1 * (rng.uniform() - 0.5),
                                1.0 + 60.0 * rng.uniform(), 0.0, 1.0};
    const auto out = convert_wavepacket(c, wp);
    CHECK(out.survival_probability <= c.peak_efficiency + 1e-15);
  }
}

TEST_CASE("far-detuned photon is flagged as below threshold") {
  const ConverterSpec c = paper_signal_converter();
  const SpectralWavepacket wp{195.0, 25.0, 0.0, 1.0};  // ~33 FWHM away
  const auto out = convert_wavepacket(c, wp);
  CHECK(out.below_threshold);
  CHECK(out.survival_probability == 0.0);
}

TEST_CASE("ripple hook perturbs the response but keeps it in [0, 1]") {
  ConverterSpec c = paper_signal_converter();
  c.ripple_amplitude = 0.3;
  c.ripple_period_ghz = 7.0;
  double max_r = 0.0;
  for (double f = 193.5; f < 193.9; f += 1e-4) {
    const double r = c.response(f);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    max_r = std::max(max_r, r);
  }
  CHECK(max_r <= 1.0);
  // with ripple the survival goes through quadrature; still bounded
  const auto out = convert_wavepacket(c, SpectralWavepacket{193.676, 25.0, 0.0, 1.0});
  CHECK(out.survival_probability <= c.peak_efficiency + 1e-12);
  CHECK(out.survival_probability > 0.0);
}

TEST_CASE("ideal conversion creates no photons from vacuum") {
  CHECK(spontaneous_noise_in_ideal_sfg() == 0.0);
  for (int k = 0; k <= 100; ++k) {
    const double theta = 6.283185307179586 * k / 100.0;
    CHECK(mean_upconverted_photons(0.0, 0.0, theta) == 0.0);
  }
  CHECK(mean_upconverted_photons(1.0, 0.0, kHalfPi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean_upconverted_photons(1.0, 0.0, kHalfPi / 2.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("converter spec validation") {
  ConverterSpec c = paper_signal_converter();
  c.peak_efficiency = 1.2;
  CHECK_THROWS_AS(c.validate(), std::domain_error);
  c = paper_signal_converter();
  c.response_fwhm_ghz = 0.0;
  CHECK_THROWS_AS(c.validate(), std::domain_error);
  c = paper_signal_converter();
  c.noise_rate_cps = -1.0;
  CHECK_THROWS_AS(c.validate(), std::domain_error);
}

}  // TEST_SUITE
