#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_helpers.hpp"
#include "upconv/pair_source.hpp"
#include "upconv/units.hpp"
#include "upconv/wavepacket.hpp"

using namespace upconv;

namespace {

SourceSpec paper_source() {
  SourceSpec s;  // defaults encode the reference source
  return s;
}

}  // namespace

TEST_SUITE("pair_source") {

TEST_CASE("zero-mean channels never emit") {
  SourceSpec s = paper_source();
  s.mean_pairs_per_pulse = 0.0;
  s.raman_mean_signal = 0.0;
  s.raman_mean_idler = 0.0;
  RngStream rng(1);
  for (int i = 0; i < 100000; ++i) {
    const PulseEmission e = sample_emission(s, rng);
    REQUIRE(e.n_pairs == 0);
    REQUIRE(e.n_raman_signal == 0);
    REQUIRE(e.n_raman_idler == 0);
  }
}

TEST_CASE("pair statistics at the reference mean") {
  SourceSpec s = paper_source();
  s.raman_mean_signal = 0.0;
  s.raman_mean_idler = 0.0;
  RngStream rng(2024);
  const int n = 1000000;
  long long total = 0;
  int multi = 0;
  for (int i = 0; i < n; ++i) {
    const PulseEmission e = sample_emission(s, rng);
    total += e.n_pairs;
    multi += e.n_pairs >= 2;
  }
  const double mean = static_cast<double>(total) / n;
  CHECK(std::abs(mean - 0.05) < 0.001);
  // P(n >= 2) = 1 - exp(-mu)(1 + mu) = 1.2091e-3 at mu = 0.05
  const double p_multi = static_cast<double>(multi) / n;
  CHECK(std::abs(p_multi - 0.0012091042742496) < 1.8e-4);  // ~5 sigma of 1e6 draws
}

TEST_CASE("Poisson sampler passes a chi-square goodness-of-fit") {
  for (double mu : {0.01, 0.05, 0.5}) {
    SourceSpec s = paper_source();
    s.mean_pairs_per_pulse = mu;
    s.raman_mean_signal = 0.0;
    s.raman_mean_idler = 0.0;
    RngStream rng(77);
    const int n = 1000000;

    // bins 0..k-1 plus a tail bin, sized so every expectation is >= ~20
    const int tail = mu < 0.02 ? 2 : (mu < 0.1 ? 3 : 5);
    std::vector<long long> observed(tail + 1, 0);
    for (int i = 0; i < n; ++i) {
      const int k = sample_emission(s, rng).n_pairs;
      ++observed[std::min(k, tail)];
    }
    double chi2 = 0.0;
    double tail_p = 1.0;
    for (int k = 0; k < tail; ++k) {
      const double e = n * testutil::poisson_pmf(k, mu);
      tail_p -= testutil::poisson_pmf(k, mu);
      chi2 += (observed[k] - e) * (observed[k] - e) / e;
    }
    const double e_tail = n * tail_p;
    chi2 += (observed[tail] - e_tail) * (observed[tail] - e_tail) / e_tail;
    CHECK(chi2 < testutil::chi2_crit_p001(tail));  // dof = bins - 1
  }
}

TEST_CASE("thermal pair statistics") {
  SourceSpec s = paper_source();
  s.pair_statistics = PairStatistics::thermal;
  s.mean_pairs_per_pulse = 0.4;
  s.raman_mean_signal = 0.0;
  s.raman_mean_idler = 0.0;
  RngStream rng(5);
  const int n = 400000;
  long long total = 0;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    const PulseEmission e = sample_emission(s, rng);
    total += e.n_pairs;
    zeros += e.n_pairs == 0;
  }
  CHECK(static_cast<double>(total) / n == doctest::Approx(0.4).epsilon(0.02));
  // P(0) = 1/(1+mu)
  CHECK(static_cast<double>(zeros) / n ==
        doctest::Approx(1.0 / 1.4).epsilon(0.01));
}

TEST_CASE("timing jitter") {
  SourceSpec s = paper_source();
  SUBCASE("zero sigma gives exactly zero offsets") {
    RngStream rng(3);
    for (int i = 0; i < 1000; ++i) {
      const PulseEmission e = sample_emission(s, rng);
      CHECK(e.jitter_offset_signal_ps == 0.0);
      CHECK(e.jitter_offset_idler_ps == 0.0);
    }
  }
  SUBCASE("offsets follow the configured spread") {
    s.timing_jitter_sigma_ps = 5.0;
    RngStream rng(4);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const PulseEmission e = sample_emission(s, rng);
      sum += e.jitter_offset_signal_ps;
      sq += e.jitter_offset_signal_ps * e.jitter_offset_signal_ps;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::sqrt(sq / n) == doctest::Approx(5.0).epsilon(0.02));
  }
}

TEST_CASE("emission sampling is deterministic per seed") {
  const SourceSpec s = paper_source();
  RngStream a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    const PulseEmission ea = sample_emission(s, a);
    const PulseEmission eb = sample_emission(s, b);
    CHECK(ea.n_pairs == eb.n_pairs);
    CHECK(ea.n_raman_signal == eb.n_raman_signal);
    CHECK(ea.n_raman_idler == eb.n_raman_idler);
  }
}

TEST_CASE("emitted wavepackets carry the channel plan") {
  const SourceSpec s = paper_source();
  const auto [signal, idler] = emitted_wavepackets(s);
  CHECK(signal.center_frequency_thz == 193.676);
  CHECK(idler.center_frequency_thz == 192.879);
  CHECK(signal.center_frequency_thz - idler.center_frequency_thz ==
        doctest::Approx(0.797).epsilon(1e-12));
  CHECK(signal.fwhm_bandwidth_ghz == 25.0);
  // both channels sit at the transform-limit coherence scale
  CHECK(coherence_sigma_from_bandwidth(signal.fwhm_bandwidth_ghz) ==
        doctest::Approx(10.6).epsilon(0.005));

  // deterministic: a second call returns the same thing
  const auto again = emitted_wavepackets(s);
  CHECK(again.first.center_frequency_thz == signal.center_frequency_thz);
  CHECK(again.second.fwhm_bandwidth_ghz == idler.fwhm_bandwidth_ghz);
}

TEST_CASE("anticorrelated joint state parameters") {
  const SourceSpec s = paper_source();
  const JointSpectralAmplitude jsa = anticorrelated_jsa(s);
  CHECK(jsa.kind == JointSpectralAmplitude::Kind::anticorrelated);
  CHECK(jsa.difference_center_ghz == doctest::Approx(797.0).epsilon(1e-9));
  CHECK(jsa.sum_center_thz == doctest::Approx(386.555).epsilon(1e-12));
  // 100 ps transform-limited pump: time-bandwidth product 0.441
  CHECK(jsa.sum_bandwidth_ghz == doctest::Approx(4.412712).epsilon(1e-4));
  CHECK(jsa.difference_bandwidth_ghz ==
        doctest::Approx(25.0 * std::sqrt(2.0)).epsilon(1e-12));

  SourceSpec near_degenerate = s;
  near_degenerate.idler_center_thz = s.signal_center_thz - 1e-9;
  CHECK(anticorrelated_jsa(near_degenerate).difference_center_ghz ==
        doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("source validation") {
  SourceSpec s = paper_source();
  s.mean_pairs_per_pulse = -0.1;
  CHECK_THROWS_AS(s.validate(), std::domain_error);
  s = paper_source();
  s.idler_center_thz = s.signal_center_thz;
  CHECK_THROWS_AS(s.validate(), std::domain_error);
  s = paper_source();
  s.raman_mean_signal = -1.0;
  CHECK_THROWS_AS(s.validate(), std::domain_error);
}

}  // TEST_SUITE
