#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_helpers.hpp"
#include "upconv/fit.hpp"
#include "upconv/montecarlo.hpp"
#include "upconv/scenario.hpp"

using namespace upconv;

namespace {

// The reference configuration with a reduced run length for unit tests.
ExperimentConfig paper_config(std::uint64_t starts = 20000) {
  ExperimentConfig c = load_scenario("paper_default").config;
  c.n_start_pulses = starts;
  return c;
}

ExperimentConfig noise_free_config(double mu, std::uint64_t starts) {
  ExperimentConfig c = paper_config(starts);
  c.source.mean_pairs_per_pulse = mu;
  c.source.raman_mean_signal = 0.0;
  c.source.raman_mean_idler = 0.0;
  c.converter_signal.noise_rate_cps = 0.0;
  c.converter_idler.noise_rate_cps = 0.0;
  c.detectors[0].dark_rate_cps = 0.0;
  c.detectors[1].dark_rate_cps = 0.0;
  return c;
}

// Ideal bench: unit conversion and detection, flat response.
ExperimentConfig ideal_config(std::uint64_t starts) {
  ExperimentConfig c = noise_free_config(0.001, starts);
  c.converter_signal.peak_efficiency = 1.0;
  c.converter_idler.peak_efficiency = 1.0;
  c.converter_signal.response_fwhm_ghz = 1e9;
  c.converter_idler.response_fwhm_ghz = 1e9;
  c.detectors[0].efficiency = 1.0;
  c.detectors[1].efficiency = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("silent configuration never clicks") {
  ExperimentConfig c = noise_free_config(0.0, 1);
  const PulseModel model(c);
  RngStream rng(1);
  for (int i = 0; i < 20000; ++i) {
    const PulseClicks k = model.simulate_pulse(0.0, rng);
    REQUIRE_FALSE(k.detector1);
    REQUIRE_FALSE(k.detector2);
  }
}

TEST_CASE("a lone conjugate pair never coincides at zero delay") {
  const ExperimentConfig c = ideal_config(1);
  const PulseModel model(c);
  CHECK(model.survival_signal() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(model.converted_overlap_sq(0.0) == doctest::Approx(1.0).epsilon(1e-9));

  RngStream rng(2);
  const PulseEmission one_pair{1, 0, 0, 0.0, 0.0};
  int clicks = 0;
  for (int i = 0; i < 100000; ++i) {
    const PulseClicks k = model.route_and_detect(one_pair, 0.0, rng);
    REQUIRE_FALSE((k.detector1 && k.detector2));
    clicks += k.detector1 || k.detector2;
  }
  CHECK(clicks == 100000);  // photons always arrive somewhere
}

TEST_CASE("far-delayed pair splits half the time") {
  const ExperimentConfig c = ideal_config(1);
  const PulseModel model(c);
  RngStream rng(3);
  const PulseEmission one_pair{1, 0, 0, 0.0, 0.0};
  int coincidences = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const PulseClicks k = model.route_and_detect(one_pair, 1e6, rng);
    coincidences += k.detector1 && k.detector2;
  }
  CHECK(std::abs(static_cast<double>(coincidences) / n - 0.5) < 0.01);
}

TEST_CASE("run_experiment is deterministic and thread-invariant") {
  ExperimentConfig c = paper_config(3000);
  c.delays_ps = {-40.0, -20.0, 0.0, 20.0, 40.0};
  const DipCurve a = run_experiment(c, 1);
  const DipCurve b = run_experiment(c, 1);
  const DipCurve d = run_experiment(c, 4);
  REQUIRE(a.points.size() == 5);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_csv() == d.to_csv());
  CHECK(a.config_digest == c.digest());
  for (const auto& p : a.points) CHECK(p.starts == 3000);

  // a different seed must change the outcome
  c.rng_seed += 1;
  const DipCurve e = run_experiment(c, 1);
  CHECK(a.to_csv() != e.to_csv());
}

TEST_CASE("dip is symmetric within counting noise") {
  ExperimentConfig c = paper_config(30000);
  c.delays_ps = {-8.0, 8.0};
  const DipCurve curve = run_experiment(c, 1);
  const double n1 = static_cast<double>(curve.points[0].coincidences);
  const double n2 = static_cast<double>(curve.points[1].coincidences);
  CHECK(std::abs(n1 - n2) < 3.0 * std::sqrt(n1 + n2 + 1.0));
}

TEST_CASE("simulated dip agrees with the analytic budget") {
  // noise-free: only pairs, so the budget enumeration is nearly exact
  ExperimentConfig c = noise_free_config(0.05, 25000);
  const VisibilityBudget budget = visibility_budget(c);
  const DipCurve curve = run_experiment(c, 1);
  const auto delays = curve.delays();
  const auto counts = curve.counts();
  const FitResult fit = fit_dip(delays, counts);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.visibility - budget.predicted_visibility) <
        3.0 * fit.visibility_stderr + 0.01);

  // far-delay rate consistency against the same enumeration
  const double expected = budget.expected_baseline_counts;
  const double observed = 0.5 * (counts.front() + counts.back());
  CHECK(std::abs(observed - expected) < 3.0 * std::sqrt(expected));
}

TEST_CASE("baseline and start rates match the enumeration with noise on") {
  ExperimentConfig c = paper_config(20000);
  c.delays_ps = {-40.0, 40.0};
  const VisibilityBudget budget = visibility_budget(c);
  const DipCurve curve = run_experiment(c, 1);
  for (const auto& p : curve.points) {
    CHECK(std::abs(static_cast<double>(p.coincidences) -
                   budget.expected_baseline_counts) <
          3.0 * std::sqrt(budget.expected_baseline_counts));
  }

  // one-shot sampler versus the enumerated start probability
  const PulseModel model(c);
  RngStream rng(11);
  int starts = 0;
  const int n = 2000000;
  for (int i = 0; i < n; ++i) starts += model.simulate_pulse(-40.0, rng).detector1;
  const double rate = static_cast<double>(starts) / n;
  CHECK(std::abs(rate - budget.start_click_probability) <
        3.0 * std::sqrt(budget.start_click_probability / n));
}

TEST_CASE("budget limits") {
  SUBCASE("vanishing pair rate and no noise predicts unit visibility") {
    ExperimentConfig c = noise_free_config(1e-4, 1);
    const VisibilityBudget b = visibility_budget(c);
    CHECK(b.predicted_visibility > 0.999);
    CHECK(b.truncation_error < 1e-6);
  }
  SUBCASE("visibility decreases with the pair rate") {
    double prev = 2.0;
    for (double mu : {0.01, 0.05, 0.2}) {
      ExperimentConfig c = paper_config(1);
      c.source.mean_pairs_per_pulse = mu;
      c.source.raman_mean_signal = mu;  // Raman tracks the pair rate
      c.source.raman_mean_idler = mu;
      const double v = visibility_budget(c).predicted_visibility;
      CHECK(v < prev);
      prev = v;
    }
  }
  SUBCASE("categories sum to the baseline") {
    const VisibilityBudget b = visibility_budget(paper_config(1));
    CHECK(b.interfering + b.multi_pair + b.raman_involved + b.dark_involved ==
          doctest::Approx(b.baseline_total).epsilon(1e-12));
  }
  SUBCASE("visibility decreases with timing jitter") {
    double prev = 2.0;
    for (double jitter : {0.0, 5.0, 20.0}) {
      ExperimentConfig c = paper_config(1);
      c.source.timing_jitter_sigma_ps = jitter;
      const double v = visibility_budget(c).predicted_visibility;
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("low pair rate without noise approaches unit visibility") {
  const ExperimentConfig c = ideal_config(3000);
  const DipCurve curve = run_experiment(c, 1);
  const auto delays = curve.delays();
  const auto counts = curve.counts();
  const FitResult fit = fit_dip(delays, counts);
  REQUIRE(fit.converged);
  CHECK(fit.visibility >= 0.98);
}

TEST_CASE("disabled conversion leaves the photons distinguishable") {
  // pass-through converters: no frequency translation, centers 797 GHz apart
  ExperimentConfig c = noise_free_config(0.05, 15000);
  c.converter_signal.pump_frequency_thz = 0.0;
  c.converter_idler.pump_frequency_thz = 0.0;
  c.converter_signal.peak_efficiency = 1.0;
  c.converter_idler.peak_efficiency = 1.0;
  c.converter_signal.response_fwhm_ghz = 1e9;
  c.converter_idler.response_fwhm_ghz = 1e9;
  c.detectors[0].efficiency = 1.0;
  c.detectors[1].efficiency = 1.0;

  const PulseModel model(c);
  CHECK(model.converted_overlap_sq(0.0) < 1e-100);

  const DipCurve curve = run_experiment(c, 1);
  const auto delays = curve.delays();
  const auto counts = curve.counts();
  const FitResult fit = fit_dip(delays, counts);
  CHECK(std::abs(fit.visibility) < 3.0 * fit.visibility_stderr + 0.01);
}

TEST_CASE("timing jitter washes out the dip") {
  ExperimentConfig with = noise_free_config(0.02, 8000);
  with.source.timing_jitter_sigma_ps = 20.0;
  ExperimentConfig without = noise_free_config(0.02, 8000);

  const auto fit_v = [](const DipCurve& curve) {
    const auto d = curve.delays();
    const auto y = curve.counts();
    return fit_dip(d, y).visibility;
  };
  const double v_with = fit_v(run_experiment(with, 1));
  const double v_without = fit_v(run_experiment(without, 1));
  CHECK(v_with < v_without - 0.2);

  // the budget sees the same washout
  CHECK(visibility_budget(with).predicted_visibility <
        visibility_budget(without).predicted_visibility - 0.2);
}

TEST_CASE("asymmetric detectors and a swapped start channel stay consistent") {
  ExperimentConfig c = paper_config(20000);
  c.detectors[0].efficiency = 0.7;
  c.detectors[1].efficiency = 0.45;
  c.detectors[1].dark_rate_cps = 300.0;
  c.tia.start_detector = 2;
  c.delays_ps = {-40.0, 40.0};

  const VisibilityBudget budget = visibility_budget(c);
  const PulseModel model(c);
  RngStream rng(23);
  int starts = 0;
  const int n = 2000000;
  for (int i = 0; i < n; ++i) starts += model.simulate_pulse(40.0, rng).detector2;
  const double rate = static_cast<double>(starts) / n;
  CHECK(std::abs(rate - budget.start_click_probability) <
        3.0 * std::sqrt(budget.start_click_probability / n));

  const DipCurve curve = run_experiment(c, 1);
  for (const auto& p : curve.points) {
    CHECK(p.starts == 20000);
    CHECK(std::abs(static_cast<double>(p.coincidences) -
                   budget.expected_baseline_counts) <
          3.0 * std::sqrt(budget.expected_baseline_counts));
  }
}

TEST_CASE("thermal pair statistics lower the visibility consistently") {
  // Thermal bunching doubles P(2)/P(1)^2, so the multi-pair floor rises;
  // the enumeration and the simulation must agree on how much.
  ExperimentConfig poisson = noise_free_config(0.05, 20000);
  ExperimentConfig thermal = poisson;
  thermal.source.pair_statistics = PairStatistics::thermal;

  const double v_poisson = visibility_budget(poisson).predicted_visibility;
  const double v_thermal = visibility_budget(thermal).predicted_visibility;
  CHECK(v_thermal < v_poisson - 0.01);

  const DipCurve curve = run_experiment(thermal, 1);
  const auto delays = curve.delays();
  const auto counts = curve.counts();
  const FitResult fit = fit_dip(delays, counts);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.visibility - v_thermal) < 3.0 * fit.visibility_stderr + 0.01);
}

TEST_CASE("pulse cap aborts an unreachable run") {
  ExperimentConfig c = noise_free_config(0.0, 100);
  c.delays_ps = {0.0};
  c.pulse_cap_per_point = 1 << 20;
  CHECK_THROWS_AS(run_experiment(c, 1), PulseCapExhausted);
}

TEST_CASE("config digest distinguishes configurations") {
  const ExperimentConfig a = paper_config();
  ExperimentConfig b = a;
  CHECK(a.digest() == b.digest());
  b.source.mean_pairs_per_pulse = 0.06;
  CHECK(a.digest() != b.digest());
  ExperimentConfig c = a;
  c.rng_seed = 43;
  CHECK(a.digest() != c.digest());
}

TEST_CASE("dip curve CSV round trip") {
  DipCurve curve;
  curve.points = {{-4.0, 120, 10000}, {0.0, 30, 10000}, {4.0, 118, 10000}};
  curve.config_digest = "deadbeef";
  const std::string csv = curve.to_csv();
  std::istringstream in(csv);
  const DipCurve back = DipCurve::from_csv(in);
  REQUIRE(back.points.size() == 3);
  CHECK(back.points[1].coincidences == 30);
  CHECK(back.points[2].delay_ps == 4.0);

  std::istringstream bad("delay_ps,coincidences,starts\n1.0,oops,3\n");
  CHECK_THROWS_AS(DipCurve::from_csv(bad), CsvError);
  std::istringstream negative("delay_ps,coincidences,starts\n1.0,-5,100\n");
  CHECK_THROWS_AS(DipCurve::from_csv(negative), CsvError);
  std::istringstream bad_header("delay,counts\n");
  CHECK_THROWS_AS(DipCurve::from_csv(bad_header), CsvError);
  try {
    std::istringstream bad2("delay_ps,coincidences,starts\n1.0,5,100\nnope\n");
    DipCurve::from_csv(bad2);
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.line_number == 3);
  }
}

TEST_CASE("experiment config validation") {
  ExperimentConfig c = paper_config();
  c.delays_ps.clear();
  CHECK_THROWS_AS(c.validate(), std::domain_error);
  c = paper_config();
  c.delays_ps = {0.0, 0.0};
  CHECK_THROWS_AS(c.validate(), std::domain_error);
  c = paper_config();
  c.repetition_rate_mhz = 0.0;
  CHECK_THROWS_AS(c.validate(), std::domain_error);
  c = paper_config();
  c.tia.start_detector = 3;
  CHECK_THROWS_AS(c.validate(), std::domain_error);
  c = paper_config();
  c.distinguishability_overlap = 1.5;
  CHECK_THROWS_AS(c.validate(), std::domain_error);
}

}  // TEST_SUITE
