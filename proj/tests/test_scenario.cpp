#include <string>

#include "doctest.h"
#include "upconv/scenario.hpp"

using namespace upconv;

TEST_SUITE("scenario") {

TEST_CASE("the bundled scenario encodes the reference run") {
  const Scenario s = load_scenario("paper_default");
  CHECK(s.mode == ScenarioMode::simulate);
  const ExperimentConfig& c = s.config;
  CHECK(c.source.mean_pairs_per_pulse == 0.05);
  CHECK(c.source.signal_center_thz == 193.676);
  CHECK(c.source.idler_center_thz == 192.879);
  CHECK(c.source.channel_fwhm_ghz == 25.0);
  CHECK(c.source.pump_wavelength_nm == 1551.1);
  CHECK(c.source.pump_pulse_fwhm_ps == 100.0);
  CHECK(c.source.raman_mean_signal == 0.05);  // "auto" = one per pair
  CHECK(c.source.raman_tracks_pairs);
  CHECK(c.converter_signal.pump_frequency_thz == 226.477);
  CHECK(c.converter_idler.pump_frequency_thz == 227.274);
  CHECK(c.converter_signal.peak_efficiency == 0.02);
  CHECK(c.converter_signal.response_fwhm_ghz == 40.0);
  CHECK(c.n_start_pulses == 500000);
  CHECK(c.delays_ps.size() == 21);
  CHECK(c.delays_ps.front() == -40.0);
  CHECK(c.delays_ps.back() == 40.0);
  // total spurious rate: converters plus intrinsic dark counts = 4000 cps
  CHECK(c.converter_signal.noise_rate_cps + c.converter_idler.noise_rate_cps +
            c.detectors[0].dark_rate_cps + c.detectors[1].dark_rate_cps ==
        4000.0);
  CHECK(c.rng_seed == 42);
}

TEST_CASE("unknown keys are rejected with the offending path") {
  const std::string text = R"({
    "mode": "simulate",
    "delays_ps": [0.0, 1.0],
    "converter_signal": {"pump_frequency_thz": 226.0, "peak_efficiency": 0.02,
                         "response_center_thz": 193.0, "response_fwhm_ghz": 40.0,
                         "typo_key": 1.0},
    "converter_idler": {"pump_frequency_thz": 227.0, "peak_efficiency": 0.02,
                        "response_center_thz": 192.0, "response_fwhm_ghz": 40.0}
  })";
  try {
    parse_scenario_json(text, "inline");
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
    CHECK(e.field == "converter_signal.typo_key");
  }
}

TEST_CASE("schema type errors carry the field path") {
  const std::string text = R"({
    "mode": "simulate",
    "delays_ps": [0.0, 1.0],
    "repetition_rate_mhz": "fast",
    "converter_signal": {"pump_frequency_thz": 226.0, "peak_efficiency": 0.02,
                         "response_center_thz": 193.0, "response_fwhm_ghz": 40.0},
    "converter_idler": {"pump_frequency_thz": 227.0, "peak_efficiency": 0.02,
                        "response_center_thz": 192.0, "response_fwhm_ghz": 40.0}
  })";
  CHECK_THROWS_AS(parse_scenario_json(text, "inline"), ScenarioError);
}

TEST_CASE("missing required sections fail") {
  CHECK_THROWS_AS(parse_scenario_json(R"({"mode": "simulate"})", "inline"),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario_json("{not json", "inline"), ScenarioError);
}

TEST_CASE("delay range expansion") {
  const std::string text = R"({
    "mode": "budget",
    "delays_ps": {"start": -8.0, "stop": 8.0, "step": 4.0},
    "converter_signal": {"pump_frequency_thz": 226.477, "peak_efficiency": 0.02,
                         "response_center_thz": 193.676, "response_fwhm_ghz": 40.0},
    "converter_idler": {"pump_frequency_thz": 227.274, "peak_efficiency": 0.02,
                        "response_center_thz": 192.879, "response_fwhm_ghz": 40.0}
  })";
  const Scenario s = parse_scenario_json(text, "inline");
  REQUIRE(s.config.delays_ps.size() == 5);
  CHECK(s.config.delays_ps[0] == -8.0);
  CHECK(s.config.delays_ps[2] == 0.0);
  CHECK(s.config.delays_ps[4] == 8.0);
}

TEST_CASE("invalid physics is rejected at parse time") {
  const std::string text = R"({
    "mode": "simulate",
    "delays_ps": [0.0, 1.0],
    "converter_signal": {"pump_frequency_thz": 226.0, "peak_efficiency": 1.5,
                         "response_center_thz": 193.0, "response_fwhm_ghz": 40.0},
    "converter_idler": {"pump_frequency_thz": 227.0, "peak_efficiency": 0.02,
                        "response_center_thz": 192.0, "response_fwhm_ghz": 40.0}
  })";
  CHECK_THROWS_AS(parse_scenario_json(text, "inline"), ScenarioError);
}

TEST_CASE("sweep value application") {
  ExperimentConfig c = load_scenario("paper_default").config;
  REQUIRE(c.source.raman_tracks_pairs);

  apply_sweep_value(c, "source.mean_pairs_per_pulse", 0.2);
  CHECK(c.source.mean_pairs_per_pulse == 0.2);
  CHECK(c.source.raman_mean_signal == 0.2);  // tracks the pair rate
  CHECK(c.source.raman_mean_idler == 0.2);

  apply_sweep_value(c, "source.timing_jitter_sigma_ps", 5.0);
  CHECK(c.source.timing_jitter_sigma_ps == 5.0);
  apply_sweep_value(c, "detectors.dark_rate_cps", 250.0);
  CHECK(c.detectors[0].dark_rate_cps == 250.0);
  CHECK(c.detectors[1].dark_rate_cps == 250.0);

  try {
    apply_sweep_value(c, "source.nonsense", 1.0);
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    // the error enumerates the valid paths
    CHECK(std::string(e.what()).find("source.mean_pairs_per_pulse") !=
          std::string::npos);
  }
}

TEST_CASE("config renders to valid JSON") {
  const ExperimentConfig c = load_scenario("paper_default").config;
  const std::string text = config_to_json(c);
  CHECK(text.find("\"mean_pairs_per_pulse\"") != std::string::npos);
  CHECK(text.find("\"pump_frequency_thz\"") != std::string::npos);
}

}  // TEST_SUITE
