#include "upconv/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace upconv {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ScenarioError("expected an object", path);
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ScenarioError("unknown key '" + key + "'", path.empty() ? key : path + "." + key);
  }
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ScenarioError("missing required key '" + key + "'", path);
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ScenarioError("expected a number", path + "." + key);
  return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const std::string& path, const std::string& key,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned())
    throw ScenarioError("expected a non-negative integer", path + "." + key);
  return v.get<std::uint64_t>();
}

SourceSpec parse_source(const json& j, const std::string& path) {
  require_keys(j, path,
               {"pump_wavelength_nm", "pump_pulse_fwhm_ps", "mean_pairs_per_pulse",
                "signal_center_thz", "idler_center_thz", "channel_fwhm_ghz",
                "raman_mean_signal", "raman_mean_idler", "timing_jitter_sigma_ps",
                "pair_statistics"});
  SourceSpec s;
  s.pump_wavelength_nm = get_number(j, path, "pump_wavelength_nm", s.pump_wavelength_nm);
  s.pump_pulse_fwhm_ps = get_number(j, path, "pump_pulse_fwhm_ps", s.pump_pulse_fwhm_ps);
  s.mean_pairs_per_pulse =
      get_number(j, path, "mean_pairs_per_pulse", s.mean_pairs_per_pulse);
  s.signal_center_thz = get_number(j, path, "signal_center_thz", s.signal_center_thz);
  s.idler_center_thz = get_number(j, path, "idler_center_thz", s.idler_center_thz);
  s.channel_fwhm_ghz = get_number(j, path, "channel_fwhm_ghz", s.channel_fwhm_ghz);
  s.timing_jitter_sigma_ps =
      get_number(j, path, "timing_jitter_sigma_ps", s.timing_jitter_sigma_ps);

  // Raman means accept "auto" = one Raman photon per pair, tracking sweeps
  // over the pair number.
  auto parse_raman = [&](const char* key, double& target) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "auto") {
      target = s.mean_pairs_per_pulse;
      s.raman_tracks_pairs = true;
    } else if (v.is_number()) {
      target = v.get<double>();
    } else {
      throw ScenarioError("expected a number or \"auto\"", path + "." + key);
    }
  };
  parse_raman("raman_mean_signal", s.raman_mean_signal);
  parse_raman("raman_mean_idler", s.raman_mean_idler);

  if (j.contains("pair_statistics")) {
    const std::string v = j.at("pair_statistics").is_string()
                              ? j.at("pair_statistics").get<std::string>()
                              : "";
    if (v == "poisson")
      s.pair_statistics = PairStatistics::poisson;
    else if (v == "thermal")
      s.pair_statistics = PairStatistics::thermal;
    else
      throw ScenarioError("expected \"poisson\" or \"thermal\"",
                          path + ".pair_statistics");
  }
  return s;
}

ConverterSpec parse_converter(const json& j, const std::string& path) {
  require_keys(j, path,
               {"pump_frequency_thz", "peak_efficiency", "response_center_thz",
                "response_fwhm_ghz", "noise_rate_cps", "ripple_amplitude",
                "ripple_period_ghz", "pump_power_mw"});
  ConverterSpec c;
  c.pump_frequency_thz = get_number(j, path, "pump_frequency_thz", 0.0, true);
  c.peak_efficiency = get_number(j, path, "peak_efficiency", 0.0, true);
  c.response_center_thz = get_number(j, path, "response_center_thz", 0.0, true);
  c.response_fwhm_ghz = get_number(j, path, "response_fwhm_ghz", 0.0, true);
  c.noise_rate_cps = get_number(j, path, "noise_rate_cps", 0.0);
  c.ripple_amplitude = get_number(j, path, "ripple_amplitude", 0.0);
  c.ripple_period_ghz = get_number(j, path, "ripple_period_ghz", 0.0);
  c.pump_power_mw = get_number(j, path, "pump_power_mw", 0.0);
  return c;
}

DetectorSpec parse_detector(const json& j, const std::string& path) {
  require_keys(j, path, {"efficiency", "dark_rate_cps"});
  DetectorSpec d;
  d.efficiency = get_number(j, path, "efficiency", d.efficiency);
  d.dark_rate_cps = get_number(j, path, "dark_rate_cps", d.dark_rate_cps);
  return d;
}

std::vector<double> parse_delays(const json& j, const std::string& path) {
  std::vector<double> delays;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) throw ScenarioError("expected numbers", path);
      delays.push_back(v.get<double>());
    }
  } else if (j.is_object()) {
    require_keys(j, path, {"start", "stop", "step"});
    const double start = get_number(j, path, "start", 0.0, true);
    const double stop = get_number(j, path, "stop", 0.0, true);
    const double step = get_number(j, path, "step", 0.0, true);
    if (!(step > 0.0) || !(stop >= start))
      throw ScenarioError("need step > 0 and stop >= start", path);
    const int n = static_cast<int>(std::floor((stop - start) / step + 0.5)) + 1;
    for (int i = 0; i < n; ++i) delays.push_back(start + step * i);
  } else {
    throw ScenarioError("expected an array or {start, stop, step}", path);
  }
  return delays;
}

AnalyticSpec parse_analytic(const json& j, const std::string& path) {
  require_keys(j, path, {"generator", "apply_converter_response", "model"});
  AnalyticSpec a;
  if (j.contains("generator")) {
    const std::string g =
        j.at("generator").is_string() ? j.at("generator").get<std::string>() : "";
    if (g == "separable")
      a.generator = AnalyticGenerator::separable;
    else if (g == "joint")
      a.generator = AnalyticGenerator::joint;
    else if (g == "model")
      a.generator = AnalyticGenerator::model;
    else
      throw ScenarioError("expected \"separable\", \"joint\" or \"model\"",
                          path + ".generator");
  }
  if (j.contains("apply_converter_response")) {
    if (!j.at("apply_converter_response").is_boolean())
      throw ScenarioError("expected a boolean", path + ".apply_converter_response");
    a.apply_converter_response = j.at("apply_converter_response").get<bool>();
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    require_keys(m, path + ".model", {"baseline", "visibility", "sigma_ps"});
    a.model.baseline = get_number(m, path + ".model", "baseline", 1.0);
    a.model.visibility = get_number(m, path + ".model", "visibility", 1.0);
    a.model.sigma_ps = get_number(m, path + ".model", "sigma_ps", 10.6);
  }
  return a;
}

SweepSpec parse_sweep(const json& j, const std::string& path) {
  require_keys(j, path, {"parameter", "values"});
  SweepSpec s;
  if (!j.contains("parameter") || !j.at("parameter").is_string())
    throw ScenarioError("missing required string 'parameter'", path);
  s.parameter = j.at("parameter").get<std::string>();
  if (!j.contains("values") || !j.at("values").is_array())
    throw ScenarioError("missing required array 'values'", path);
  for (const auto& v : j.at("values")) {
    if (!v.is_number()) throw ScenarioError("expected numbers", path + ".values");
    s.values.push_back(v.get<double>());
  }
  return s;
}

}  // namespace

Scenario parse_scenario_json(const std::string& text, const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("JSON parse error in ") + source_name + ": " + e.what(),
                        "");
  }

  require_keys(j, "",
               {"mode", "output_prefix", "seed", "source", "converter_signal",
                "converter_idler", "detectors", "tia", "repetition_rate_mhz",
                "n_start_pulses", "delays_ps", "distinguishability_overlap",
                "pulse_cap_per_point", "analytic", "sweep"});

  Scenario s;
  if (!j.contains("mode") || !j.at("mode").is_string())
    throw ScenarioError("missing required string 'mode'", "mode");
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "analytic")
    s.mode = ScenarioMode::analytic;
  else if (mode == "simulate")
    s.mode = ScenarioMode::simulate;
  else if (mode == "fit")
    s.mode = ScenarioMode::fit;
  else if (mode == "budget")
    s.mode = ScenarioMode::budget;
  else if (mode == "sweep")
    s.mode = ScenarioMode::sweep;
  else
    throw ScenarioError("unknown mode '" + mode + "'", "mode");

  if (j.contains("output_prefix")) {
    if (!j.at("output_prefix").is_string())
      throw ScenarioError("expected a string", "output_prefix");
    s.output_prefix = j.at("output_prefix").get<std::string>();
  }

  ExperimentConfig& c = s.config;
  c.rng_seed = get_uint(j, "", "seed", c.rng_seed);
  c.repetition_rate_mhz =
      get_number(j, "", "repetition_rate_mhz", c.repetition_rate_mhz);
  c.n_start_pulses = get_uint(j, "", "n_start_pulses", c.n_start_pulses);
  c.distinguishability_overlap =
      get_number(j, "", "distinguishability_overlap", c.distinguishability_overlap);
  c.pulse_cap_per_point = get_uint(j, "", "pulse_cap_per_point", c.pulse_cap_per_point);

  if (j.contains("source")) c.source = parse_source(j.at("source"), "source");
  if (j.contains("converter_signal"))
    c.converter_signal = parse_converter(j.at("converter_signal"), "converter_signal");
  else
    throw ScenarioError("missing required object 'converter_signal'", "");
  if (j.contains("converter_idler"))
    c.converter_idler = parse_converter(j.at("converter_idler"), "converter_idler");
  else
    throw ScenarioError("missing required object 'converter_idler'", "");

  if (j.contains("detectors")) {
    const json& d = j.at("detectors");
    if (!d.is_array() || d.size() != 2)
      throw ScenarioError("expected an array of exactly 2 detectors", "detectors");
    c.detectors[0] = parse_detector(d[0], "detectors[0]");
    c.detectors[1] = parse_detector(d[1], "detectors[1]");
  }
  if (j.contains("tia")) {
    require_keys(j.at("tia"), "tia", {"coincidence_window_ns", "start_detector"});
    c.tia.coincidence_window_ns =
        get_number(j.at("tia"), "tia", "coincidence_window_ns", c.tia.coincidence_window_ns);
    c.tia.start_detector = static_cast<int>(
        get_uint(j.at("tia"), "tia", "start_detector",
                 static_cast<std::uint64_t>(c.tia.start_detector)));
  }
  if (!j.contains("delays_ps"))
    throw ScenarioError("missing required key 'delays_ps'", "");
  c.delays_ps = parse_delays(j.at("delays_ps"), "delays_ps");

  if (j.contains("analytic")) s.analytic = parse_analytic(j.at("analytic"), "analytic");
  if (j.contains("sweep")) s.sweep = parse_sweep(j.at("sweep"), "sweep");
  if (s.mode == ScenarioMode::sweep && s.sweep.parameter.empty())
    throw ScenarioError("sweep mode requires a 'sweep' section", "sweep");

  try {
    c.validate();
  } catch (const std::domain_error& e) {
    throw ScenarioError(e.what(), "");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  if (path == "paper_default")
    return parse_scenario_json(paper_default_scenario_json(), "paper_default");
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'", "");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_json(buffer.str(), path);
}

const char* paper_default_scenario_json() {
  return R"json({
  "mode": "simulate",
  "output_prefix": "paper_default",
  "seed": 42,
  "repetition_rate_mhz": 100.0,
  "n_start_pulses": 500000,
  "delays_ps": {"start": -40.0, "stop": 40.0, "step": 4.0},
  "distinguishability_overlap": 1.0,
  "source": {
    "pump_wavelength_nm": 1551.1,
    "pump_pulse_fwhm_ps": 100.0,
    "mean_pairs_per_pulse": 0.05,
    "signal_center_thz": 193.676,
    "idler_center_thz": 192.879,
    "channel_fwhm_ghz": 25.0,
    "raman_mean_signal": "auto",
    "raman_mean_idler": "auto",
    "timing_jitter_sigma_ps": 0.0,
    "pair_statistics": "poisson"
  },
  "converter_signal": {
    "pump_frequency_thz": 226.477,
    "peak_efficiency": 0.02,
    "response_center_thz": 193.676,
    "response_fwhm_ghz": 40.0,
    "noise_rate_cps": 1900.0,
    "pump_power_mw": 4.9
  },
  "converter_idler": {
    "pump_frequency_thz": 227.274,
    "peak_efficiency": 0.02,
    "response_center_thz": 192.879,
    "response_fwhm_ghz": 40.0,
    "noise_rate_cps": 1900.0,
    "pump_power_mw": 12.8
  },
  "detectors": [
    {"efficiency": 0.6, "dark_rate_cps": 100.0},
    {"efficiency": 0.6, "dark_rate_cps": 100.0}
  ],
  "tia": {"coincidence_window_ns": 1.0, "start_detector": 1}
})json";
}

const std::vector<std::string>& sweep_parameter_paths() {
  static const std::vector<std::string> paths = {
      "source.mean_pairs_per_pulse",
      "source.raman_mean_signal",
      "source.raman_mean_idler",
      "source.timing_jitter_sigma_ps",
      "converter_signal.peak_efficiency",
      "converter_idler.peak_efficiency",
      "converter_signal.noise_rate_cps",
      "converter_idler.noise_rate_cps",
      "detectors.dark_rate_cps",
      "detectors.efficiency",
      "distinguishability_overlap",
  };
  return paths;
}

void apply_sweep_value(ExperimentConfig& config, const std::string& path, double value) {
  if (path == "source.mean_pairs_per_pulse") {
    config.source.mean_pairs_per_pulse = value;
    if (config.source.raman_tracks_pairs) {
      config.source.raman_mean_signal = value;
      config.source.raman_mean_idler = value;
    }
  } else if (path == "source.raman_mean_signal") {
    config.source.raman_mean_signal = value;
  } else if (path == "source.raman_mean_idler") {
    config.source.raman_mean_idler = value;
  } else if (path == "source.timing_jitter_sigma_ps") {
    config.source.timing_jitter_sigma_ps = value;
  } else if (path == "converter_signal.peak_efficiency") {
    config.converter_signal.peak_efficiency = value;
  } else if (path == "converter_idler.peak_efficiency") {
    config.converter_idler.peak_efficiency = value;
  } else if (path == "converter_signal.noise_rate_cps") {
    config.converter_signal.noise_rate_cps = value;
  } else if (path == "converter_idler.noise_rate_cps") {
    config.converter_idler.noise_rate_cps = value;
  } else if (path == "detectors.dark_rate_cps") {
    config.detectors[0].dark_rate_cps = value;
    config.detectors[1].dark_rate_cps = value;
  } else if (path == "detectors.efficiency") {
    config.detectors[0].efficiency = value;
    config.detectors[1].efficiency = value;
  } else if (path == "distinguishability_overlap") {
    config.distinguishability_overlap = value;
  } else {
    std::string known;
    for (const auto& p : sweep_parameter_paths()) known += "\n  " + p;
    throw ScenarioError("unknown sweep parameter '" + path + "'; valid paths:" + known,
                        "sweep.parameter");
  }
}

std::string config_to_json(const ExperimentConfig& config, int indent) {
  json j;
  j["seed"] = config.rng_seed;
  j["repetition_rate_mhz"] = config.repetition_rate_mhz;
  j["n_start_pulses"] = config.n_start_pulses;
  j["delays_ps"] = config.delays_ps;
  j["distinguishability_overlap"] = config.distinguishability_overlap;
  j["pulse_cap_per_point"] = config.pulse_cap_per_point;
  j["source"] = {
      {"pump_wavelength_nm", config.source.pump_wavelength_nm},
      {"pump_pulse_fwhm_ps", config.source.pump_pulse_fwhm_ps},
      {"mean_pairs_per_pulse", config.source.mean_pairs_per_pulse},
      {"signal_center_thz", config.source.signal_center_thz},
      {"idler_center_thz", config.source.idler_center_thz},
      {"channel_fwhm_ghz", config.source.channel_fwhm_ghz},
      {"raman_mean_signal", config.source.raman_mean_signal},
      {"raman_mean_idler", config.source.raman_mean_idler},
      {"timing_jitter_sigma_ps", config.source.timing_jitter_sigma_ps},
      {"pair_statistics",
       config.source.pair_statistics == PairStatistics::thermal ? "thermal" : "poisson"},
  };
  auto converter_json = [](const ConverterSpec& c) {
    return json{{"pump_frequency_thz", c.pump_frequency_thz},
                {"peak_efficiency", c.peak_efficiency},
                {"response_center_thz", c.response_center_thz},
                {"response_fwhm_ghz", c.response_fwhm_ghz},
                {"noise_rate_cps", c.noise_rate_cps},
                {"ripple_amplitude", c.ripple_amplitude},
                {"ripple_period_ghz", c.ripple_period_ghz},
                {"pump_power_mw", c.pump_power_mw}};
  };
  j["converter_signal"] = converter_json(config.converter_signal);
  j["converter_idler"] = converter_json(config.converter_idler);
  j["detectors"] = {
      {{"efficiency", config.detectors[0].efficiency},
       {"dark_rate_cps", config.detectors[0].dark_rate_cps}},
      {{"efficiency", config.detectors[1].efficiency},
       {"dark_rate_cps", config.detectors[1].dark_rate_cps}},
  };
  j["tia"] = {{"coincidence_window_ns", config.tia.coincidence_window_ns},
              {"start_detector", config.tia.start_detector}};
  return j.dump(indent);
}

}  // namespace upconv
