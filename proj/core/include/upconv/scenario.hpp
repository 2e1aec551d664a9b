#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "upconv/hom.hpp"
#include "upconv/montecarlo.hpp"

namespace upconv {

enum class ScenarioMode { analytic, simulate, fit, budget, sweep };

enum class AnalyticGenerator { separable, joint, model };

/// Parameters of the `analytic` mode.  The separable generator interferes
/// the two channel photons brought to a common center (ideal frequency
/// erasure); apply_converter_response additionally narrows them by the
/// phase-matching filters.
struct AnalyticSpec {
  AnalyticGenerator generator = AnalyticGenerator::separable;
  bool apply_converter_response = false;
  DipModel model{1.0, 1.0, 10.6};  // used by the model generator
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

/// Thrown on any scenario schema violation; `field` names the offending
/// key path.
struct ScenarioError : std::runtime_error {
  ScenarioError(const std::string& msg, std::string field_path)
      : std::runtime_error(msg + (field_path.empty() ? "" : " (at " + field_path + ")")),
        field(std::move(field_path)) {}
  std::string field;
};

/// A parsed scenario document: mode selector, the full experiment
/// configuration, and mode-specific sections.
struct Scenario {
  ScenarioMode mode = ScenarioMode::simulate;
  ExperimentConfig config;
  std::string output_prefix = "upconv_out";
  AnalyticSpec analytic;
  SweepSpec sweep;
};

/// Parses a scenario from JSON text; unknown keys are rejected and every
/// physical value carries its unit in the key name.
Scenario parse_scenario_json(const std::string& text, const std::string& source_name);

/// Loads a scenario file, or the bundled fixture when `path` is
/// "paper_default".
Scenario load_scenario(const std::string& path);

/// The bundled scenario encoding the reference experiment: 0.05 pairs per
/// pulse, 2% conversion with 40 GHz response, 4000 cps total noise,
/// 500,000 start pulses, and documented defaults for the quantities the
/// reference leaves open.
const char* paper_default_scenario_json();

/// Config paths accepted by `apply_sweep_value`.
const std::vector<std::string>& sweep_parameter_paths();

void apply_sweep_value(ExperimentConfig& config, const std::string& path, double value);

/// Canonical JSON rendering of a config (used in run reports).
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

}  // namespace upconv
