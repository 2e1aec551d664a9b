// upconv: scenario-driven simulator of two-photon interference behind
// quantum frequency up-conversion.  Subcommands: analytic, simulate, fit,
// budget, sweep.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "upconv/dip_curve.hpp"
#include "upconv/fit.hpp"
#include "upconv/hom.hpp"
#include "upconv/montecarlo.hpp"
#include "upconv/pair_source.hpp"
#include "upconv/scenario.hpp"
#include "upconv/sfg_converter.hpp"
#include "upconv/units.hpp"
#include "upconv/wavepacket.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitRuntime = 3;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

struct CommonOptions {
  std::string scenario_path;
  std::string out_prefix;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> pulse_cap;
  int threads = 0;
};

upconv::Scenario load_with_overrides(const CommonOptions& opt) {
  upconv::Scenario s = upconv::load_scenario(opt.scenario_path);
  if (!opt.out_prefix.empty()) s.output_prefix = opt.out_prefix;
  if (opt.seed) s.config.rng_seed = *opt.seed;
  if (opt.pulse_cap) s.config.pulse_cap_per_point = *opt.pulse_cap;
  return s;
}

// The two wavepackets the analytic separable generator interferes: the
// channel photons mapped to the common SFG frequency, optionally narrowed
// by the converter responses.
std::pair<upconv::SpectralWavepacket, upconv::SpectralWavepacket> analytic_pair(
    const upconv::Scenario& s) {
  const auto [signal, idler] = upconv::emitted_wavepackets(s.config.source);
  if (s.analytic.apply_converter_response) {
    const auto conv_s = upconv::convert_wavepacket(s.config.converter_signal, signal);
    const auto conv_i = upconv::convert_wavepacket(s.config.converter_idler, idler);
    return {conv_s.output, conv_i.output};
  }
  upconv::SpectralWavepacket a = signal;
  upconv::SpectralWavepacket b = idler;
  a.center_frequency_thz =
      signal.center_frequency_thz + s.config.converter_signal.pump_frequency_thz;
  b.center_frequency_thz =
      idler.center_frequency_thz + s.config.converter_idler.pump_frequency_thz;
  return {a, b};
}

std::string probability_csv(const upconv::ProbabilityCurve& curve) {
  std::string out = "delay_ps,probability\n";
  for (std::size_t i = 0; i < curve.delays_ps.size(); ++i)
    out += format_double(curve.delays_ps[i]) + "," + format_double(curve.values[i]) +
           "\n";
  return out;
}

int cmd_analytic(const CommonOptions& opt) {
  const upconv::Scenario s = load_with_overrides(opt);
  upconv::CurveGenerator generator;
  switch (s.analytic.generator) {
    case upconv::AnalyticGenerator::separable: {
      const auto [a, b] = analytic_pair(s);
      generator = upconv::SeparablePair{a, b, s.config.distinguishability_overlap};
      break;
    }
    case upconv::AnalyticGenerator::joint:
      generator = upconv::anticorrelated_jsa(s.config.source);
      break;
    case upconv::AnalyticGenerator::model:
      generator = s.analytic.model;
      break;
  }

  const upconv::ProbabilityCurve curve =
      upconv::hom_dip_curve(generator, s.config.delays_ps);
  write_file(s.output_prefix + "_curve.csv", probability_csv(curve));

  json summary;
  std::string text;
  if (s.analytic.generator == upconv::AnalyticGenerator::joint) {
    const auto minima = upconv::local_minima_delays(curve);
    double period = 0.0;
    if (minima.size() >= 2) {
      for (std::size_t i = 1; i < minima.size(); ++i) period += minima[i] - minima[i - 1];
      period /= static_cast<double>(minima.size() - 1);
    }
    summary["generator"] = "joint";
    summary["n_minima"] = minima.size();
    summary["minima_delays_ps"] = minima;
    summary["beat_period_ps"] = period;
    const double fd = upconv::units::ghz_to_thz(
        upconv::anticorrelated_jsa(s.config.source).difference_center_ghz);
    summary["expected_beat_period_ps"] = fd != 0.0 ? 1.0 / std::abs(fd) : 0.0;
    text = "generator: joint\nminima found: " + std::to_string(minima.size()) +
           "\nbeat period: " + format_double(period) + " ps\n";
  } else {
    // Recover the implied dip parameters by fitting the curve itself.
    const upconv::FitResult fit = upconv::fit_dip(curve.delays_ps, curve.values);
    summary["generator"] =
        s.analytic.generator == upconv::AnalyticGenerator::model ? "model" : "separable";
    summary["visibility"] = fit.visibility;
    summary["sigma_ps"] = fit.sigma_ps;
    summary["baseline"] = fit.baseline;
    summary["converged"] = fit.converged;
    char buf[160];
    std::snprintf(buf, sizeof buf, "V = %.6f\nsigma = %.6f ps\nbaseline = %.6g\n",
                  fit.visibility, fit.sigma_ps, fit.baseline);
    text = buf;
  }
  write_file(s.output_prefix + "_summary.json", summary.dump(2) + "\n");
  write_file(s.output_prefix + "_summary.txt", text);
  std::cout << text;
  return kExitOk;
}

int cmd_simulate(const CommonOptions& opt) {
  const upconv::Scenario s = load_with_overrides(opt);
  upconv::DipCurve curve;
  try {
    curve = upconv::run_experiment(s.config, opt.threads);
  } catch (const upconv::PulseCapExhausted& e) {
    // Keep whatever completed; the exit code flags the truncation.
    write_file(s.output_prefix + "_dip.partial.csv", e.partial.to_csv());
    std::cerr << "upconv simulate: " << e.what() << "\n"
              << "partial data written to " << s.output_prefix << "_dip.partial.csv\n";
    return kExitRuntime;
  }

  write_file(s.output_prefix + "_dip.csv", curve.to_csv());

  json run;
  run["config_digest"] = curve.config_digest;
  run["n_points"] = curve.points.size();
  run["n_start_pulses"] = s.config.n_start_pulses;
  run["config"] = json::parse(upconv::config_to_json(s.config));
  write_file(s.output_prefix + "_run.json", run.dump(2) + "\n");

  std::cout << "wrote " << s.output_prefix << "_dip.csv (" << curve.points.size()
            << " points, digest " << curve.config_digest << ")\n";
  return kExitOk;
}

json fit_to_json(const upconv::FitResult& fit) {
  json j;
  j["baseline"] = fit.baseline;
  j["baseline_stderr"] = fit.baseline_stderr;
  j["visibility"] = fit.visibility;
  j["visibility_stderr"] = fit.visibility_stderr;
  j["sigma_ps"] = fit.sigma_ps;
  j["sigma_stderr"] = fit.sigma_stderr;
  j["chi2_reduced"] = fit.chi2_reduced;
  j["n_iterations"] = fit.n_iterations;
  j["converged"] = fit.converged;
  j["visibility_out_of_range"] = fit.visibility_out_of_range;
  j["degenerate"] = fit.degenerate;
  j["centering_warning"] = fit.centering_warning;
  j["covariance"] = fit.covariance;
  return j;
}

std::string fit_to_text(const upconv::FitResult& fit) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "C     = %.6g +- %.3g counts\n"
                "V     = %.4f +- %.4f\n"
                "sigma = %.4f +- %.4f ps\n"
                "chi2/dof = %.4f, iterations = %d, converged = %s\n",
                fit.baseline, fit.baseline_stderr, fit.visibility, fit.visibility_stderr,
                fit.sigma_ps, fit.sigma_stderr, fit.chi2_reduced, fit.n_iterations,
                fit.converged ? "yes" : "no");
  std::string text = buf;
  if (fit.degenerate) text += "note: flat curve; visibility consistent with zero\n";
  if (fit.visibility_out_of_range) text += "note: fitted visibility outside [0, 1.05]\n";
  if (fit.centering_warning)
    text +=
        "warning: dip minimum is not centered on delay 0; the model has no "
        "center parameter\n";
  return text;
}

// Accepts both CSV schemas: raw counts (delay_ps,coincidences,starts) and
// analytic probabilities (delay_ps,probability).
void load_fit_input(const std::string& csv_path, std::vector<double>& delays,
                    std::vector<double>& values) {
  std::ifstream in(csv_path);
  if (!in) throw upconv::CsvError("cannot open '" + csv_path + "'", 0);
  std::string header;
  std::getline(in, header);
  if (header == "delay_ps,coincidences,starts") {
    in.seekg(0);
    const upconv::DipCurve curve = upconv::DipCurve::from_csv(in);
    delays = curve.delays();
    values = curve.counts();
    return;
  }
  if (header != "delay_ps,probability")
    throw upconv::CsvError("unrecognized header '" + header + "' (line 1)", 1);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double d = 0.0, p = 0.0;
    char extra;
    if (std::sscanf(line.c_str(), "%lf,%lf %c", &d, &p, &extra) != 2)
      throw upconv::CsvError(
          "malformed row '" + line + "' (line " + std::to_string(line_no) + ")",
          line_no);
    delays.push_back(d);
    values.push_back(p);
  }
}

int cmd_fit(const std::string& csv_path, const std::string& out_prefix) {
  std::vector<double> delays, counts;
  load_fit_input(csv_path, delays, counts);
  const upconv::FitResult fit = upconv::fit_dip(delays, counts);

  const std::string prefix = out_prefix.empty() ? "upconv_fit" : out_prefix;
  write_file(prefix + "_fit.json", fit_to_json(fit).dump(2) + "\n");
  const std::string text = fit_to_text(fit);
  write_file(prefix + "_fit.txt", text);
  std::cout << text;
  return fit.converged ? kExitOk : kExitRuntime;
}

json budget_to_json(const upconv::VisibilityBudget& b) {
  json j;
  j["interfering"] = b.interfering;
  j["multi_pair"] = b.multi_pair;
  j["raman_involved"] = b.raman_involved;
  j["dark_involved"] = b.dark_involved;
  j["baseline_total"] = b.baseline_total;
  j["dip_total"] = b.dip_total;
  j["predicted_visibility"] = b.predicted_visibility;
  j["dip_floor_ratio"] = b.dip_floor_ratio;
  j["start_click_probability"] = b.start_click_probability;
  j["expected_baseline_counts"] = b.expected_baseline_counts;
  j["truncation_error"] = b.truncation_error;
  j["truncation_warning"] = b.truncation_warning;
  return j;
}

std::string budget_to_text(const upconv::VisibilityBudget& b) {
  char buf[1024];
  const double t = b.baseline_total > 0.0 ? b.baseline_total : 1.0;
  std::snprintf(buf, sizeof buf,
                "baseline coincidence probability per pulse: %.6g\n"
                "  interfering pairs   : %.6g  (%5.1f%%)\n"
                "  multi-pair          : %.6g  (%5.1f%%)\n"
                "  Raman-involved      : %.6g  (%5.1f%%)\n"
                "  dark/noise-involved : %.6g  (%5.1f%%)\n"
                "dip coincidence probability: %.6g\n"
                "predicted visibility : %.4f\n"
                "dip floor ratio      : %.4f\n"
                "start click probability per pulse: %.6g\n"
                "expected baseline counts per point: %.1f\n"
                "enumeration truncation: %.3g%s\n",
                b.baseline_total, b.interfering, 100.0 * b.interfering / t, b.multi_pair,
                100.0 * b.multi_pair / t, b.raman_involved, 100.0 * b.raman_involved / t,
                b.dark_involved, 100.0 * b.dark_involved / t, b.dip_total,
                b.predicted_visibility, b.dip_floor_ratio, b.start_click_probability,
                b.expected_baseline_counts, b.truncation_error,
                b.truncation_warning ? " (above 1e-4: interpret with care)" : "");
  return buf;
}

int cmd_budget(const CommonOptions& opt) {
  const upconv::Scenario s = load_with_overrides(opt);
  const upconv::VisibilityBudget b = upconv::visibility_budget(s.config);
  write_file(s.output_prefix + "_budget.json", budget_to_json(b).dump(2) + "\n");
  const std::string text = budget_to_text(b);
  write_file(s.output_prefix + "_budget.txt", text);
  std::cout << text;
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opt) {
  const upconv::Scenario s = load_with_overrides(opt);
  if (s.sweep.values.empty())
    throw upconv::ScenarioError("sweep requires a non-empty value list", "sweep.values");
  // Validate the path before burning time on simulations.
  {
    upconv::ExperimentConfig probe = s.config;
    upconv::apply_sweep_value(probe, s.sweep.parameter, s.sweep.values.front());
  }

  std::string csv =
      "value,visibility,visibility_stderr,sigma_ps,sigma_stderr,baseline,"
      "predicted_visibility\n";
  json rows = json::array();
  for (double value : s.sweep.values) {
    upconv::ExperimentConfig config = s.config;
    upconv::apply_sweep_value(config, s.sweep.parameter, value);
    const upconv::VisibilityBudget budget = upconv::visibility_budget(config);
    const upconv::DipCurve curve = upconv::run_experiment(config, opt.threads);
    const auto delays = curve.delays();
    const auto counts = curve.counts();
    const upconv::FitResult fit = upconv::fit_dip(delays, counts);

    csv += format_double(value) + "," + format_double(fit.visibility) + "," +
           format_double(fit.visibility_stderr) + "," + format_double(fit.sigma_ps) +
           "," + format_double(fit.sigma_stderr) + "," + format_double(fit.baseline) +
           "," + format_double(budget.predicted_visibility) + "\n";
    json row;
    row["value"] = value;
    row["fit"] = fit_to_json(fit);
    row["budget"] = budget_to_json(budget);
    rows.push_back(row);
    std::printf("%s = %-10g V = %.4f +- %.4f   budget V = %.4f\n",
                s.sweep.parameter.c_str(), value, fit.visibility, fit.visibility_stderr,
                budget.predicted_visibility);
  }
  write_file(s.output_prefix + "_sweep.csv", csv);
  json out;
  out["parameter"] = s.sweep.parameter;
  out["rows"] = rows;
  write_file(s.output_prefix + "_sweep.json", out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-pair up-conversion interference simulator"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string fit_csv;

  auto add_common = [&](CLI::App* cmd, bool with_sim_flags) {
    cmd->add_option("scenario", opt.scenario_path,
                    "scenario JSON file, or 'paper_default'")
        ->required();
    cmd->add_option("--out", opt.out_prefix, "output file prefix");
    cmd->add_option("--seed", opt.seed, "override the scenario RNG seed");
    if (with_sim_flags) {
      cmd->add_option("--threads", opt.threads,
                      "worker threads (affects speed only, never results)");
      cmd->add_option("--pulse-cap", opt.pulse_cap, "maximum pulses per delay point");
    }
  };

  CLI::App* analytic = app.add_subcommand("analytic", "analytic dip/beating curve");
  add_common(analytic, false);
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo coincidence run");
  add_common(simulate, true);
  CLI::App* fit = app.add_subcommand("fit", "fit a coincidence CSV");
  fit->add_option("curve", fit_csv, "CSV with header delay_ps,coincidences,starts")
      ->required();
  fit->add_option("--out", opt.out_prefix, "output file prefix");
  CLI::App* budget = app.add_subcommand("budget", "analytic visibility decomposition");
  add_common(budget, false);
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep with fits and budget");
  add_common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitSchema;
  }

  try {
    if (app.got_subcommand(analytic)) return cmd_analytic(opt);
    if (app.got_subcommand(simulate)) return cmd_simulate(opt);
    if (app.got_subcommand(fit)) return cmd_fit(fit_csv, opt.out_prefix);
    if (app.got_subcommand(budget)) return cmd_budget(opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(opt);
  } catch (const upconv::ScenarioError& e) {
    std::cerr << "upconv: scenario error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const upconv::CsvError& e) {
    std::cerr << "upconv: CSV error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "upconv: invalid input: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "upconv: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
