#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "upconv/dip_curve.hpp"
#include "upconv/pair_source.hpp"
#include "upconv/rng.hpp"
#include "upconv/sfg_converter.hpp"

namespace upconv {

struct DetectorSpec {
  double efficiency = 0.6;
  double dark_rate_cps = 100.0;

  void validate() const;
};

struct TiaSpec {
  double coincidence_window_ns = 1.0;
  int start_detector = 1;  // 1 or 2

  void validate() const;
};

/// Full end-to-end scenario: source, the two up-converters, the coupler
/// detectors, the timing analyzer and the run length.
struct ExperimentConfig {
  SourceSpec source;
  ConverterSpec converter_signal;
  ConverterSpec converter_idler;
  std::array<DetectorSpec, 2> detectors;
  TiaSpec tia;
  double repetition_rate_mhz = 100.0;
  std::uint64_t n_start_pulses = 500000;
  std::vector<double> delays_ps;
  std::uint64_t rng_seed = 1;
  double distinguishability_overlap = 1.0;  // residual non-spectral overlap
  std::uint64_t pulse_cap_per_point = 10'000'000'000ull;

  void validate() const;

  /// FNV-1a digest of the canonical field rendering; identifies the run in
  /// serialized outputs.
  std::string digest() const;
};

struct PulseClicks {
  bool detector1 = false;
  bool detector2 = false;
};

/// Per-pulse physics shared by the one-shot sampler and the batch runner:
/// converter survival, the converted-photon overlap, and the per-pulse
/// dark/noise click probabilities.
class PulseModel {
 public:
  explicit PulseModel(const ExperimentConfig& config);

  /// Routes an emission's surviving photons through the coupler and the
  /// detectors.  Dark and converter-noise clicks are not included.
  PulseClicks route_and_detect(const PulseEmission& emission, double delay_ps,
                               RngStream& rng) const;

  /// One full pulse: emission draw, routing, detection, dark/noise clicks.
  PulseClicks simulate_pulse(double delay_ps, RngStream& rng) const;

  double survival_signal() const { return survival_signal_; }
  double survival_idler() const { return survival_idler_; }
  /// Squared mode overlap of the two converted photons at the given
  /// relative delay.
  double converted_overlap_sq(double tau_ps) const;
  /// Gaussian decay scale of the squared overlap in the delay.
  double overlap_decay_sigma_ps() const { return overlap_sigma_ps_; }
  double dark_click_probability(int detector) const {
    return detector == 1 ? dark_prob_1_ : dark_prob_2_;
  }
  /// Probability that a pulse produces no emission, no dark click and no
  /// noise click at all.
  double quiet_pulse_probability() const { return quiet_prob_; }

  const ExperimentConfig& config() const { return config_; }

 private:
  friend struct EventfulPulseSampler;

  ExperimentConfig config_;
  double survival_signal_ = 0.0;
  double survival_idler_ = 0.0;
  double overlap_peak_sq_ = 0.0;   // |M(0)|^2 of the converted photons
  double overlap_sigma_ps_ = 1.0;  // Gaussian decay scale of |M(tau)|^2
  double xi_sq_ = 1.0;
  double dark_prob_1_ = 0.0;  // per pulse, intrinsic dark + converter noise
  double dark_prob_2_ = 0.0;
  double quiet_prob_ = 1.0;
};

/// Draws one pump pulse and reports which detectors clicked.
PulseClicks simulate_pulse(const ExperimentConfig& config, double delay_ps,
                           RngStream& rng);

/// Thrown when a delay point exhausts the pulse cap before reaching the
/// requested number of start clicks.
struct PulseCapExhausted : std::runtime_error {
  PulseCapExhausted(const std::string& msg, DipCurve partial_curve)
      : std::runtime_error(msg), partial(std::move(partial_curve)) {}
  DipCurve partial;
};

/// For each delay, accumulates pulses until the start detector has
/// registered n_start_pulses clicks; coincidences are same-pulse
/// click1-and-click2 events.  Identical (config, seed) produce identical
/// curves for any thread count.
DipCurve run_experiment(const ExperimentConfig& config, int n_threads = 0);

/// Analytic decomposition of the coincidence floor by exhaustive
/// enumeration of emission and survival outcomes up to three photons per
/// channel.
struct VisibilityBudget {
  // Baseline (far-delay) coincidence probability per pulse, by origin.
  double interfering = 0.0;     // lone conjugate pair, photon-photon
  double multi_pair = 0.0;      // photon-photon without Raman involvement
  double raman_involved = 0.0;  // photon-photon with a Raman survivor
  double dark_involved = 0.0;   // at least one click from dark/noise
  double baseline_total = 0.0;
  double dip_total = 0.0;  // coincidence probability at zero delay
  double predicted_visibility = 0.0;
  double dip_floor_ratio = 0.0;  // dip_total / baseline_total
  double start_click_probability = 0.0;
  double expected_baseline_counts = 0.0;  // per n_start_pulses at far delay
  double truncation_error = 0.0;          // probability mass left out
  bool truncation_warning = false;        // truncation_error > 1e-4
};

VisibilityBudget visibility_budget(const ExperimentConfig& config);

}  // namespace upconv
