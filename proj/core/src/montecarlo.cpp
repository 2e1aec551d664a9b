#include "upconv/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "upconv/units.hpp"

namespace upconv {

namespace {

void hash_append(std::uint64_t& h, const char* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;  // FNV-1a prime
  }
}

void hash_value(std::uint64_t& h, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g;", v);
  hash_append(h, buf, static_cast<std::size_t>(n));
}

void hash_value(std::uint64_t& h, std::uint64_t v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%llu;", static_cast<unsigned long long>(v));
  hash_append(h, buf, static_cast<std::size_t>(n));
}

}  // namespace

void DetectorSpec::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0))
    throw std::domain_error("DetectorSpec: efficiency must be in [0,1]");
  if (!(dark_rate_cps >= 0.0))
    throw std::domain_error("DetectorSpec: dark_rate must be >= 0");
}

void TiaSpec::validate() const {
  if (!(coincidence_window_ns > 0.0))
    throw std::domain_error("TiaSpec: coincidence_window must be > 0");
  if (start_detector != 1 && start_detector != 2)
    throw std::domain_error("TiaSpec: start_detector must be 1 or 2");
}

void ExperimentConfig::validate() const {
  source.validate();
  converter_signal.validate();
  converter_idler.validate();
  detectors[0].validate();
  detectors[1].validate();
  tia.validate();
  if (!(repetition_rate_mhz > 0.0))
    throw std::domain_error("ExperimentConfig: repetition_rate must be > 0");
  if (n_start_pulses == 0)
    throw std::domain_error("ExperimentConfig: n_start_pulses must be > 0");
  if (delays_ps.empty())
    throw std::domain_error("ExperimentConfig: delays must not be empty");
  for (std::size_t i = 1; i < delays_ps.size(); ++i)
    if (!(delays_ps[i] > delays_ps[i - 1]))
      throw std::domain_error("ExperimentConfig: delays must be strictly increasing");
  if (!(distinguishability_overlap >= 0.0 && distinguishability_overlap <= 1.0))
    throw std::domain_error("ExperimentConfig: distinguishability_overlap in [0,1]");
}

std::string ExperimentConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a offset basis
  hash_value(h, source.pump_wavelength_nm);
  hash_value(h, source.pump_pulse_fwhm_ps);
  hash_value(h, source.mean_pairs_per_pulse);
  hash_value(h, source.signal_center_thz);
  hash_value(h, source.idler_center_thz);
  hash_value(h, source.channel_fwhm_ghz);
  hash_value(h, source.raman_mean_signal);
  hash_value(h, source.raman_mean_idler);
  hash_value(h, source.timing_jitter_sigma_ps);
  hash_value(h, static_cast<std::uint64_t>(source.pair_statistics));
  for (const ConverterSpec* c : {&converter_signal, &converter_idler}) {
    hash_value(h, c->pump_frequency_thz);
    hash_value(h, c->peak_efficiency);
    hash_value(h, c->response_center_thz);
    hash_value(h, c->response_fwhm_ghz);
    hash_value(h, c->noise_rate_cps);
    hash_value(h, c->ripple_amplitude);
    hash_value(h, c->ripple_period_ghz);
  }
  for (const auto& d : detectors) {
    hash_value(h, d.efficiency);
    hash_value(h, d.dark_rate_cps);
  }
  hash_value(h, tia.coincidence_window_ns);
  hash_value(h, static_cast<std::uint64_t>(tia.start_detector));
  hash_value(h, repetition_rate_mhz);
  hash_value(h, n_start_pulses);
  for (double d : delays_ps) hash_value(h, d);
  hash_value(h, rng_seed);
  hash_value(h, distinguishability_overlap);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PulseModel::PulseModel(const ExperimentConfig& config) : config_(config) {
  config.validate();
  const auto [signal_wp, idler_wp] = emitted_wavepackets(config.source);
  const ConversionResult out_s = convert_wavepacket(config.converter_signal, signal_wp);
  const ConversionResult out_i = convert_wavepacket(config.converter_idler, idler_wp);
  survival_signal_ = out_s.survival_probability;
  survival_idler_ = out_i.survival_probability;

  // Gaussian-pair overlap of the converted photons:
  // |M(tau)|^2 = A exp(-tau^2 / 2 s_m^2).
  const double s1 = out_s.output.sigma_nu_thz();
  const double s2 = out_i.output.sigma_nu_thz();
  const double dc =
      out_i.output.center_frequency_thz - out_s.output.center_frequency_thz;
  const double ss = s1 * s1 + s2 * s2;
  overlap_peak_sq_ = 2.0 * s1 * s2 / ss * std::exp(-dc * dc / (2.0 * ss));
  overlap_sigma_ps_ = std::sqrt(ss / (16.0 * std::numbers::pi * std::numbers::pi *
                                      s1 * s1 * s2 * s2));

  xi_sq_ = config.distinguishability_overlap * config.distinguishability_overlap;

  const double conv_noise_each =
      0.5 * (config.converter_signal.noise_rate_cps + config.converter_idler.noise_rate_cps);
  dark_prob_1_ = units::cps_to_per_pulse(
      config.detectors[0].dark_rate_cps + conv_noise_each, config.repetition_rate_mhz);
  dark_prob_2_ = units::cps_to_per_pulse(
      config.detectors[1].dark_rate_cps + conv_noise_each, config.repetition_rate_mhz);

  const double p0_pairs =
      config.source.pair_statistics == PairStatistics::thermal
          ? 1.0 / (1.0 + config.source.mean_pairs_per_pulse)
          : std::exp(-config.source.mean_pairs_per_pulse);
  quiet_prob_ = p0_pairs * std::exp(-config.source.raman_mean_signal) *
                std::exp(-config.source.raman_mean_idler) * (1.0 - dark_prob_1_) *
                (1.0 - dark_prob_2_);
}

double PulseModel::converted_overlap_sq(double tau_ps) const {
  const double z = tau_ps / overlap_sigma_ps_;
  return std::min(1.0, overlap_peak_sq_ * std::exp(-0.5 * z * z));
}

PulseClicks PulseModel::route_and_detect(const PulseEmission& emission, double delay_ps,
                                         RngStream& rng) const {
  int pair_signal = 0, pair_idler = 0, conjugate = 0;
  for (int j = 0; j < emission.n_pairs; ++j) {
    const bool s = rng.bernoulli(survival_signal_);
    const bool i = rng.bernoulli(survival_idler_);
    pair_signal += s;
    pair_idler += i;
    conjugate += (s && i);
  }
  int raman_signal = 0, raman_idler = 0;
  for (int j = 0; j < emission.n_raman_signal; ++j)
    raman_signal += rng.bernoulli(survival_signal_);
  for (int j = 0; j < emission.n_raman_idler; ++j)
    raman_idler += rng.bernoulli(survival_idler_);

  const int k_signal = pair_signal + raman_signal;
  const int k_idler = pair_idler + raman_idler;
  if (k_signal + k_idler == 0) return {};

  const double e1 = config_.detectors[0].efficiency;
  const double e2 = config_.detectors[1].efficiency;
  PulseClicks clicks;

  if (k_signal == 1 && k_idler == 1 && conjugate == 1) {
    // A lone conjugate pair interferes; the delay is applied to the idler
    // arm, so jitter enters as the offset difference.
    const double tau_eff =
        delay_ps + emission.jitter_offset_idler_ps - emission.jitter_offset_signal_ps;
    const double m2 = xi_sq_ * converted_overlap_sq(tau_eff);
    if (rng.bernoulli(0.5 * (1.0 + m2))) {
      // bunched: both photons leave through the same port
      if (rng.bernoulli(0.5)) {
        clicks.detector1 = rng.bernoulli(e1) || rng.bernoulli(e1);
      } else {
        clicks.detector2 = rng.bernoulli(e2) || rng.bernoulli(e2);
      }
    } else {
      clicks.detector1 = rng.bernoulli(e1);
      clicks.detector2 = rng.bernoulli(e2);
    }
    return clicks;
  }

  // Any other pattern routes classically: Raman photons and photons from
  // different pairs carry no mutual temporal correlation, and 3+ photon
  // interference corrections are below the statistical floor.
  for (int j = 0; j < k_signal + k_idler; ++j) {
    if (rng.bernoulli(0.5)) {
      if (rng.bernoulli(e1)) clicks.detector1 = true;
    } else {
      if (rng.bernoulli(e2)) clicks.detector2 = true;
    }
  }
  return clicks;
}

PulseClicks PulseModel::simulate_pulse(double delay_ps, RngStream& rng) const {
  const PulseEmission emission = sample_emission(config_.source, rng);
  PulseClicks clicks = route_and_detect(emission, delay_ps, rng);
  clicks.detector1 = clicks.detector1 || rng.bernoulli(dark_prob_1_);
  clicks.detector2 = clicks.detector2 || rng.bernoulli(dark_prob_2_);
  return clicks;
}

PulseClicks simulate_pulse(const ExperimentConfig& config, double delay_ps,
                           RngStream& rng) {
  return PulseModel(config).simulate_pulse(delay_ps, rng);
}

// Draws the content of a pulse conditioned on it not being quiet, split by
// the first non-zero component so no rejection loop is needed.
struct EventfulPulseSampler {
  explicit EventfulPulseSampler(const PulseModel& model)
      : source(model.config().source),
        thermal_pairs(source.pair_statistics == PairStatistics::thermal),
        q1(model.dark_prob_1_),
        q2(model.dark_prob_2_) {
    const double mu = source.mean_pairs_per_pulse;
    p0_pairs = thermal_pairs ? 1.0 / (1.0 + mu) : std::exp(-mu);
    p0_rs = std::exp(-source.raman_mean_signal);
    p0_ri = std::exp(-source.raman_mean_idler);
    const double dark_any = 1.0 - (1.0 - q1) * (1.0 - q2);
    a1 = 1.0 - p0_pairs;
    a2 = p0_pairs * (1.0 - p0_rs);
    a3 = p0_pairs * p0_rs * (1.0 - p0_ri);
    a4 = p0_pairs * p0_rs * p0_ri * dark_any;
    p_event = a1 + a2 + a3 + a4;
  }

  struct Draw {
    PulseEmission emission;
    bool dark1 = false;
    bool dark2 = false;
  };

  Draw sample(RngStream& rng) const {
    Draw d;
    const double u = rng.uniform() * p_event;
    if (u < a1) {
      d.emission.n_pairs = thermal_pairs
                               ? rng.thermal_at_least_one(source.mean_pairs_per_pulse)
                               : rng.poisson_at_least_one(source.mean_pairs_per_pulse);
      d.emission.n_raman_signal = rng.poisson(source.raman_mean_signal);
      d.emission.n_raman_idler = rng.poisson(source.raman_mean_idler);
      d.dark1 = rng.bernoulli(q1);
      d.dark2 = rng.bernoulli(q2);
    } else if (u < a1 + a2) {
      d.emission.n_raman_signal = rng.poisson_at_least_one(source.raman_mean_signal);
      d.emission.n_raman_idler = rng.poisson(source.raman_mean_idler);
      d.dark1 = rng.bernoulli(q1);
      d.dark2 = rng.bernoulli(q2);
    } else if (u < a1 + a2 + a3) {
      d.emission.n_raman_idler = rng.poisson_at_least_one(source.raman_mean_idler);
      d.dark1 = rng.bernoulli(q1);
      d.dark2 = rng.bernoulli(q2);
    } else {
      // dark-only pulse: at least one of the two noise processes fired
      const double w10 = q1 * (1.0 - q2);
      const double w01 = (1.0 - q1) * q2;
      const double w11 = q1 * q2;
      const double v = rng.uniform() * (w10 + w01 + w11);
      d.dark1 = v < w10 || v >= w10 + w01;
      d.dark2 = v >= w10;
      return d;
    }
    if (source.timing_jitter_sigma_ps > 0.0 &&
        d.emission.n_pairs + d.emission.n_raman_signal + d.emission.n_raman_idler > 0) {
      d.emission.jitter_offset_signal_ps = rng.normal(source.timing_jitter_sigma_ps);
      d.emission.jitter_offset_idler_ps = rng.normal(source.timing_jitter_sigma_ps);
    }
    return d;
  }

  const SourceSpec& source;
  bool thermal_pairs;
  double q1, q2;
  double p0_pairs, p0_rs, p0_ri;
  double a1, a2, a3, a4;
  double p_event;
};

namespace {

struct BatchResult {
  std::uint64_t starts = 0;
  std::uint64_t coincidences = 0;
  bool reached_start_limit = false;
};

constexpr std::uint64_t kBatchPulses = 1ull << 16;

// Simulates one fixed-size batch of pulses, skipping quiet stretches with
// geometric draws (memorylessness makes truncation at the batch edge
// exact).  Re-running with the same stream replays the batch bit for bit.
BatchResult run_batch(const PulseModel& model, const EventfulPulseSampler& sampler,
                      double delay_ps, RngStream rng, std::uint64_t start_limit) {
  BatchResult out;
  const double p_quiet = model.quiet_pulse_probability();
  if (p_quiet >= 1.0) return out;
  const int start_det = model.config().tia.start_detector;

  std::uint64_t pulse = 0;
  while (pulse < kBatchPulses) {
    const std::uint64_t skip = rng.geometric_skips(p_quiet);
    if (skip >= kBatchPulses - pulse) break;
    pulse += skip;

    const EventfulPulseSampler::Draw d = sampler.sample(rng);
    PulseClicks clicks;
    if (d.emission.n_pairs + d.emission.n_raman_signal + d.emission.n_raman_idler > 0)
      clicks = model.route_and_detect(d.emission, delay_ps, rng);
    clicks.detector1 = clicks.detector1 || d.dark1;
    clicks.detector2 = clicks.detector2 || d.dark2;

    const bool start = start_det == 1 ? clicks.detector1 : clicks.detector2;
    if (start) {
      ++out.starts;
      if (clicks.detector1 && clicks.detector2) ++out.coincidences;
      if (out.starts >= start_limit) {
        out.reached_start_limit = true;
        return out;
      }
    }
    ++pulse;
  }
  return out;
}

DipPoint run_delay_point(const PulseModel& model, const EventfulPulseSampler& sampler,
                         double delay_ps, std::uint64_t delay_index) {
  const ExperimentConfig& config = model.config();
  DipPoint point;
  point.delay_ps = delay_ps;

  std::uint64_t starts = 0, coincidences = 0, pulses = 0;
  for (std::uint64_t batch = 0;; ++batch) {
    RngStream stream = RngStream::derive(config.rng_seed, delay_index + 1, batch + 1);
    const BatchResult full =
        run_batch(model, sampler, delay_ps, stream, /*start_limit=*/UINT64_MAX);
    if (starts + full.starts >= config.n_start_pulses) {
      // Replay the boundary batch up to the exact start click that
      // completes the run.
      RngStream replay = RngStream::derive(config.rng_seed, delay_index + 1, batch + 1);
      const BatchResult partial = run_batch(model, sampler, delay_ps, replay,
                                            config.n_start_pulses - starts);
      starts += partial.starts;
      coincidences += partial.coincidences;
      break;
    }
    starts += full.starts;
    coincidences += full.coincidences;
    pulses += kBatchPulses;
    if (pulses >= config.pulse_cap_per_point) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "pulse cap %llu exhausted at delay %g ps with %llu of %llu starts",
                    static_cast<unsigned long long>(config.pulse_cap_per_point), delay_ps,
                    static_cast<unsigned long long>(starts),
                    static_cast<unsigned long long>(config.n_start_pulses));
      throw PulseCapExhausted(msg, DipCurve{});
    }
  }

  point.coincidences = coincidences;
  point.starts = starts;
  return point;
}

}  // namespace

DipCurve run_experiment(const ExperimentConfig& config, int n_threads) {
  config.validate();
  const PulseModel model(config);
  const EventfulPulseSampler sampler(model);

  if (n_threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n_threads = hw > 0 ? static_cast<int>(hw) : 1;
  }
  n_threads = std::min<int>(n_threads, static_cast<int>(config.delays_ps.size()));

  std::vector<DipPoint> points(config.delays_ps.size());
  std::vector<char> done(config.delays_ps.size(), 0);
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.delays_ps.size()) return;
      try {
        points[i] = run_delay_point(model, sampler, config.delays_ps[i],
                                    static_cast<std::uint64_t>(i));
        done[i] = 1;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const PulseCapExhausted& e) {
      DipCurve partial;
      partial.config_digest = config.digest();
      for (std::size_t i = 0; i < points.size(); ++i)
        if (done[i]) partial.points.push_back(points[i]);
      throw PulseCapExhausted(e.what(), std::move(partial));
    }
  }

  DipCurve curve;
  curve.config_digest = config.digest();
  curve.points = std::move(points);
  curve.validate();
  return curve;
}

}  // namespace upconv
