#include <benchmark/benchmark.h>

#include <vector>

#include "upconv/fit.hpp"
#include "upconv/hom.hpp"
#include "upconv/montecarlo.hpp"
#include "upconv/pair_source.hpp"
#include "upconv/rng.hpp"
#include "upconv/scenario.hpp"
#include "upconv/wavepacket.hpp"

namespace {

void BM_ModeOverlapClosedForm(benchmark::State& state) {
  const upconv::SpectralWavepacket wp{420.153, 25.0, 0.0, 1.0};
  double tau = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(upconv::mode_overlap(wp, wp, tau).magnitude);
    tau += 1e-3;
  }
}
BENCHMARK(BM_ModeOverlapClosedForm);

void BM_ModeOverlapQuadrature(benchmark::State& state) {
  // unequal bandwidths force the integration path
  const upconv::SpectralWavepacket a{420.153, 25.0, 0.0, 1.0};
  const upconv::SpectralWavepacket b{420.153, 30.0, 0.0, 1.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(upconv::mode_overlap(a, b, 5.0).magnitude);
}
BENCHMARK(BM_ModeOverlapQuadrature);

void BM_JointCoincidence(benchmark::State& state) {
  const upconv::JointSpectralAmplitude jsa =
      upconv::anticorrelated_jsa(upconv::SourceSpec{});
  upconv::JointQuadratureOptions opt;
  opt.grid_points = static_cast<std::size_t>(state.range(0));
  opt.max_grid_points = opt.grid_points;
  opt.richardson_tol = 1.0;  // time the raw grid, not the refinement
  double tau = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(upconv::coincidence_probability_joint(jsa, tau, opt));
    tau += 1e-2;
  }
}
BENCHMARK(BM_JointCoincidence)->Arg(256)->Arg(512)->Arg(1024);

void BM_SimulatePulse(benchmark::State& state) {
  const upconv::ExperimentConfig config = upconv::load_scenario("paper_default").config;
  const upconv::PulseModel model(config);
  upconv::RngStream rng(17);
  for (auto _ : state) {
    const upconv::PulseClicks clicks = model.simulate_pulse(0.0, rng);
    benchmark::DoNotOptimize(clicks.detector1);
  }
}
BENCHMARK(BM_SimulatePulse);

void BM_RunExperimentPoint(benchmark::State& state) {
  upconv::ExperimentConfig config = upconv::load_scenario("paper_default").config;
  config.n_start_pulses = 500;
  config.delays_ps = {0.0};
  for (auto _ : state) {
    const upconv::DipCurve curve = upconv::run_experiment(config, 1);
    benchmark::DoNotOptimize(curve.points[0].coincidences);
    config.rng_seed += 1;
  }
}
BENCHMARK(BM_RunExperimentPoint)->Unit(benchmark::kMillisecond);

void BM_FitDip(benchmark::State& state) {
  const upconv::DipModel truth{300.0, 0.732, 9.5};
  std::vector<double> delays, counts;
  upconv::RngStream rng(5);
  for (int i = -10; i <= 10; ++i) {
    delays.push_back(4.0 * i);
    counts.push_back(
        static_cast<double>(rng.poisson(upconv::eval_dip_model(truth, 4.0 * i))));
  }
  for (auto _ : state) {
    const upconv::FitResult fit = upconv::fit_dip(delays, counts);
    benchmark::DoNotOptimize(fit.visibility);
  }
}
BENCHMARK(BM_FitDip);

void BM_VisibilityBudget(benchmark::State& state) {
  const upconv::ExperimentConfig config = upconv::load_scenario("paper_default").config;
  for (auto _ : state)
    benchmark::DoNotOptimize(upconv::visibility_budget(config).predicted_visibility);
}
BENCHMARK(BM_VisibilityBudget);

}  // namespace

BENCHMARK_MAIN();
