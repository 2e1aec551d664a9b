#include <array>
#include <cmath>
#include <numbers>

#include "upconv/montecarlo.hpp"
#include "upconv/units.hpp"

namespace upconv {

namespace {

double poisson_pmf(int n, double mean) {
  if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
  double p = std::exp(-mean);
  for (int k = 1; k <= n; ++k) p *= mean / k;
  return p;
}

double thermal_pmf(int n, double mean) {
  if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
  const double r = mean / (1.0 + mean);
  double p = 1.0 / (1.0 + mean);
  for (int k = 0; k < n; ++k) p *= r;
  return p;
}

double binomial_pmf(int k, int n, double p) {
  static constexpr std::array<double, 4> fact{1.0, 1.0, 2.0, 6.0};
  const double comb = fact[n] / (fact[k] * fact[n - k]);
  return comb * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

struct ClickCells {
  double both_photon;   // photon-caused click on both detectors
  double only1;         // photon click on 1 only
  double only2;
  double neither;
};

// Joint photon-click cells for k independently routed photons.
ClickCells classical_cells(int k, double e1, double e2) {
  const double pn1 = std::pow(1.0 - 0.5 * e1, k);
  const double pn2 = std::pow(1.0 - 0.5 * e2, k);
  const double pn12 = std::pow(1.0 - 0.5 * e1 - 0.5 * e2, k);
  return {1.0 - pn1 - pn2 + pn12, pn2 - pn12, pn1 - pn12, pn12};
}

// Cells for the lone conjugate pair with squared overlap m2: bunched with
// probability (1+m2)/2, split otherwise.
ClickCells interfering_cells(double m2, double e1, double e2) {
  const double p_same = 0.5 * (1.0 + m2);
  const double t1 = 1.0 - e1, t2 = 1.0 - e2;
  const double pn1 = 0.5 * p_same * (t1 * t1 + 1.0) + (1.0 - p_same) * t1;
  const double pn2 = 0.5 * p_same * (1.0 + t2 * t2) + (1.0 - p_same) * t2;
  const double pn12 = 0.5 * p_same * (t1 * t1 + t2 * t2) + (1.0 - p_same) * t1 * t2;
  return {1.0 - pn1 - pn2 + pn12, pn2 - pn12, pn1 - pn12, pn12};
}

double coincidence_from_cells(const ClickCells& c, double q1, double q2) {
  return c.both_photon + c.only1 * q2 + c.only2 * q1 + c.neither * q1 * q2;
}

}  // namespace

VisibilityBudget visibility_budget(const ExperimentConfig& config) {
  config.validate();
  const PulseModel model(config);

  const double eta_s = model.survival_signal();
  const double eta_i = model.survival_idler();
  const double e1 = config.detectors[0].efficiency;
  const double e2 = config.detectors[1].efficiency;
  const double q1 = model.dark_click_probability(1);
  const double q2 = model.dark_click_probability(2);
  const double xi2 =
      config.distinguishability_overlap * config.distinguishability_overlap;

  // Jitter washes out the zero-delay overlap: tau_eff ~ N(0, 2 sigma_j^2)
  // and the expectation of the Gaussian overlap has a closed form.
  const double sm = model.overlap_decay_sigma_ps();
  const double sj = config.source.timing_jitter_sigma_ps;
  const double jitter_factor =
      sj > 0.0 ? sm / std::sqrt(sm * sm + 2.0 * sj * sj) : 1.0;
  const double m2_dip = xi2 * model.converted_overlap_sq(0.0) * jitter_factor;

  const bool thermal = config.source.pair_statistics == PairStatistics::thermal;
  const double mu = config.source.mean_pairs_per_pulse;
  const double rs = config.source.raman_mean_signal;
  const double ri = config.source.raman_mean_idler;

  VisibilityBudget out;
  double covered = 0.0;
  double p_start = 0.0;
  const int start_det = config.tia.start_detector;

  // Joint photon-number outcomes with at most 3 photons per channel.
  for (int p = 0; p <= 3; ++p) {
    const double pp = thermal ? thermal_pmf(p, mu) : poisson_pmf(p, mu);
    for (int nrs = 0; nrs + p <= 3; ++nrs) {
      const double prs = poisson_pmf(nrs, rs);
      for (int nri = 0; nri + p <= 3; ++nri) {
        const double pri = poisson_pmf(nri, ri);
        const double p_emit = pp * prs * pri;
        if (p_emit <= 0.0) continue;
        covered += p_emit;

        // Survival partitions of the pairs: both / signal-only /
        // idler-only / neither.
        for (int b = 0; b <= p; ++b)
          for (int so = 0; so + b <= p; ++so)
            for (int io = 0; io + b + so <= p; ++io) {
              const int none = p - b - so - io;
              static constexpr std::array<double, 4> fact{1.0, 1.0, 2.0, 6.0};
              const double ways =
                  fact[p] / (fact[b] * fact[so] * fact[io] * fact[none]);
              const double w_pairs =
                  ways * std::pow(eta_s * eta_i, b) *
                  std::pow(eta_s * (1.0 - eta_i), so) *
                  std::pow((1.0 - eta_s) * eta_i, io) *
                  std::pow((1.0 - eta_s) * (1.0 - eta_i), none);
              if (w_pairs <= 0.0) continue;

              for (int ks = 0; ks <= nrs; ++ks) {
                const double w_rs = binomial_pmf(ks, nrs, eta_s);
                for (int ki = 0; ki <= nri; ++ki) {
                  const double w_ri = binomial_pmf(ki, nri, eta_i);
                  const double p_pattern = p_emit * w_pairs * w_rs * w_ri;
                  if (p_pattern <= 0.0) continue;

                  const int k_signal = b + so + ks;
                  const int k_idler = b + io + ki;
                  const int k = k_signal + k_idler;
                  const bool interfering =
                      b == 1 && so == 0 && io == 0 && ks == 0 && ki == 0;

                  const ClickCells base_cells =
                      interfering ? interfering_cells(0.0, e1, e2)
                                  : classical_cells(k, e1, e2);
                  const double coinc_base =
                      coincidence_from_cells(base_cells, q1, q2);
                  const double coinc_dip =
                      interfering
                          ? coincidence_from_cells(interfering_cells(m2_dip, e1, e2),
                                                   q1, q2)
                          : coinc_base;

                  out.baseline_total += p_pattern * coinc_base;
                  out.dip_total += p_pattern * coinc_dip;
                  out.dark_involved +=
                      p_pattern * (coinc_base - base_cells.both_photon);
                  if (interfering)
                    out.interfering += p_pattern * base_cells.both_photon;
                  else if (ks + ki > 0)
                    out.raman_involved += p_pattern * base_cells.both_photon;
                  else
                    out.multi_pair += p_pattern * base_cells.both_photon;

                  const double pn_start = start_det == 1
                                              ? base_cells.neither + base_cells.only2
                                              : base_cells.neither + base_cells.only1;
                  const double q_start = start_det == 1 ? q1 : q2;
                  p_start += p_pattern * (1.0 - pn_start * (1.0 - q_start));
                }
              }
            }
      }
    }
  }

  out.truncation_error = std::max(0.0, 1.0 - covered);
  out.truncation_warning = out.truncation_error > 1e-4;
  out.start_click_probability = p_start;
  if (out.baseline_total > 0.0) {
    out.predicted_visibility = (out.baseline_total - out.dip_total) / out.baseline_total;
    out.dip_floor_ratio = out.dip_total / out.baseline_total;
  } else {
    out.predicted_visibility = 1.0;
    out.dip_floor_ratio = 0.0;
  }
  if (p_start > 0.0)
    out.expected_baseline_counts =
        static_cast<double>(config.n_start_pulses) * out.baseline_total / p_start;
  return out;
}

}  // namespace upconv
