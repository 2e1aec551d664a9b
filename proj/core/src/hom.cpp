#include "upconv/hom.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "upconv/units.hpp"

namespace upconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Grid {
  std::vector<double> x;
  std::vector<double> w;  // Simpson weights including h/3
};

Grid make_grid(double lo, double hi, std::size_t intervals) {
  Grid g;
  g.x.resize(intervals + 1);
  g.w.resize(intervals + 1);
  const double h = (hi - lo) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) {
    g.x[i] = lo + h * static_cast<double>(i);
    double w = (i == 0 || i == intervals) ? 1.0 : ((i & 1) ? 4.0 : 2.0);
    g.w[i] = w * h / 3.0;
  }
  return g;
}

// Exchange integral J(tau) for a separable state.  The tensor-product rule
// over a common grid collapses to |sum w h(nu) e^{i 2 pi nu tau}|^2 with
// h = phi1* phi2; normalized on the same grid.
double joint_exchange_separable(const JointSpectralAmplitude& jsa, double tau,
                                std::size_t intervals, double span_sigmas) {
  const double a1 = jsa.wp1.amplitude_sigma_thz();
  const double a2 = jsa.wp2.amplitude_sigma_thz();
  const double lo = std::min(jsa.wp1.center_frequency_thz - span_sigmas * a1,
                             jsa.wp2.center_frequency_thz - span_sigmas * a2);
  const double hi = std::max(jsa.wp1.center_frequency_thz + span_sigmas * a1,
                             jsa.wp2.center_frequency_thz + span_sigmas * a2);
  const Grid g = make_grid(lo, hi, intervals);

  std::complex<double> s{0.0, 0.0};
  double n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const std::complex<double> p1 = jsa.wp1.amplitude(g.x[i]);
    const std::complex<double> p2 = jsa.wp2.amplitude(g.x[i]);
    s += g.w[i] * std::conj(p1) * p2 * std::polar(1.0, kTwoPi * g.x[i] * tau);
    n1 += g.w[i] * std::norm(p1);
    n2 += g.w[i] * std::norm(p2);
  }
  if (n1 <= 0.0 || n2 <= 0.0) return 0.0;
  return std::norm(s) / (n1 * n2);
}

// Exchange integral for the anticorrelated state, integrated in the
// (sum, difference) coordinates where the Gaussian factorizes; the tensor
// rule then splits into a u-sum times an oscillatory v-sum.
double joint_exchange_anticorrelated(const JointSpectralAmplitude& jsa, double tau,
                                     std::size_t intervals, double span_sigmas) {
  const double su =
      std::numbers::sqrt2 * units::fwhm_to_rms(units::ghz_to_thz(jsa.sum_bandwidth_ghz));
  const double sv = std::numbers::sqrt2 *
                    units::fwhm_to_rms(units::ghz_to_thz(jsa.difference_bandwidth_ghz));
  const double fd = units::ghz_to_thz(jsa.difference_center_ghz);

  const double u0 = jsa.sum_center_thz;
  const Grid gu = make_grid(u0 - span_sigmas * su, u0 + span_sigmas * su, intervals);
  const double vmax = std::abs(fd) + span_sigmas * sv;
  const Grid gv = make_grid(-vmax, vmax, intervals);

  auto lobe = [](double x, double c, double s) {
    const double z = (x - c) / s;
    return std::exp(-0.5 * z * z);
  };

  // The u-axis factor of the tensor rule is common to the exchange integral
  // and the normalization and cancels; it is still accumulated so the
  // grid-halving check sees the full 2D rule.
  double sum_u = 0.0;
  for (std::size_t i = 0; i < gu.x.size(); ++i) {
    const double b = lobe(gu.x[i], u0, su);
    sum_u += gu.w[i] * b * b;
  }

  std::complex<double> num_v{0.0, 0.0};
  double den_v = 0.0;
  for (std::size_t j = 0; j < gv.x.size(); ++j) {
    const double v = gv.x[j];
    const double bp = lobe(v, fd, sv) + lobe(v, -fd, sv);
    const double bm = lobe(-v, fd, sv) + lobe(-v, -fd, sv);
    num_v += gv.w[j] * bp * bm * std::polar(1.0, kTwoPi * v * tau);
    den_v += gv.w[j] * bp * bp;
  }
  if (sum_u <= 0.0 || den_v <= 0.0) return 0.0;
  return (sum_u * num_v.real()) / (sum_u * den_v);
}

double joint_exchange(const JointSpectralAmplitude& jsa, double tau,
                      std::size_t intervals, double span_sigmas) {
  return jsa.kind == JointSpectralAmplitude::Kind::separable
             ? joint_exchange_separable(jsa, tau, intervals, span_sigmas)
             : joint_exchange_anticorrelated(jsa, tau, intervals, span_sigmas);
}

// Doubles the tensor grid until two successive estimates agree; returns
// the converged interval count.
std::size_t converged_grid(const JointSpectralAmplitude& jsa, double tau,
                           const JointQuadratureOptions& opt) {
  double prev = joint_exchange(jsa, tau, opt.grid_points / 2, opt.span_sigmas);
  double diff = 0.0;
  for (std::size_t n = opt.grid_points; n <= opt.max_grid_points; n *= 2) {
    const double cur = joint_exchange(jsa, tau, n, opt.span_sigmas);
    diff = std::abs(cur - prev);
    if (diff <= opt.richardson_tol) return n;
    prev = cur;
  }
  throw QuadratureError(
      "joint coincidence quadrature did not converge: grid-halving residual " +
      std::to_string(diff) + " above " + std::to_string(opt.richardson_tol) +
      " at tau = " + std::to_string(tau) + " ps with up to " +
      std::to_string(opt.max_grid_points) + " intervals per axis (span " +
      std::to_string(opt.span_sigmas) + " sigmas)");
}

double joint_probability_checked(const JointSpectralAmplitude& jsa, double tau,
                                 const JointQuadratureOptions& opt) {
  const std::size_t n = converged_grid(jsa, tau, opt);
  return std::max(0.0, 0.5 * (1.0 - joint_exchange(jsa, tau, n, opt.span_sigmas)));
}

}  // namespace

void DipModel::validate() const {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::domain_error("DipModel: visibility must be in [0,1]");
  if (!(sigma_ps > 0.0)) throw std::domain_error("DipModel: sigma must be > 0");
  if (!(baseline >= 0.0)) throw std::domain_error("DipModel: baseline must be >= 0");
}

double eval_dip_model(const DipModel& model, double delta_tau_ps) {
  model.validate();
  const double z = delta_tau_ps / model.sigma_ps;
  return model.baseline * (1.0 - model.visibility * std::exp(-0.5 * z * z));
}

double coincidence_probability_separable(const SpectralWavepacket& wp1,
                                         const SpectralWavepacket& wp2,
                                         double delay_ps,
                                         double distinguishability_overlap) {
  if (!(distinguishability_overlap >= 0.0 && distinguishability_overlap <= 1.0))
    throw std::domain_error(
        "coincidence_probability_separable: overlap must be in [0,1]");
  const OverlapResult m = mode_overlap(wp1, wp2, delay_ps);
  const double xi2 = distinguishability_overlap * distinguishability_overlap;
  return 0.5 * (1.0 - xi2 * m.magnitude * m.magnitude);
}

double coincidence_probability_joint(const JointSpectralAmplitude& jsa,
                                     double delay_ps,
                                     const JointQuadratureOptions& opt) {
  jsa.validate();
  return joint_probability_checked(jsa, jsa.delay_ps + delay_ps, opt);
}

ProbabilityCurve hom_dip_curve(const CurveGenerator& generator,
                               std::span<const double> delays_ps,
                               const JointQuadratureOptions& opt) {
  if (delays_ps.empty())
    throw std::invalid_argument("hom_dip_curve: delay list must not be empty");
  for (std::size_t i = 1; i < delays_ps.size(); ++i)
    if (!(delays_ps[i] > delays_ps[i - 1]))
      throw std::invalid_argument("hom_dip_curve: delays must be strictly increasing");

  ProbabilityCurve curve;
  curve.delays_ps.assign(delays_ps.begin(), delays_ps.end());
  curve.values.resize(delays_ps.size());

  if (const auto* sep = std::get_if<SeparablePair>(&generator)) {
    for (std::size_t i = 0; i < delays_ps.size(); ++i)
      curve.values[i] = coincidence_probability_separable(
          sep->wp1, sep->wp2, delays_ps[i], sep->distinguishability_overlap);
  } else if (const auto* jsa = std::get_if<JointSpectralAmplitude>(&generator)) {
    jsa->validate();
    // Convergence is checked once at the most oscillatory delay and at the
    // dip; all points are then evaluated on the grid that passed.
    const double worst =
        std::max(std::abs(delays_ps.front()), std::abs(delays_ps.back()));
    const std::size_t n =
        std::max(converged_grid(*jsa, jsa->delay_ps + worst, opt),
                 converged_grid(*jsa, jsa->delay_ps, opt));
    for (std::size_t i = 0; i < delays_ps.size(); ++i)
      curve.values[i] = std::max(
          0.0, 0.5 * (1.0 - joint_exchange(*jsa, jsa->delay_ps + delays_ps[i], n,
                                           opt.span_sigmas)));
  } else {
    const auto& model = std::get<DipModel>(generator);
    for (std::size_t i = 0; i < delays_ps.size(); ++i)
      curve.values[i] = eval_dip_model(model, delays_ps[i]);
  }
  return curve;
}

std::vector<double> local_minima_delays(const ProbabilityCurve& curve) {
  std::vector<double> minima;
  const auto& t = curve.delays_ps;
  const auto& y = curve.values;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] < y[i - 1] && y[i] <= y[i + 1]) {
      // Parabolic refinement through the three samples.
      const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
      double t_min = t[i];
      if (denom > 0.0) {
        const double h = 0.5 * (t[i + 1] - t[i - 1]);
        t_min += h * 0.5 * (y[i - 1] - y[i + 1]) / denom;
      }
      minima.push_back(t_min);
    }
  }
  return minima;
}

}  // namespace upconv
