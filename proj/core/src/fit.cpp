#include "upconv/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "upconv/rng.hpp"
#include "upconv/wavepacket.hpp"

namespace upconv {

namespace {

struct Params {
  double c, v, s;
};

double model_value(const Params& p, double dt) {
  const double z = dt / p.s;
  return p.c * (1.0 - p.v * std::exp(-0.5 * z * z));
}

// Analytic derivatives with respect to (C, V, sigma).
std::array<double, 3> model_jacobian(const Params& p, double dt) {
  const double z = dt / p.s;
  const double e = std::exp(-0.5 * z * z);
  return {1.0 - p.v * e, -p.c * e, -p.c * p.v * e * dt * dt / (p.s * p.s * p.s)};
}

// Solves the symmetric 3x3 system A x = b by Gaussian elimination with
// partial pivoting; returns false on a singular matrix.
bool solve3(std::array<double, 9> a, std::array<double, 3> b,
            std::array<double, 3>& x) {
  int idx[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[idx[r] * 3 + col]) > std::abs(a[idx[piv] * 3 + col])) piv = r;
    std::swap(idx[col], idx[piv]);
    const double d = a[idx[col] * 3 + col];
    if (std::abs(d) < 1e-300) return false;
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[idx[r] * 3 + col] / d;
      for (int c = col; c < 3; ++c) a[idx[r] * 3 + c] -= f * a[idx[col] * 3 + c];
      b[idx[r]] -= f * b[idx[col]];
    }
  }
  for (int row = 2; row >= 0; --row) {
    double acc = b[idx[row]];
    for (int c = row + 1; c < 3; ++c) acc -= a[idx[row] * 3 + c] * x[c];
    x[row] = acc / a[idx[row] * 3 + row];
  }
  return true;
}

bool invert3(const std::array<double, 9>& a, std::array<double, 9>& inv) {
  for (int col = 0; col < 3; ++col) {
    std::array<double, 3> e{0.0, 0.0, 0.0};
    e[col] = 1.0;
    std::array<double, 3> x{};
    if (!solve3(a, e, x)) return false;
    for (int row = 0; row < 3; ++row) inv[row * 3 + col] = x[row];
  }
  return true;
}

double chi2(const Params& p, std::span<const double> t, std::span<const double> y,
            std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - model_value(p, t[i]);
    s += w[i] * r * r;
  }
  return s;
}

Params initial_guess(std::span<const double> t, std::span<const double> y,
                     bool* centering_warning) {
  const std::size_t n = t.size();

  // C0: mean of the outer quarter of points by |dt|.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(t[a]) > std::abs(t[b]);
  });
  const std::size_t outer = std::max<std::size_t>(1, (n + 3) / 4);
  double c0 = 0.0;
  for (std::size_t i = 0; i < outer; ++i) c0 += y[order[i]];
  c0 /= static_cast<double>(outer);
  if (!(c0 > 0.0)) c0 = 1.0;

  std::size_t i_min = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (y[i] < y[i_min]) i_min = i;

  // The model dips at dt = 0; warn when the empirical minimum is further
  // than one grid step from it.
  double step = (t.back() - t.front()) / static_cast<double>(n - 1);
  *centering_warning = std::abs(t[i_min]) > step * 1.5;

  const double v0 = std::clamp(1.0 - y[i_min] / c0, 0.05, 1.0);

  // sigma0: half-width at half-depth of the empirical dip.
  const double half_level = c0 - 0.5 * (c0 - y[i_min]);
  double left = t.front(), right = t.back();
  for (std::size_t i = i_min; i-- > 0;) {
    if (y[i] >= half_level) {
      left = (std::abs(y[i + 1] - y[i]) > 0.0)
                 ? t[i] + (half_level - y[i]) / (y[i + 1] - y[i]) * (t[i + 1] - t[i])
                 : t[i];
      break;
    }
  }
  for (std::size_t i = i_min + 1; i < n; ++i) {
    if (y[i] >= half_level) {
      right = (std::abs(y[i] - y[i - 1]) > 0.0)
                  ? t[i - 1] + (half_level - y[i - 1]) / (y[i] - y[i - 1]) *
                                   (t[i] - t[i - 1])
                  : t[i];
      break;
    }
  }
  double s0 = 0.5 * (right - left);
  if (!(s0 > 0.0)) s0 = 0.25 * (t.back() - t.front());

  return {c0, v0, s0};
}

}  // namespace

namespace {

FitResult fit_dip_impl(std::span<const double> delays_ps, std::span<const double> counts,
                       const Params* explicit_init) {
  if (delays_ps.size() != counts.size())
    throw std::invalid_argument("fit_dip: delay/count size mismatch");
  if (delays_ps.size() < 5)
    throw std::invalid_argument("fit_dip: need at least 5 points");
  for (std::size_t i = 1; i < delays_ps.size(); ++i)
    if (!(delays_ps[i] > delays_ps[i - 1]))
      throw std::invalid_argument("fit_dip: delays must be strictly increasing");

  const std::size_t n = delays_ps.size();
  FitResult out;
  Params p = initial_guess(delays_ps, counts, &out.centering_warning);
  if (explicit_init) p = *explicit_init;

  double max_abs_t = 0.0;
  for (double t : delays_ps) max_abs_t = std::max(max_abs_t, std::abs(t));
  if (!(max_abs_t > 2.0 * p.s))
    throw std::invalid_argument(
        "fit_dip: no point beyond twice the initial sigma guess; baseline "
        "unconstrained");

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(counts[i], 1.0);

  // Damped Gauss-Newton with the damping factor adapted by the gain ratio.
  double lambda = 0.0;
  double nu = 2.0;
  double s_cur = chi2(p, delays_ps, counts, w);
  bool converged = false;
  int iter = 0;
  const int max_iter = 200;

  for (; iter < max_iter; ++iter) {
    std::array<double, 9> a{};
    std::array<double, 3> g{};
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = model_jacobian(p, delays_ps[i]);
      const double r = counts[i] - model_value(p, delays_ps[i]);
      for (int row = 0; row < 3; ++row) {
        g[row] += w[i] * j[row] * r;
        for (int col = row; col < 3; ++col) a[row * 3 + col] += w[i] * j[row] * j[col];
      }
    }
    a[3] = a[1];
    a[6] = a[2];
    a[7] = a[5];

    const double gnorm = std::max({std::abs(g[0]), std::abs(g[1]), std::abs(g[2])});
    if (gnorm < 1e-12) {
      converged = true;
      break;
    }
    if (lambda == 0.0)
      lambda = 1e-3 * std::max({a[0], a[4], a[8], 1e-300});

    std::array<double, 9> damped = a;
    damped[0] += lambda;
    damped[4] += lambda;
    damped[8] += lambda;
    std::array<double, 3> step{};
    if (!solve3(damped, g, step)) {
      lambda *= nu;
      nu *= 2.0;
      continue;
    }

    Params trial{p.c + step[0], p.v + step[1], p.s + step[2]};
    trial.s = std::abs(trial.s);  // the model is even in sigma
    if (trial.s < 1e-9) trial.s = 1e-9;

    // Relative parameter change proposed by this step; once it is tiny the
    // iteration cannot move regardless of acceptance.
    const double rel_change =
        std::max({std::abs(step[0]) / std::max(std::abs(p.c), 1e-300),
                  std::abs(step[1]) / std::max(std::abs(p.v), 1e-300),
                  std::abs(step[2]) / std::max(std::abs(p.s), 1e-300)});

    const double s_new = chi2(trial, delays_ps, counts, w);
    const double predicted =
        step[0] * (lambda * step[0] + g[0]) + step[1] * (lambda * step[1] + g[1]) +
        step[2] * (lambda * step[2] + g[2]);
    const double rho = predicted > 0.0 ? (s_cur - s_new) / predicted : -1.0;

    if (rho > 0.0) {
      p = trial;
      s_cur = s_new;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3.0));
      nu = 2.0;
    } else {
      lambda *= nu;
      nu *= 2.0;
    }
    if (rel_change < 1e-10) {
      converged = true;
      ++iter;
      break;
    }
    if (lambda > 1e100) break;
  }

  out.baseline = p.c;
  out.visibility = p.v;
  out.sigma_ps = std::abs(p.s);
  out.n_iterations = iter;
  out.converged = converged;
  out.visibility_out_of_range = p.v < 0.0 || p.v > 1.05;

  // Curvature-based uncertainties scaled by the reduced chi-square.
  std::array<double, 9> a{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = model_jacobian(p, delays_ps[i]);
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) a[row * 3 + col] += w[i] * j[row] * j[col];
  }
  const double dof = static_cast<double>(n) - 3.0;
  out.chi2_reduced = dof > 0.0 ? s_cur / dof : 0.0;
  std::array<double, 9> inv{};
  if (invert3(a, inv)) {
    const double scale = std::max(out.chi2_reduced, 0.0);
    for (auto& c : inv) c *= scale;
    out.covariance = inv;
    out.baseline_stderr = inv[0] > 0.0 ? std::sqrt(inv[0]) : 0.0;
    out.visibility_stderr = inv[4] > 0.0 ? std::sqrt(inv[4]) : 0.0;
    out.sigma_stderr = inv[8] > 0.0 ? std::sqrt(inv[8]) : 0.0;
  } else {
    out.covariance.fill(std::numeric_limits<double>::quiet_NaN());
    out.baseline_stderr = out.visibility_stderr = out.sigma_stderr =
        std::numeric_limits<double>::quiet_NaN();
  }

  out.degenerate = out.visibility < 2.0 * out.visibility_stderr ||
                   !(out.visibility > 0.0);
  return out;
}

}  // namespace

FitResult fit_dip(std::span<const double> delays_ps, std::span<const double> counts) {
  return fit_dip_impl(delays_ps, counts, nullptr);
}

FitResult fit_dip(std::span<const double> delays_ps, std::span<const double> counts,
                  const DipModel& init) {
  const Params p{init.baseline, init.visibility, init.sigma_ps};
  return fit_dip_impl(delays_ps, counts, &p);
}

double jacobian_check(const DipModel& model, double delta_tau_ps) {
  model.validate();
  const Params p{model.baseline, model.visibility, model.sigma_ps};
  const auto analytic = model_jacobian(p, delta_tau_ps);

  // Central differences on a function of magnitude ~C carry ~eps*C/h of
  // roundoff; derivatives far below that floor cannot be distinguished
  // from zero, so the comparison scale is clamped at 1e-3 of the model
  // value.
  const double f_scale = std::max(1.0, std::abs(model_value(p, delta_tau_ps)));

  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double base = (k == 0 ? p.c : k == 1 ? p.v : p.s);
    const double h = 1e-6 * std::max(std::abs(base), 1.0);
    Params hi = p, lo = p;
    (k == 0 ? hi.c : k == 1 ? hi.v : hi.s) = base + h;
    (k == 0 ? lo.c : k == 1 ? lo.v : lo.s) = base - h;
    const double fd =
        (model_value(hi, delta_tau_ps) - model_value(lo, delta_tau_ps)) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[k]), std::abs(fd), 1e-3 * f_scale});
    worst = std::max(worst, std::abs(analytic[k] - fd) / denom);
  }
  return worst;
}

CoherenceReport coherence_consistency(const FitResult& fit, double bandwidth_ghz) {
  CoherenceReport r;
  r.sigma_fit_ps = fit.sigma_ps;
  r.sigma_theory_ps = coherence_sigma_from_bandwidth(bandwidth_ghz);
  r.z_score = fit.sigma_stderr > 0.0
                  ? std::abs(fit.sigma_ps - r.sigma_theory_ps) / fit.sigma_stderr
                  : std::numeric_limits<double>::infinity();
  r.consistent = r.z_score < 3.0;
  return r;
}

BootstrapErrors bootstrap_errors(std::span<const double> delays_ps,
                                 std::span<const double> counts, int n_replicas,
                                 std::uint64_t seed) {
  BootstrapErrors out;
  out.n_replicas = n_replicas;
  std::vector<double> resampled(counts.size());
  std::vector<double> cs, vs, ss;
  cs.reserve(n_replicas);
  vs.reserve(n_replicas);
  ss.reserve(n_replicas);
  for (int rep = 0; rep < n_replicas; ++rep) {
    RngStream rng = RngStream::derive(seed, 0x626f6f74, static_cast<std::uint64_t>(rep));
    for (std::size_t i = 0; i < counts.size(); ++i)
      resampled[i] = static_cast<double>(rng.poisson(counts[i]));
    try {
      const FitResult f = fit_dip(delays_ps, resampled);
      if (f.converged) {
        cs.push_back(f.baseline);
        vs.push_back(f.visibility);
        ss.push_back(f.sigma_ps);
      }
    } catch (const std::invalid_argument&) {
      // replica too degenerate to fit; skip
    }
  }
  auto spread = [](const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double acc = 0.0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / (x.size() - 1));
  };
  out.baseline_stderr = spread(cs);
  out.visibility_stderr = spread(vs);
  out.sigma_stderr = spread(ss);
  return out;
}

}  // namespace upconv
