#pragma once

#include <complex>
#include <cstddef>
#include <functional>

namespace upconv::detail {

// Composite Simpson rule over [lo, hi] with n intervals (n even).
template <typename F>
auto simpson(F&& f, double lo, double hi, std::size_t n) {
  using R = decltype(f(lo));
  const double h = (hi - lo) / static_cast<double>(n);
  R acc = f(lo) + f(hi);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = lo + h * static_cast<double>(i);
    acc += f(x) * ((i & 1) ? 4.0 : 2.0);
  }
  return acc * (h / 3.0);
}

// Refines by doubling the interval count until two successive estimates
// differ by less than abs_tol (or the cap is reached).
template <typename F>
auto adaptive_simpson(F&& f, double lo, double hi, double abs_tol,
                      std::size_t n_start = 2048, std::size_t n_max = 1 << 17) {
  auto prev = simpson(f, lo, hi, n_start);
  for (std::size_t n = n_start * 2; n <= n_max; n *= 2) {
    auto cur = simpson(f, lo, hi, n);
    if (std::abs(cur - prev) < abs_tol) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace upconv::detail
