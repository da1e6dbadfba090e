// numerics.hpp - small numerical kernels: tail-stable power means, Poisson
// weights and adaptive Simpson quadrature.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace mocs::num {

/// Mean of u^(k-1) for u uniform on [1 - tail_hi - width, 1 - tail_hi].
///
/// The interval is described by its upper tail mass and its width rather
/// than by its endpoints: intervals that hug u = 1 are only 1e-10 wide and
/// the naive (t^k - s^k) / (k (t - s)) loses every significant digit there.
inline double power_mean_upper(double tail_hi, double width, double k) {
  if (!(width > 0.0)) throw std::invalid_argument("power_mean_upper: width must be positive");
  const double alpha = tail_hi + width;  // tail mass above the lower endpoint
  if (alpha >= 1.0) {
    // Interval is [0, t]; width may carry rounding, use t itself.
    const double t = 1.0 - tail_hi;
    return std::exp((k - 1.0) * std::log1p(-tail_hi)) / k * (t > 0.0 ? 1.0 : 0.0);
  }
  const double log_s = std::log1p(-alpha);
  const double log_ratio = std::log1p(width / (1.0 - alpha));  // log(t / s)
  return std::exp(k * log_s) * std::expm1(k * log_ratio) / (k * width);
}

inline double poisson_pmf(int k, double lambda) {
  if (lambda <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
}

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson on [a, b], with the range pre-split into `pieces`
/// equal panels so kinks are found early.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-13, int pieces = 32, int max_depth = 40) {
  double total = 0.0;
  const double h = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == pieces) ? b : lo + h;
    const double flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_rec(f, lo, hi, flo, fmid, fhi, whole, tol / pieces, max_depth);
  }
  return total;
}

}  // namespace mocs::num
