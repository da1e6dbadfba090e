// stats.hpp - Monte Carlo summaries: Wilson intervals, a one-sample
// Kolmogorov-Smirnov test, and a covariance estimate with standard error.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mocs::stats {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion at z standard deviations.
inline Interval wilson(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (ph + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Standard error of a proportion estimate (at least that of one success).
inline double proportion_se(std::size_t successes, std::size_t trials) {
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  return std::sqrt(std::max(ph * (1.0 - ph), 1.0 / n) / n);
}

/// Survival function of the Kolmogorov distribution, P[K > x].
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Small-x (Jacobi theta) form, accurate where the alternating series is slow.
    const double pi2 = M_PI * M_PI;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double t = (2.0 * k - 1.0);
      cdf += std::exp(-t * t * pi2 / (8.0 * x * x));
    }
    return 1.0 - std::sqrt(2.0 * M_PI) / x * cdf;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

struct KSResult {
  double statistic = 0.0;  // sup |F_n - F|
  double scaled = 0.0;     // sqrt(n) * statistic
  double p_value = 1.0;
};

/// One-sample KS test against a continuous CDF.
inline KSResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  KSResult r;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    r.statistic = std::max({r.statistic, (i + 1) / n - F, F - i / n});
  }
  r.scaled = std::sqrt(n) * r.statistic;
  r.p_value = kolmogorov_sf(r.scaled);
  return r;
}

/// Two-sided tail probability of a standard normal beyond z.
inline double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

struct CovarianceEstimate {
  double cov = 0.0;
  double se = 0.0;  // delta-method standard error
};

/// Sample covariance with the standard error of the mean of centred products.
inline CovarianceEstimate covariance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("covariance: need equal sizes >= 2");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = (a[i] - ma) * (b[i] - mb);
    s += v;
    s2 += v * v;
  }
  CovarianceEstimate out;
  out.cov = s / (n - 1.0);
  const double mean = s / n;
  out.se = std::sqrt(std::max(0.0, s2 / n - mean * mean) / n);
  return out;
}

/// Running mean / variance (Welford).
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

}  // namespace mocs::stats
