// ratios.hpp - competitive-ratio calculus: the Poisson mixture f of a
// discrete never-win table F, the ratio Gamma in its closed and integral
// forms, the dual function a, and the side-condition checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "win_distribution.hpp"

namespace mocs {

using RealFn = std::function<double(double)>;

/// F given by F(0..k*) followed by the geometric tail F(k*) (1-c)^{k-k*}.
struct DiscreteF {
  std::vector<double> head;  // F(0..k*)
  double c = 0.0;
  int m = 2;

  int k_star() const { return static_cast<int>(head.size()) - 1; }

  double at(int k) const {
    if (k < 0) throw std::invalid_argument("DiscreteF::at: negative k");
    if (k <= k_star()) return head[static_cast<std::size_t>(k)];
    return head.back() * std::pow(1.0 - c, k - k_star());
  }

  /// l-th forward difference of F at k.
  double delta(int k, int l) const {
    double s = 0.0, binom = 1.0;
    for (int i = 0; i <= l; ++i) {
      s += ((l - i) % 2 == 0 ? 1.0 : -1.0) * binom * at(k + i);
      binom = binom * (l - i) / (i + 1);
    }
    return s;
  }

  void validate() const {
    if (head.empty() || std::fabs(head[0] - 1.0) > 1e-12) throw std::invalid_argument("DiscreteF: F(0) must be 1");
    for (double v : head)
      if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw std::invalid_argument("DiscreteF: values must lie in [0,1]");
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("DiscreteF: c must lie in [0,1]");
    if (m < 1) throw std::invalid_argument("DiscreteF: m must be >= 1");
  }

  static DiscreteF from_table(const FTable& t) {
    return DiscreteF{t.head, 1.0 - t.tail_ratio, t.params.m};
  }
  /// F(n) = (1 - 1/m)^n: the independent-rounding baseline.
  static DiscreteF independent(int m) { return DiscreteF{{1.0}, 1.0 / m, m}; }
  /// Two-way gamma-OCS: F(k) = 2^{-k} (1 - gamma)^{(k-1)_+}.
  static DiscreteF fahrbach(double gamma) { return DiscreteF{{1.0, 0.5}, (1.0 + gamma) / 2.0, 2}; }
};

namespace detail {

// Pr[Poi(lambda) = k] for k = 0..kmax, by forward recursion.
inline void poisson_row(double lambda, int kmax, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(kmax + 1));
  if (lambda > 600.0) {
    for (int k = 0; k <= kmax; ++k) out[static_cast<std::size_t>(k)] = num::poisson_pmf(k, lambda);
    return;
  }
  double p = std::exp(-lambda);
  for (int k = 0; k <= kmax; ++k) {
    out[static_cast<std::size_t>(k)] = p;
    p *= lambda / (k + 1);
  }
}

// sum_{k >= k*} Pr[Poi(lambda) = k] F(k), using F(k) = F(k*) rho^{k-k*};
// `pmf_ks` is Pr[Poi(lambda) = k*].
inline double poisson_tail(const DiscreteF& F, double lambda, double pmf_ks) {
  const int ks = F.k_star();
  const double rho = 1.0 - F.c;
  const double top = F.head.back();
  if (lambda <= 0.0) return ks == 0 ? top : 0.0;
  if (rho <= 0.0) return top * pmf_ks;
  const double mu = rho * lambda;
  if (mu > ks + 40.0 + 10.0 * std::sqrt(static_cast<double>(ks) + 1.0)) {
    // rho^{-k*} e^{-c lambda} Pr[Poi(mu) >= k*]; the lower CDF is tiny here.
    double lower = 0.0;
    for (int k = 0; k < ks; ++k) lower += num::poisson_pmf(k, mu);
    return top * std::exp(-F.c * lambda - ks * std::log(rho)) * (1.0 - lower);
  }
  double term = pmf_ks, sum = 0.0;
  for (int j = 0; j < 100000; ++j) {
    sum += term;
    term *= mu / (ks + j + 1);
    if (term < 1e-18 * sum && j > mu) break;
  }
  return top * sum;
}

}  // namespace detail

/// f(x) = E[F(Poi(m x))].
inline double f_from_F(const DiscreteF& F, double x) {
  if (x < 0.0) throw std::invalid_argument("f_from_F: x must be >= 0");
  const double lambda = F.m * x;
  thread_local std::vector<double> pmf;
  detail::poisson_row(lambda, F.k_star(), pmf);
  double s = 0.0;
  for (int k = 0; k < F.k_star(); ++k) s += pmf[static_cast<std::size_t>(k)] * F.head[static_cast<std::size_t>(k)];
  return s + detail::poisson_tail(F, lambda, pmf.back());
}

/// f^{(l)}(x) = m^l E[Delta^l F(Poi(m x))].
inline double f_derivative(const DiscreteF& F, double x, int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("f_derivative: order must be 1, 2 or 3");
  if (x < 0.0) throw std::invalid_argument("f_derivative: x must be >= 0");
  const double lambda = F.m * x;
  std::vector<double> pmf;
  detail::poisson_row(lambda, F.k_star(), pmf);
  double s = 0.0;
  for (int k = 0; k < F.k_star(); ++k) s += pmf[static_cast<std::size_t>(k)] * F.delta(k, order);
  s += std::pow(-F.c, order) * detail::poisson_tail(F, lambda, pmf.back());
  return std::pow(static_cast<double>(F.m), order) * s;
}

/// Gamma = 1 - sum_{n<k*} m^n/(m+1)^{n+1} F(n) - (m/(m+1))^{k*} F(k*)/(1 + m c).
inline double gamma_discrete(const DiscreteF& F) {
  F.validate();
  const double m = F.m;
  double s = 0.0, w = 1.0 / (m + 1.0);
  for (int n = 0; n < F.k_star(); ++n) {
    s += w * F.head[static_cast<std::size_t>(n)];
    w *= m / (m + 1.0);
  }
  s += std::pow(m / (m + 1.0), F.k_star()) * F.head.back() / (1.0 + m * F.c);
  return 1.0 - s;
}

inline double gamma_fahrbach(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma_fahrbach: gamma must lie in [0,1]");
  return (3.0 + 2.0 * gamma) / (6.0 + 3.0 * gamma);
}

/// Horizon beyond which e^{-t} f(t) is negligible for f bounded by 1.
inline constexpr double kQuadratureHorizon = 36.0;

/// integral_0^inf e^{-t} f(t + x) dt for f bounded in [0,1].
inline double discounted_integral(const RealFn& f, double x = 0.0, double tol = 1e-13) {
  if (std::fabs(f(x + 64.0)) > 1e-6) throw std::domain_error("discounted_integral: f does not vanish at infinity");
  return num::adaptive_simpson([&](double t) { return std::exp(-t) * f(t + x); }, 0.0, kQuadratureHorizon, tol,
                               static_cast<int>(kQuadratureHorizon));
}

/// Gamma = 1 - integral_0^inf e^{-t} f(t) dt.
inline double gamma_continuous(const RealFn& f) { return 1.0 - discounted_integral(f); }

/// a(x) = f(x) - integral_0^inf e^{-t} f(t + x) dt.
inline double a_function(const RealFn& f, double x) {
  if (x < 0.0) throw std::invalid_argument("a_function: x must be >= 0");
  return f(x) - discounted_integral(f, x);
}

/// Closed form of integral_0^inf e^{-t} f(t + x) dt for f = f_from_F:
///   e^x sum_k F(k) m^k / (m+1)^{k+1} Pr[Poi((m+1) x) <= k].
inline double discounted_integral_F(const DiscreteF& F, double x) {
  if (x < 0.0) throw std::invalid_argument("discounted_integral_F: x must be >= 0");
  const double m = F.m;
  const double lam = (m + 1.0) * x;
  if (lam > 600.0) return discounted_integral([&F](double t) { return f_from_F(F, t); }, x);
  const double q = m / (m + 1.0);
  const double cutoff = lam + 30.0 + 10.0 * std::sqrt(lam);
  double pmf = std::exp(-lam), cdf = 0.0, coef = 1.0 / (m + 1.0), sum = 0.0;
  for (int k = 0;; ++k) {
    cdf += pmf;
    const double fk = F.at(k);
    sum += fk * coef * cdf;
    if (k >= F.k_star() && k > cutoff) {
      // Remaining terms have cdf = 1 to double precision: geometric series.
      const double ratio = (1.0 - F.c) * q;
      sum += fk * coef * ratio / (1.0 - ratio);
      break;
    }
    coef *= q;
    pmf *= lam / (k + 1);
  }
  return std::exp(x) * sum;
}

/// a(x) for f = f_from_F, via the closed form above.
inline double a_from_F(const DiscreteF& F, double x) { return f_from_F(F, x) - discounted_integral_F(F, x); }

struct ConditionCheck {
  std::string name;
  bool pass = false;
  double residual = 0.0;  // signed margin; >= 0 means satisfied
  std::string detail;
};

struct RatioReport {
  double gamma = 0.0;
  double m_bound = 0.0;  // right-hand side of the bound on m
  double r_bound = 0.0;  // right-hand side of the bound on r (f'(0) = m dF(0))
  std::vector<ConditionCheck> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.pass; });
  }
  const ConditionCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// (-f'(0) - Gamma) / (Gamma + (1 - Gamma) f'(0)); +inf when the
/// denominator is not positive (the bound is then vacuous).
inline double rate_bound(double fprime0, double gamma) {
  const double den = gamma + (1.0 - gamma) * fprime0;
  if (!(den > 1e-12)) return std::numeric_limits<double>::infinity();
  return (-fprime0 - gamma) / den;
}

struct ConditionOptions {
  double tol = 1e-12;           // slack for exact inequalities
  double ode_tol = 1e-6;        // |a' - f' - a|
  double h0_tol = 1e-4;         // h(0+) against the r-bound
  double fd_step = 1e-5;
  double grid_max = 5.0;
  double grid_step = 0.01;
  double fine_max = 0.05;
  double fine_step = 1e-4;
};

inline RatioReport check_conditions(const DiscreteF& F, const ConditionOptions& opt = {}) {
  F.validate();
  RatioReport rep;
  const int ks = F.k_star();
  const int m = F.m;
  rep.gamma = gamma_discrete(F);
  const double G = rep.gamma;
  auto add = [&](std::string name, double residual, std::string detail = {}) {
    rep.checks.push_back({std::move(name), residual >= -opt.tol, residual, std::move(detail)});
  };

  // Convexity below k*; the tail is convex by construction.
  double conv = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ks; ++k) conv = std::min(conv, F.delta(k, 2));
  add("convexity", ks > 0 ? conv : 0.0, "min Delta^2 F(k), k < k*");

  // Log-concavity: F(k+1)/F(k) nonincreasing (tail ratio included).
  double lc = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= ks; ++k) lc = std::min(lc, F.at(k + 1) / F.at(k) - F.at(k + 2) / F.at(k + 1));
  add("log_concavity", lc, "min of consecutive ratio drops");

  // Pairwise condition on k1, k2 < k*.
  double pair = std::numeric_limits<double>::infinity();
  for (int k1 = 0; k1 < ks; ++k1)
    for (int k2 = 0; k2 < ks; ++k2) {
      const double lhs = F.delta(k1, 3) * F.delta(k2, 1) + F.delta(k1, 1) * F.delta(k2, 3);
      const double rhs = 2.0 * F.delta(k1, 2) * F.delta(k2, 2);
      pair = std::min(pair, rhs - lhs);
    }
  add("discrete_log_concave", ks > 0 ? pair : 0.0, "min RHS - LHS over k1, k2 < k*");

  // Mixed case against the geometric tail.
  double cc = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ks; ++k)
    cc = std::min(cc, F.delta(k, 3) + 2.0 * F.c * F.delta(k, 2) + F.c * F.c * F.delta(k, 1));
  add("discrete_log_concave_c", ks > 0 ? cc : 0.0, "min Delta^3 F + 2c Delta^2 F + c^2 Delta F, k < k*");

  const double fp0 = m * F.delta(0, 1);
  rep.m_bound = rate_bound(fp0, G);
  rep.r_bound = rep.m_bound;
  add("m_bound", std::isinf(rep.m_bound) ? 1.0 : rep.m_bound - m, "RHS - m");

  // Grid checks on the dual function a.
  const RealFn f = [&F](double x) { return f_from_F(F, x); };
  std::vector<double> grid;
  const int fine_n = static_cast<int>(std::lround(opt.fine_max / opt.fine_step));
  for (int i = 0; i < fine_n; ++i) grid.push_back(i * opt.fine_step);
  for (int i = static_cast<int>(std::lround(opt.fine_max / opt.grid_step)); i * opt.grid_step <= opt.grid_max + 1e-12; ++i)
    grid.push_back(i * opt.grid_step);
  const double h = opt.fd_step;
  double ode = 0.0, decr = std::numeric_limits<double>::infinity(), lower = decr, upper = decr, hmono = decr,
         hmin = std::numeric_limits<double>::infinity();
  double a0 = 0.0, prev_h = -std::numeric_limits<double>::infinity();
  double h_delta = 0.0, h_2delta = 0.0;
  for (double x : grid) {
    const double ax = a_function(f, x);
    const double fx = f(x);
    double da;
    if (x < h) {
      da = (-3.0 * ax + 4.0 * a_function(f, x + h) - a_function(f, x + 2.0 * h)) / (2.0 * h);
    } else {
      da = (a_function(f, x + h) - a_function(f, x - h)) / (2.0 * h);
    }
    ode = std::max(ode, std::fabs(da - f_derivative(F, x, 1) - ax));
    if (fx > 1e-9) decr = std::min(decr, -1e-12 - da);
    lower = std::min(lower, ax - G * fx);
    upper = std::min(upper, G - ax);
    if (x == 0.0) {
      a0 = ax;
      continue;
    }
    const double den = ax - fx * G;
    const double hx = den > 1e-12 ? (G - ax) / den : std::numeric_limits<double>::infinity();
    if (!std::isinf(hx) || !std::isinf(prev_h)) hmono = std::min(hmono, hx - prev_h);
    prev_h = hx;
    hmin = std::min(hmin, hx);
    if (x == opt.fine_step) h_delta = hx;
    if (x == 2.0 * opt.fine_step) h_2delta = hx;
  }
  rep.checks.push_back({"a_ode_residual", ode < opt.ode_tol, opt.ode_tol - ode, "max |a' - f' - a| on grid"});
  add("a_gamma", 1e-9 - std::fabs(a0 - G), "|a(0) - Gamma| <= 1e-9");
  add("a_decreasing", decr, "a' < -1e-12 where f > 1e-9");
  add("f_lower_a", lower, "min a - Gamma f");
  add("a_upper_gamma", upper, "min Gamma - a");
  add("h_nondecreasing", std::isinf(hmono) ? 0.0 : hmono, "min h(x_{i+1}) - h(x_i)");
  const double h0 = (std::isinf(h_delta) || std::isinf(h_2delta)) ? std::numeric_limits<double>::infinity()
                                                                   : 2.0 * h_delta - h_2delta;
  if (std::isinf(rep.r_bound) || std::isinf(h0)) {
    rep.checks.push_back({"h0_matches_r_bound", std::isinf(rep.r_bound) && std::isinf(h0), 0.0, "both infinite"});
  } else {
    const double err = std::fabs(h0 - rep.r_bound);
    rep.checks.push_back({"h0_matches_r_bound", err <= opt.h0_tol, opt.h0_tol - err, "extrapolated h(0+) vs r-bound"});
  }
  add("r_bound", std::isinf(rep.r_bound) ? 1.0 : rep.r_bound - m, "r-bound - r with r = m");
  add("r_le_h", std::isinf(hmin) ? 1.0 : hmin - m, "min h(x) - m on grid");
  add("gamma_band", std::min(G - 0.5, (1.0 - std::exp(-1.0)) - G), "Gamma in [1/2, 1 - 1/e]");
  return rep;
}

}  // namespace mocs
