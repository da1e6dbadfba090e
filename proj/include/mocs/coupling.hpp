// coupling.hpp - stochastically monotone couplings between the law of a
// desired win probability and the tournament's strength distribution.
//
// Target: b = u^{(m-r)/r} with u ~ U(0,1); b is the probability that a
// strength u^{1/r} beats the max of m - r independent uniforms. The plan is
// a convex combination of "block kernels": the source atoms are split into
// consecutive blocks and every atom of a block is sent uniformly over the
// block's combined quantile range. Each kernel preserves the target marginal
// exactly and is monotone, so every mixture is too; the mixture weights come
// from a column-generation LP maximizing min_i (E[b | a_i] - a_i).
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lp.hpp"
#include "numerics.hpp"
#include "random.hpp"
#include "win_distribution.hpp"

namespace mocs {

struct TournamentCoupling {
  int r = 0;
  int m = 0;
  ExactDistribution source;
  // Quantile cell j is u in [1 - tail_hi[j] - width[j], 1 - tail_hi[j]],
  // aligned with source atom j (widths equal the source masses).
  std::vector<double> cell_tail_hi;
  std::vector<double> cell_width;
  std::vector<double> cell_mean;  // E[b | u in cell j]
  // plan[i][j]: joint mass sent from atom i to cell j.
  std::vector<std::vector<double>> plan;
  std::vector<std::vector<double>> row_cdf;  // conditional CDF over cells
  std::vector<double> conditional_mean;      // E[b | w = a_i]
  double min_surplus = 0.0;                  // min_i E[b | a_i] - a_i
  std::size_t kernels = 0;                   // block kernels with positive weight
  std::size_t lp_columns = 0;
};

namespace detail {

// Block [lo, hi) of atoms: mean of b over the union of their cells.
inline double block_mean(const std::vector<double>& tail_hi, const std::vector<double>& suffix,
                         const std::vector<double>& width, std::size_t lo, std::size_t hi, double k) {
  const double w = (hi - lo == 1) ? width[lo] : suffix[lo] - suffix[hi];
  return num::power_mean_upper(tail_hi[hi - 1], w, k);
}

}  // namespace detail

inline TournamentCoupling build_coupling(const ExactDistribution& source, int r, int m,
                                         double feas_tol = 1e-9) {
  if (m < 2 || r < 1 || r > m - 1) throw std::invalid_argument("build_coupling: need 1 <= r <= m-1");
  source.validate(1e-10);
  const std::size_t n = source.size();
  const double k = static_cast<double>(m) / r;  // b = u^{k-1}

  TournamentCoupling cp;
  cp.r = r;
  cp.m = m;
  cp.source = source;
  cp.cell_tail_hi = source.upper_tails();
  cp.cell_width.resize(n);
  std::vector<double> suffix(n + 1, 0.0), a(n);
  for (std::size_t i = n; i-- > 0;) {
    cp.cell_width[i] = source[i].mass;
    suffix[i] = suffix[i + 1] + source[i].mass;
    a[i] = source[i].value;
  }
  cp.cell_mean.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    cp.cell_mean[i] = num::power_mean_upper(cp.cell_tail_hi[i], cp.cell_width[i], k);

  // A kernel is a partition into consecutive blocks, stored as block starts.
  using Partition = std::vector<std::size_t>;
  auto kernel_means = [&](const Partition& starts) {
    std::vector<double> mu(n);
    for (std::size_t b = 0; b < starts.size(); ++b) {
      const std::size_t lo = starts[b], hi = (b + 1 < starts.size()) ? starts[b + 1] : n;
      const double v = detail::block_mean(cp.cell_tail_hi, suffix, cp.cell_width, lo, hi, k);
      for (std::size_t i = lo; i < hi; ++i) mu[i] = v;
    }
    return mu;
  };

  // Master LP: max t  s.t.  t - (M lambda)_i <= 1 - a_i,  sum lambda <= 1.
  std::vector<double> rhs(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = std::max(0.0, 1.0 - a[i]);
  lp::DenseSimplex lp(rhs);
  std::vector<double> col(n + 1, 1.0);
  col[n] = 0.0;
  const std::size_t t_col = lp.add_column(1.0, col);

  std::vector<Partition> parts;
  std::vector<std::vector<double>> means;
  std::vector<std::size_t> cols;
  auto add_kernel = [&](Partition p) {
    std::vector<double> mu = kernel_means(p);
    for (std::size_t i = 0; i < n; ++i) col[i] = -mu[i];
    col[n] = 1.0;
    cols.push_back(lp.add_column(0.0, col));
    parts.push_back(std::move(p));
    means.push_back(std::move(mu));
  };
  Partition identity(n);
  for (std::size_t i = 0; i < n; ++i) identity[i] = i;
  add_kernel(identity);
  add_kernel(Partition{0});

  std::vector<double> best(n + 1), y(n), ycum(n + 1);
  std::vector<std::size_t> arg(n + 1);
  bool fresh = false;  // tableau rebuilt since the last column was added
  for (int iter = 0; iter < 2000; ++iter) {
    // A stalled solve still leaves a feasible basis; keep what it has and
    // let the direct verification below decide.
    if (lp.solve() != lp::DenseSimplex::Status::Optimal) break;
    if (iter % 50 == 49) {
      lp.reinvert();
      lp.solve();
    }
    ycum[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::max(0.0, lp.dual(i));
      ycum[i + 1] = ycum[i] + y[i];
    }
    const double v = lp.dual(n);
    // Pricing: best consecutive partition for the dual weights y.
    best[0] = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      best[j] = -1.0;
      for (std::size_t i = 0; i < j; ++i) {
        const double wsum = ycum[j] - ycum[i];
        const double val = best[i] +
            (wsum > 0.0 ? wsum * detail::block_mean(cp.cell_tail_hi, suffix, cp.cell_width, i, j, k) : 0.0);
        if (val > best[j]) {
          best[j] = val;
          arg[j] = i;
        }
      }
    }
    Partition p;
    for (std::size_t j = n; j > 0; j = arg[j]) p.push_back(arg[j]);
    std::reverse(p.begin(), p.end());
    const bool known = std::find(parts.begin(), parts.end(), p) != parts.end();
    if (best[n] <= v + 1e-12 || known) {
      // Converged on a drifted tableau: rebuild it once and re-price.
      if (fresh) break;
      lp.reinvert();
      fresh = true;
      continue;
    }
    fresh = false;
    add_kernel(std::move(p));
  }
  (void)t_col;
  cp.lp_columns = parts.size();

  std::vector<double> lambda(parts.size());
  double total = 0.0;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    lambda[c] = std::max(0.0, lp.value(cols[c]));
    total += lambda[c];
  }
  auto surplus_of = [&](const std::vector<double>& weights) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double mean = 0.0;
      for (std::size_t c = 0; c < parts.size(); ++c) mean += weights[c] * means[c][i];
      worst = std::min(worst, mean - a[i]);
    }
    return worst;
  };
  if (total > 0.0) {
    for (double& l : lambda) l /= total;
  }
  // When the optimum is tight (e.g. r = 1, where the identity kernel has
  // surplus exactly 0) round-off can leave the mixture marginally behind a
  // single kernel; take the single kernel then.
  double mixed = total > 0.0 ? surplus_of(lambda) : -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < parts.size(); ++c) {
    std::vector<double> unit(parts.size(), 0.0);
    unit[c] = 1.0;
    const double single = surplus_of(unit);
    if (single > mixed) {
      mixed = single;
      lambda = std::move(unit);
    }
  }

  // Materialize the plan and verify the dominance constraints directly.
  cp.plan.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < parts.size(); ++c) {
    if (lambda[c] <= 0.0) continue;
    ++cp.kernels;
    const Partition& p = parts[c];
    for (std::size_t b = 0; b < p.size(); ++b) {
      const std::size_t lo = p[b], hi = (b + 1 < p.size()) ? p[b + 1] : n;
      const double block = (hi - lo == 1) ? cp.cell_width[lo] : suffix[lo] - suffix[hi];
      for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = lo; j < hi; ++j)
          cp.plan[i][j] += lambda[c] * cp.cell_width[i] * cp.cell_width[j] / block;
    }
  }
  cp.row_cdf.assign(n, std::vector<double>(n, 0.0));
  cp.conditional_mean.assign(n, 0.0);
  cp.min_surplus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0, row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += cp.plan[i][j];
    for (std::size_t j = 0; j < n; ++j) {
      acc += cp.plan[i][j] / row;
      cp.row_cdf[i][j] = acc;
    }
    cp.row_cdf[i][n - 1] = 1.0;
    double mean = 0.0;
    for (std::size_t c = 0; c < parts.size(); ++c) mean += lambda[c] * means[c][i];
    cp.conditional_mean[i] = mean;
    cp.min_surplus = std::min(cp.min_surplus, mean - a[i]);
  }
  if (cp.min_surplus < -feas_tol)
    throw std::runtime_error("build_coupling: no dominating coupling found for r=" + std::to_string(r) +
                             " (min surplus " + std::to_string(cp.min_surplus) + ")");
  return cp;
}

/// Largest violation of stochastic monotonicity: for i < i', the conditional
/// CDF of row i must dominate that of row i' at every cell boundary.
inline double monotonicity_violation(const TournamentCoupling& cp) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < cp.row_cdf.size(); ++i)
    for (std::size_t j = 0; j < cp.row_cdf[i].size(); ++j)
      worst = std::max(worst, cp.row_cdf[i + 1][j] - cp.row_cdf[i][j]);
  return worst;
}

/// Strength for the given cell: u uniform in the cell, returned as u^{1/r}.
inline double cell_strength(const TournamentCoupling& cp, std::size_t cell, Rng& rng) {
  const double q = cp.cell_tail_hi[cell] + uniform01(rng) * cp.cell_width[cell];  // q = 1 - u
  return std::exp(std::log1p(-std::min(q, 1.0)) / cp.r);
}

inline std::size_t sample_cell(const TournamentCoupling& cp, std::size_t atom, Rng& rng) {
  const auto& cdf = cp.row_cdf[atom];
  const double v = uniform01(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

/// Strength of an element whose desired win probability is w.
inline double strength(const TournamentCoupling& cp, double w, Rng& rng) {
  const long atom = cp.source.find(w);
  if (atom < 0) throw std::invalid_argument("strength: w is not a support value of the coupling source");
  return cell_strength(cp, sample_cell(cp, static_cast<std::size_t>(atom), rng), rng);
}

}  // namespace mocs
