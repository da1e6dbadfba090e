// lp.hpp - dense tableau simplex for  max c'x  s.t.  Ax <= b, x >= 0, b >= 0,
// with column addition for column generation.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mocs::lp {

/// All tableau arithmetic is carried out in `Real`; the master problems of
/// the coupling construction are ill-conditioned, so extended precision is
/// the default.
class DenseSimplex {
 public:
  using Real = long double;

  enum class Status { Optimal, Unbounded, IterationLimit };

  /// Slack columns 0..rows-1 form the starting basis, so b must be >= 0.
  /// eps: pivot tolerance; price_eps: a column enters only if its reduced
  /// cost is below -price_eps (looser, so round-off cannot drive cycling).
  explicit DenseSimplex(std::vector<double> b, double eps = 1e-12, double price_eps = 1e-10, double perturb = 1e-10)
      : b_(std::move(b)), eps_(eps), price_eps_(price_eps) {
    const std::size_t n = b_.size();
    for (double v : b_)
      if (v < 0.0) throw std::invalid_argument("DenseSimplex: right-hand side must be nonnegative");
    // A tiny deterministic perturbation of b removes primal degeneracy, the
    // usual source of stalling and round-off cycling.
    for (std::size_t i = 0; i < n; ++i) b_[i] += perturb * (1.0 + static_cast<double>(i % 97) / 97.0);
    rhs_.assign(b_.begin(), b_.end());
    rows_.assign(n, std::vector<Real>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) rows_[i][i] = 1.0;
    reduced_.assign(n, 0.0);
    basis_.resize(n);
    for (std::size_t i = 0; i < n; ++i) basis_[i] = i;
  }

  std::size_t rows() const { return rhs_.size(); }
  std::size_t cols() const { return reduced_.size(); }

  /// Appends a structural column with objective c and constraint column a,
  /// expressed in the current basis. Returns its column index.
  std::size_t add_column(double c, const std::vector<double>& a) {
    const std::size_t n = rows();
    if (a.size() != n) throw std::invalid_argument("DenseSimplex::add_column: size mismatch");
    Real red = -c;
    for (std::size_t i = 0; i < n; ++i) red += reduced_[i] * a[i];
    cost_.push_back(c);
    columns_.push_back(a);
    for (std::size_t r = 0; r < n; ++r) {
      Real v = 0.0;
      const auto& row = rows_[r];
      for (std::size_t i = 0; i < n; ++i) v += row[i] * a[i];
      rows_[r].push_back(v);
    }
    reduced_.push_back(red);
    return reduced_.size() - 1;
  }

  Status solve(std::size_t max_iter = 100000) {
    std::size_t degenerate = 0;
    bool bland = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
      // Dantzig pricing; Bland's rule (kept for the rest of the call) after a
      // run of degenerate pivots.
      bland = bland || degenerate > 50;
      std::size_t enter = cols();
      Real best = -price_eps_;
      for (std::size_t j = 0; j < cols(); ++j) {
        if (reduced_[j] < best) {
          enter = j;
          if (bland) break;
          best = reduced_[j];
        }
      }
      if (enter == cols()) return Status::Optimal;
      std::size_t leave = rows();
      Real ratio = std::numeric_limits<Real>::infinity();
      for (std::size_t r = 0; r < rows(); ++r) {
        const Real a = rows_[r][enter];
        if (a > eps_) {
          const Real q = std::max<Real>(rhs_[r], 0.0) / a;  // round-off may leave rhs slightly < 0
          if (q < ratio - 1e-15 || (q <= ratio + 1e-15 && leave < rows() && basis_[r] < basis_[leave])) {
            ratio = q;
            leave = r;
          }
        }
      }
      if (leave == rows()) return Status::Unbounded;
      degenerate = (ratio <= eps_) ? degenerate + 1 : 0;
      pivot(leave, enter);
    }
    return Status::IterationLimit;
  }

  /// Rebuilds the tableau from the original data for the current basis
  /// (Gauss-Jordan with partial pivoting), discarding accumulated drift.
  void reinvert() {
    const std::size_t n = rows();
    std::vector<std::vector<Real>> B(n, std::vector<Real>(2 * n, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < n; ++i) B[i][r] = original(basis_[r], i);
      B[r][n + r] = 1.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      for (std::size_t i = col + 1; i < n; ++i)
        if (std::fabs(B[i][col]) > std::fabs(B[piv][col])) piv = i;
      if (B[piv][col] == 0.0) throw std::runtime_error("DenseSimplex::reinvert: singular basis");
      std::swap(B[piv], B[col]);
      const Real inv = 1.0L / B[col][col];
      for (Real& v : B[col]) v *= inv;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == col || B[i][col] == 0.0) continue;
        const Real f = B[i][col];
        for (std::size_t j = col; j < 2 * n; ++j) B[i][j] -= f * B[col][j];
      }
    }
    // Row r of B^{-1} now sits in B[r][n..2n).
    std::vector<Real> y(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const Real cb = cost(basis_[r]);
      if (cb != 0.0)
        for (std::size_t i = 0; i < n; ++i) y[i] += cb * B[r][n + i];
    }
    for (std::size_t r = 0; r < n; ++r) {
      Real v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += B[r][n + i] * b_[i];
      rhs_[r] = std::max<Real>(0.0, v);
    }
    for (std::size_t j = 0; j < cols(); ++j) {
      Real red = -cost(j);
      for (std::size_t i = 0; i < n; ++i) red += y[i] * original(j, i);
      reduced_[j] = red;
      for (std::size_t r = 0; r < n; ++r) {
        Real v = 0.0;
        if (j < n) {
          v = B[r][n + j];
        } else {
          const auto& a = columns_[j - n];
          for (std::size_t i = 0; i < n; ++i) v += B[r][n + i] * a[i];
        }
        rows_[r][j] = v;
      }
    }
    for (std::size_t r = 0; r < n; ++r) reduced_[basis_[r]] = 0.0;
  }

  /// Dual value of constraint i (reduced cost of its slack).
  double dual(std::size_t i) const { return static_cast<double>(reduced_[i]); }

  double value(std::size_t col) const {
    for (std::size_t r = 0; r < rows(); ++r)
      if (basis_[r] == col) return static_cast<double>(rhs_[r]);
    return 0.0;
  }

 private:
  void pivot(std::size_t r, std::size_t e) {
    auto& prow = rows_[r];
    const Real inv = 1.0L / prow[e];
    for (Real& v : prow) v *= inv;
    rhs_[r] *= inv;
    prow[e] = 1.0;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (i == r) continue;
      const Real f = rows_[i][e];
      if (f == 0.0) continue;
      auto& row = rows_[i];
      for (std::size_t j = 0; j < row.size(); ++j) row[j] -= f * prow[j];
      row[e] = 0.0;
      rhs_[i] -= f * rhs_[r];
      if (rhs_[i] < 0.0 && rhs_[i] > -1e-13) rhs_[i] = 0.0;
    }
    const Real f = reduced_[e];
    for (std::size_t j = 0; j < reduced_.size(); ++j) reduced_[j] -= f * prow[j];
    reduced_[e] = 0.0;
    basis_[r] = e;
  }

  double original(std::size_t col, std::size_t i) const {
    return col < rows() ? (col == i ? 1.0 : 0.0) : columns_[col - rows()][i];
  }
  double cost(std::size_t col) const { return col < rows() ? 0.0 : cost_[col - rows()]; }

  std::vector<std::vector<Real>> rows_;
  std::vector<double> b_;
  std::vector<double> cost_;
  std::vector<std::vector<double>> columns_;
  std::vector<Real> rhs_;
  std::vector<Real> reduced_;
  std::vector<std::size_t> basis_;
  double eps_;
  double price_eps_;
};

}  // namespace mocs::lp
