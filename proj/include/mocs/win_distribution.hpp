// win_distribution.hpp - the geometric-reset seed process, the win function W,
// exact prefix laws of the desired win probability and the never-win table F.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numerics.hpp"
#include "random.hpp"

namespace mocs {

struct SeedParams {
  double p = 0.48;  // reset probability
  int y_max = 30;   // saturation cap of the counter
  int m = 6;        // arity of the selector

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("SeedParams: p must lie in (0,1)");
    if (y_max < 1) throw std::invalid_argument("SeedParams: y_max must be >= 1");
    if (m < 2) throw std::invalid_argument("SeedParams: m must be >= 2");
  }
};

/// Finite discrete law: atoms sorted strictly increasing by value.
class ExactDistribution {
 public:
  struct Atom {
    double value;
    double mass;
  };

  ExactDistribution() = default;

  /// Sorts, merges values closer than `merge_tol` (keeping the smallest
  /// representative) and drops zero-mass atoms.
  static ExactDistribution from_unsorted(std::vector<Atom> atoms, double merge_tol = 1e-14) {
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.value < b.value; });
    ExactDistribution d;
    for (const Atom& a : atoms) {
      if (!(a.mass > 0.0)) continue;
      if (!d.atoms_.empty() && a.value - d.atoms_.back().value <= merge_tol)
        d.atoms_.back().mass += a.mass;
      else
        d.atoms_.push_back(a);
    }
    return d;
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  double total_mass() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.mass;
    return s;
  }
  double mean() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.mass * a.value;
    return s;
  }
  /// E[(X - t)_+]
  double expected_excess(double t) const {
    double s = 0.0;
    for (const Atom& a : atoms_)
      if (a.value > t) s += a.mass * (a.value - t);
    return s;
  }

  /// Index of the atom whose value equals `v` within `tol`, or -1.
  long find(double v, double tol = 1e-12) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), v,
                               [](const Atom& a, double x) { return a.value < x; });
    long best = -1;
    double best_d = tol;
    for (auto c : {it, it == atoms_.begin() ? it : it - 1}) {
      if (c == atoms_.end()) continue;
      const double d = std::fabs(c->value - v);
      if (d <= best_d) {
        best_d = d;
        best = static_cast<long>(c - atoms_.begin());
      }
    }
    return best;
  }

  /// Mass strictly above atom i, summed from the top (accurate near value 1).
  std::vector<double> upper_tails() const {
    std::vector<double> up(atoms_.size());
    double acc = 0.0;
    for (std::size_t i = atoms_.size(); i-- > 0;) {
      up[i] = acc;
      acc += atoms_[i].mass;
    }
    return up;
  }

  void validate(double tol = 1e-12) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!(atoms_[i].mass > 0.0)) throw std::logic_error("ExactDistribution: nonpositive mass");
      if (i > 0 && !(atoms_[i].value > atoms_[i - 1].value))
        throw std::logic_error("ExactDistribution: values not strictly increasing");
    }
    if (std::fabs(total_mass() - 1.0) > tol)
      throw std::logic_error("ExactDistribution: masses do not sum to 1");
  }

 private:
  std::vector<Atom> atoms_;
};

struct WinModel {
  SeedParams params;
  // Index v + 1 for v in {-1, ..., y_max + 1}.
  std::vector<double> G;
  std::vector<double> G_upper;  // 1 - G, kept separately for tail accuracy
  // Index y + 1 for y in {-1, ..., y_max}.
  std::vector<double> W;

  double g(int v) const {
    v = std::clamp(v, -1, params.y_max + 1);
    return G[static_cast<std::size_t>(v + 1)];
  }
  /// Win probability of seed value y (capped at y_max).
  double win(int y) const {
    y = std::clamp(y, -1, params.y_max);
    return W[static_cast<std::size_t>(y + 1)];
  }
};

inline WinModel build_win_model(const SeedParams& params) {
  params.validate();
  const double p = params.p;
  const int ym = params.y_max;
  WinModel model;
  model.params = params;
  model.G.resize(static_cast<std::size_t>(ym + 3));
  model.G_upper.resize(model.G.size());
  model.G[0] = 0.0;
  model.G_upper[0] = 1.0;
  for (int v = 0; v <= ym + 1; ++v) {
    const double up = p * std::pow(1.0 - p, v);
    model.G_upper[static_cast<std::size_t>(v + 1)] = up;
    model.G[static_cast<std::size_t>(v + 1)] = 1.0 - up;
  }
  // W(y) is the mean of u^(m-1) over u in [G(y), G(y+1)], evaluated from the
  // upper tails.
  model.W.resize(static_cast<std::size_t>(ym + 2));
  for (int y = -1; y <= ym; ++y) {
    const double tail_hi = model.G_upper[static_cast<std::size_t>(y + 2)];
    const double width = (y == -1) ? 1.0 - p : p * p * std::pow(1.0 - p, y);
    model.W[static_cast<std::size_t>(y + 1)] =
        num::power_mean_upper(tail_hi, width, static_cast<double>(params.m));
  }
  return model;
}

/// Law of the initial counter: Geo(p) truncated at y_max (tail mass merged).
inline std::vector<double> initial_z_law(const SeedParams& params) {
  std::vector<double> law(static_cast<std::size_t>(params.y_max + 1));
  for (int v = 0; v < params.y_max; ++v) law[static_cast<std::size_t>(v)] = params.p * std::pow(1.0 - params.p, v);
  law.back() = std::pow(1.0 - params.p, params.y_max);
  return law;
}

/// Streaming sampler of the seed process; one step per appearance.
class SeedProcess {
 public:
  SeedProcess(const SeedParams& params, Rng rng) : params_(params), rng_(std::move(rng)) {
    z_ = 0;
    while (z_ < params_.y_max && !bernoulli(rng_, params_.p)) ++z_;
  }
  int z() const { return z_; }
  /// Emits y_k and advances the counter.
  int next() {
    if (bernoulli(rng_, params_.p)) {
      const int y = z_;
      z_ = 0;
      return y;
    }
    z_ = std::min(z_ + 1, params_.y_max);
    return -1;
  }

 private:
  SeedParams params_;
  Rng rng_;
  int z_;
};

struct SeedPath {
  std::vector<int> y;
  std::vector<int> z;  // counter value before step k
};

inline SeedPath seed_sample(const SeedParams& params, int horizon, Rng& rng) {
  params.validate();
  if (horizon < 1) throw std::invalid_argument("seed_sample: horizon must be >= 1");
  SeedProcess proc(params, Rng(rng()));
  SeedPath path;
  path.y.reserve(static_cast<std::size_t>(horizon));
  path.z.reserve(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    path.z.push_back(proc.z());
    path.y.push_back(proc.next());
  }
  return path;
}

/// 1 - prod (1 - x_l), multiplied left to right. The selector evaluates the
/// product in the same order so enumerated and online values agree bit for bit.
template <class It>
double desired_win(It first, It last) {
  double prod = 1.0;
  for (; first != last; ++first) prod *= (1.0 - *first);
  return 1.0 - prod;
}

/// Exact law of w^(r) = 1 - prod_{l<=r} (1 - W(y_l)).
inline ExactDistribution enumerate_prefix(const WinModel& model, int r) {
  const SeedParams& sp = model.params;
  if (r < 1 || r > sp.m - 1) throw std::invalid_argument("enumerate_prefix: r must lie in [1, m-1]");
  const std::vector<double> z0 = initial_z_law(sp);
  std::vector<ExactDistribution::Atom> atoms;
  atoms.reserve(z0.size() << r);
  std::vector<double> xs(static_cast<std::size_t>(r));
  // Depth-first over reset choices.
  struct Rec {
    const WinModel& model;
    int r;
    std::vector<double>& xs;
    std::vector<ExactDistribution::Atom>& atoms;
    void operator()(int z, int depth, double mass) {
      if (depth == r) {
        atoms.push_back({desired_win(xs.begin(), xs.end()), mass});
        return;
      }
      const double p = model.params.p;
      xs[static_cast<std::size_t>(depth)] = model.win(z);
      (*this)(0, depth + 1, mass * p);
      xs[static_cast<std::size_t>(depth)] = model.win(-1);
      (*this)(std::min(z + 1, model.params.y_max), depth + 1, mass * (1.0 - p));
    }
  } rec{model, r, xs, atoms};
  for (std::size_t z = 0; z < z0.size(); ++z) rec(static_cast<int>(z), 0, z0[z]);
  return ExactDistribution::from_unsorted(std::move(atoms));
}

struct FTable {
  SeedParams params;
  int n_max = 0;
  std::vector<double> head;  // F(0..n_max)
  double tail_ratio = 0.0;   // F(n_max) / F(n_max - 1)

  /// Exact value for n <= n_max, geometric upper bound beyond.
  double bound(int n) const {
    if (n < 0) throw std::invalid_argument("FTable::bound: negative n");
    if (n <= n_max) return head[static_cast<std::size_t>(n)];
    return head.back() * std::pow(tail_ratio, n - n_max);
  }
};

/// F(n) = E[prod_{l<=n} (1 - W(y_l))] by dynamic programming over z.
inline FTable compute_F(const WinModel& model, int n_max) {
  if (n_max < 2) throw std::invalid_argument("compute_F: n_max must be >= 2");
  const SeedParams& sp = model.params;
  std::vector<double> state = initial_z_law(sp), next(state.size());
  FTable table;
  table.params = sp;
  table.n_max = n_max;
  const double stay = (1.0 - sp.p) * (1.0 - model.win(-1));
  for (int n = 0; n <= n_max; ++n) {
    double total = 0.0;
    for (double s : state) total += s;
    table.head.push_back(total);
    std::fill(next.begin(), next.end(), 0.0);
    for (int z = 0; z <= sp.y_max; ++z) {
      const double s = state[static_cast<std::size_t>(z)];
      next[0] += s * sp.p * (1.0 - model.win(z));
      next[static_cast<std::size_t>(std::min(z + 1, sp.y_max))] += s * stay;
    }
    state.swap(next);
  }
  table.tail_ratio = table.head[static_cast<std::size_t>(n_max)] / table.head[static_cast<std::size_t>(n_max - 1)];
  return table;
}

struct SmallCertificate {
  int r = 0;
  bool holds = false;
  double min_gap = 0.0;
  double argmin = 0.0;
};

namespace detail {
// Evaluates g on an interval of t where Pr[w > t] = S and E[w; w > t] = A.
inline double small_gap(double t, int m, int r, double S, double A) {
  const double c = static_cast<double>(m - r) / m;
  const double q = static_cast<double>(m) / (m - r);
  return 1.0 - t - c * (1.0 - std::pow(t, q)) - (A - t * S);
}
}  // namespace detail

/// g(t) = 1 - t - ((m-r)/m)(1 - t^{m/(m-r)}) - E[(w - t)_+] at a single t.
inline double small_gap_at(const ExactDistribution& w, int m, int r, double t) {
  const double c = static_cast<double>(m - r) / m;
  const double q = static_cast<double>(m) / (m - r);
  return 1.0 - t - c * (1.0 - std::pow(t, q)) - w.expected_excess(t);
}

/// Minimizes g over [0,1]. Between consecutive support points g is convex
/// with derivative -1 + t^{r/(m-r)} + Pr[w > t], so its minimum on each
/// piece is at an endpoint or at t* = (1 - Pr[w > t])^{(m-r)/r}.
inline SmallCertificate check_small(const WinModel& model, int r, double tol = 1e-12) {
  const int m = model.params.m;
  const ExactDistribution w = enumerate_prefix(model, r);
  std::vector<double> knots{0.0};
  for (const auto& a : w.atoms())
    if (a.value > 0.0 && a.value < 1.0) knots.push_back(a.value);
  knots.push_back(1.0);

  // Suffix sums over atoms: S = mass above, A = first moment above.
  const auto& atoms = w.atoms();
  std::vector<double> S(atoms.size() + 1, 0.0), A(atoms.size() + 1, 0.0);
  for (std::size_t i = atoms.size(); i-- > 0;) {
    S[i] = S[i + 1] + atoms[i].mass;
    A[i] = A[i + 1] + atoms[i].mass * atoms[i].value;
  }

  SmallCertificate cert;
  cert.r = r;
  cert.min_gap = std::numeric_limits<double>::infinity();
  std::size_t first_above = 0;  // first atom with value > lo
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double lo = knots[k], hi = knots[k + 1];
    while (first_above < atoms.size() && atoms[first_above].value <= lo) ++first_above;
    const double s = S[first_above], a = A[first_above];
    auto consider = [&](double t) {
      const double g = detail::small_gap(t, m, r, s, a);
      if (g < cert.min_gap) {
        cert.min_gap = g;
        cert.argmin = t;
      }
    };
    consider(lo);
    consider(hi);
    const double t_star = std::pow(std::max(0.0, 1.0 - s), static_cast<double>(m - r) / r);
    if (t_star > lo && t_star < hi) consider(t_star);
  }
  cert.holds = cert.min_gap >= -tol;
  return cert;
}

}  // namespace mocs
