// matching.hpp - primal-dual edge-weighted online bipartite matching driven by
// the continuous selector, with per-step duality bookkeeping and an exact
// offline optimum.
//
// For every offline vertex i and weight level w the state tracks the law of
// (x_i(w), c_i(w)) as a finite profile of atoms. From it:
//   y_i(w)  = E[c f(x)]        (probability i is still unmatched at level w)
//   a_i(w)  = E[c a(x)]
//   alpha_i = integral (Gamma - a_i(w)) dw,   P_i = integral (1 - y_i(w)) dw.
// Profiles are step functions of w; levels above the largest breakpoint are
// pristine (one atom x = 0, c = 1) and contribute nothing.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ocs.hpp"
#include "random.hpp"
#include "ratios.hpp"

namespace mocs {

// ---------------------------------------------------------------- instances

struct Instance {
  std::vector<std::string> offline;          // offline vertex ids
  std::vector<std::vector<double>> weights;  // weights[j][i], 0 = no edge

  std::size_t num_offline() const { return offline.size(); }
  std::size_t num_online() const { return weights.size(); }

  void validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& id : offline)
      if (!seen.insert(id).second) throw std::invalid_argument("Instance: duplicate offline id '" + id + "'");
    for (const auto& row : weights) {
      if (row.size() != offline.size()) throw std::invalid_argument("Instance: weight row has wrong length");
      for (double w : row)
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("Instance: weights must be finite and >= 0");
    }
  }
};

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json arrivals = nlohmann::json::array();
  for (const auto& row : inst.weights) {
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i] > 0.0) w[inst.offline[i]] = row[i];
    arrivals.push_back({{"weights", w}});
  }
  return {{"offline", inst.offline}, {"arrivals", arrivals}};
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  for (const auto& id : j.at("offline")) inst.offline.push_back(id.is_string() ? id.get<std::string>() : id.dump());
  for (const auto& arrival : j.at("arrivals")) {
    std::vector<double> row(inst.offline.size(), 0.0);
    for (const auto& [key, value] : arrival.at("weights").items()) {
      const auto it = std::find(inst.offline.begin(), inst.offline.end(), key);
      if (it == inst.offline.end()) throw std::invalid_argument("Instance: unknown offline id '" + key + "'");
      row[static_cast<std::size_t>(it - inst.offline.begin())] = value.get<double>();
    }
    inst.weights.push_back(std::move(row));
  }
  inst.validate();
  return inst;
}

inline std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("u" + std::to_string(i));
  return ids;
}

/// Arrivals come in L groups; group g has weight 1 to offline vertices g..L-1.
inline Instance upper_triangular(std::size_t L, std::size_t R) {
  if (L == 0 || R < L) throw std::invalid_argument("upper_triangular: need 1 <= L <= R");
  Instance inst{default_ids(L), {}};
  for (std::size_t j = 0; j < R; ++j) {
    const std::size_t g = j * L / R;
    std::vector<double> row(L, 0.0);
    for (std::size_t i = g; i < L; ++i) row[i] = 1.0;
    inst.weights.push_back(std::move(row));
  }
  return inst;
}

/// Each edge present with probability `density`, weight uniform on (0, 1].
inline Instance random_uniform(std::size_t L, std::size_t R, double density, Rng& rng) {
  Instance inst{default_ids(L), {}};
  for (std::size_t j = 0; j < R; ++j) {
    std::vector<double> row(L, 0.0);
    for (std::size_t i = 0; i < L; ++i)
      if (bernoulli(rng, density)) row[i] = 1.0 - uniform01(rng);
    inst.weights.push_back(std::move(row));
  }
  return inst;
}

/// Weights drawn from {1, 2, 3}; every arrival is repeated 2 or 3 times in a row.
inline Instance duplicate_heavy(std::size_t L, std::size_t R, Rng& rng) {
  Instance inst{default_ids(L), {}};
  while (inst.weights.size() < R) {
    std::vector<double> row(L, 0.0);
    for (std::size_t i = 0; i < L; ++i)
      if (bernoulli(rng, 0.6)) row[i] = 1.0 + static_cast<double>(rng() % 3);
    const std::size_t copies = 2 + rng() % 2;
    for (std::size_t c = 0; c < copies && inst.weights.size() < R; ++c) inst.weights.push_back(row);
  }
  return inst;
}

// ------------------------------------------------------------ offline optimum

inline constexpr std::size_t kOptMaxOffline = 12;
inline constexpr std::size_t kOptMaxOnline = 30;

/// Maximum-weight bipartite matching (Hungarian algorithm, O(n^3)). Under free
/// disposal this is the offline optimum.
inline double opt_offline(const Instance& inst) {
  inst.validate();
  const std::size_t L = inst.num_offline(), R = inst.num_online();
  if (L > kOptMaxOffline || R > kOptMaxOnline)
    throw std::invalid_argument("opt_offline: instance larger than 12 x 30");
  const std::size_t n = std::max(L, R);
  if (n == 0) return 0.0;
  // Square cost matrix (1-based), rows = online, cols = offline, cost = -w.
  auto cost = [&](std::size_t row, std::size_t col) {
    return (row <= R && col <= L) ? -inst.weights[row - 1][col - 1] : 0.0;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t col = 1; col <= n; ++col) total -= cost(match[col], col);
  return total;
}

// ------------------------------------------------------- tabulated f and a

/// f and a on a uniform grid, evaluated by cubic Hermite interpolation with
/// exact node derivatives (a' = f' + a). Beyond the grid both are computed
/// directly.
class DualTables {
 public:
  DualTables(DiscreteF F, double x_max, double step = 0.005) : F_(std::move(F)), step_(step) {
    F_.validate();
    if (!(step > 0.0) || !(x_max > 0.0)) throw std::invalid_argument("DualTables: bad grid");
    const std::size_t n = static_cast<std::size_t>(std::ceil(x_max / step)) + 1;
    f_.resize(n);
    fp_.resize(n);
    a_.resize(n);
    ap_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double x = static_cast<double>(k) * step;
      f_[k] = f_from_F(F_, x);
      fp_[k] = f_derivative(F_, x, 1);
      a_[k] = f_[k] - discounted_integral_F(F_, x);
      ap_[k] = fp_[k] + a_[k];
    }
    x_max_ = static_cast<double>(n - 1) * step;
    gamma_ = a_[0];
  }

  double gamma() const { return gamma_; }
  double x_max() const { return x_max_; }
  const DiscreteF& F() const { return F_; }

  double f(double x) const { return x > x_max_ ? f_from_F(F_, x) : interp(f_, fp_, x); }
  double a(double x) const { return x > x_max_ ? a_from_F(F_, x) : interp(a_, ap_, x); }

 private:
  double interp(const std::vector<double>& v, const std::vector<double>& d, double x) const {
    const double s = x / step_;
    std::size_t k = static_cast<std::size_t>(s);
    if (k >= v.size() - 1) k = v.size() - 2;
    const double t = s - static_cast<double>(k);
    if (t == 0.0) return v[k];
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v[k] + (t3 - 2 * t2 + t) * step_ * d[k] + (-2 * t3 + 3 * t2) * v[k + 1] +
           (t3 - t2) * step_ * d[k + 1];
  }

  DiscreteF F_;
  double step_;
  double x_max_ = 0.0;
  double gamma_ = 0.0;
  std::vector<double> f_, fp_, a_, ap_;
};

// ------------------------------------------------------------------ profiles

struct ProfileAtom {
  double x = 0.0;     // accumulated mass
  double q = 1.0;     // probability
  double cbar = 1.0;  // E[c | atom]
};

/// Profile on the weight interval (previous hi, hi].
struct WeightLevel {
  double hi = 0.0;
  std::vector<ProfileAtom> atoms;
};

inline constexpr double kPruneMass = 1e-14;

struct VertexState {
  std::vector<WeightLevel> levels;  // sorted by hi; pristine above the last

  double lo(std::size_t k) const { return k == 0 ? 0.0 : levels[k - 1].hi; }

  /// Index of the level containing w, or levels.size() if w is pristine.
  std::size_t level_of(double w) const {
    std::size_t k = 0;
    while (k < levels.size() && levels[k].hi < w) ++k;
    return k;
  }

  void insert_breakpoint(double w) {
    if (!(w > 0.0)) return;
    const std::size_t k = level_of(w);
    if (k < levels.size() && levels[k].hi == w) return;
    WeightLevel fresh{w, {ProfileAtom{}}};
    if (k < levels.size()) fresh.atoms = levels[k].atoms;
    levels.insert(levels.begin() + static_cast<std::ptrdiff_t>(k), std::move(fresh));
  }
};

inline double level_y(const WeightLevel& lv, const DualTables& t) {
  double y = 0.0;
  for (const auto& at : lv.atoms) y += at.q * at.cbar * t.f(at.x);
  return y;
}

inline double level_alpha(const WeightLevel& lv, const DualTables& t) {
  double a = 0.0;
  for (const auto& at : lv.atoms) a += at.q * at.cbar * t.a(at.x);
  return a;
}

inline double level_mass(const WeightLevel& lv) {
  double s = 0.0;
  for (const auto& at : lv.atoms) s += at.q;
  return s;
}

/// y_i(w): 1 at pristine levels (and at w <= 0, which is never matched).
inline double y_at(const VertexState& v, double w, const DualTables& t) {
  const std::size_t k = v.level_of(w);
  return (w <= 0.0 || k == v.levels.size()) ? 1.0 : level_y(v.levels[k], t);
}

/// alpha_i = integral (Gamma - a_i(w)) dw.
inline double vertex_alpha(const VertexState& v, const DualTables& t) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.levels.size(); ++k)
    s += (v.levels[k].hi - v.lo(k)) * (t.gamma() - level_alpha(v.levels[k], t));
  return s;
}

/// P_i = integral (1 - y_i(w)) dw.
inline double vertex_primal(const VertexState& v, const DualTables& t) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.levels.size(); ++k)
    s += (v.levels[k].hi - v.lo(k)) * (1.0 - level_y(v.levels[k], t));
  return s;
}

/// Primal update of one offline vertex for an arrival with edge weight w and
/// assigned mass p: levels <= w shift x by p; levels > w reset with
/// probability min(r p, 1), the reset part moving to x = 0 with c -> c f(x).
inline void apply_vertex(VertexState& v, double w, double p, const DualTables& t, double r) {
  if (!(p > 0.0)) return;
  v.insert_breakpoint(w);
  const double rho = std::min(r * p, 1.0);
  for (auto& lv : v.levels) {
    if (lv.hi <= w) {
      for (auto& at : lv.atoms) at.x += p;
      continue;
    }
    double reset_q = 0.0, reset_c = 0.0;
    for (auto& at : lv.atoms) {
      reset_q += rho * at.q;
      reset_c += rho * at.q * at.cbar * t.f(at.x);
      at.q *= 1.0 - rho;
    }
    auto zero = std::find_if(lv.atoms.begin(), lv.atoms.end(), [](const ProfileAtom& at) { return at.x == 0.0; });
    if (zero == lv.atoms.end()) {
      lv.atoms.push_back(ProfileAtom{0.0, 0.0, 0.0});
      zero = lv.atoms.end() - 1;
    }
    const double q = zero->q + reset_q;
    zero->cbar = q > 0.0 ? std::clamp((zero->q * zero->cbar + reset_c) / q, 0.0, 1.0) : 0.0;
    zero->q = q;
    lv.atoms.erase(std::remove_if(lv.atoms.begin(), lv.atoms.end(),
                                  [](const ProfileAtom& at) { return at.q < kPruneMass; }),
                   lv.atoms.end());
    const double mass = level_mass(lv);
    for (auto& at : lv.atoms) at.q /= mass;
  }
}

using OfflineState = std::vector<VertexState>;

/// Primal update of every offline vertex for arrival weights w and masses p.
inline void apply_arrival(OfflineState& state, const std::vector<double>& w, const std::vector<double>& p,
                          const DualTables& t, double r) {
  if (w.size() != state.size() || p.size() != state.size())
    throw std::invalid_argument("apply_arrival: size mismatch");
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (p[i] < 0.0 || p[i] > 1.0) throw std::invalid_argument("apply_arrival: p entries must lie in [0, 1]");
    apply_vertex(state[i], w[i], p[i], t, r);
  }
}

// ---------------------------------------------------------------- choose p

struct ChooseConfig {
  double tol_p = 1e-12;
  double tol_beta = 1e-12;
  int max_iter = 200;
};

struct Choice {
  std::vector<double> p;
  double beta = 0.0;  // the bisection's beta*
  int outer_iterations = 0;
};

namespace detail {

/// alpha_i after the arrival with mass p, by simulation on a scratch copy.
inline double alpha_after(const VertexState& v, double w, double p, const DualTables& t, double r) {
  VertexState scratch = v;
  apply_vertex(scratch, w, p, t, r);
  return vertex_alpha(scratch, t);
}

}  // namespace detail

/// Picks p^{(j)}: p_i[beta] is the least p with Gamma w_ij - alpha_i[p] <= beta;
/// beta* = 0 if sum p_i[0] <= 1, otherwise the beta with sum p_i[beta] = 1.
inline Choice choose_p(const OfflineState& state, const std::vector<double>& w, const DualTables& t, double r,
                       const ChooseConfig& cfg = {}) {
  const std::size_t L = state.size();
  if (w.size() != L) throw std::invalid_argument("choose_p: size mismatch");
  const double G = t.gamma();
  std::vector<double> g0(L, 0.0), g1(L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    if (!(w[i] > 0.0)) continue;
    g0[i] = G * w[i] - vertex_alpha(state[i], t);
    g1[i] = G * w[i] - detail::alpha_after(state[i], w[i], 1.0, t, r);
  }
  constexpr double kAboveOne = std::numeric_limits<double>::infinity();
  auto inner = [&](std::size_t i, double beta) {
    if (!(w[i] > 0.0) || g0[i] <= beta) return 0.0;
    if (g1[i] > beta) return kAboveOne;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; hi - lo > cfg.tol_p; ++it) {
      if (it >= cfg.max_iter) throw std::runtime_error("choose_p: inner bisection did not converge");
      const double mid = 0.5 * (lo + hi);
      (G * w[i] - detail::alpha_after(state[i], w[i], mid, t, r) > beta ? lo : hi) = mid;
    }
    return hi;
  };
  auto solve = [&](double beta, std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < L; ++i) s += (p[i] = inner(i, beta));
    return s;
  };

  Choice out;
  out.p.assign(L, 0.0);
  if (solve(0.0, out.p) <= 1.0) return out;
  double lo = 0.0, hi = *std::max_element(g0.begin(), g0.end());
  std::vector<double> p(L);
  while (hi - lo > cfg.tol_beta * std::max(1.0, hi)) {
    if (++out.outer_iterations > cfg.max_iter) throw std::runtime_error("choose_p: outer bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    (solve(mid, p) > 1.0 ? lo : hi) = mid;
  }
  solve(hi, out.p);
  out.beta = hi;
  return out;
}

// --------------------------------------------------------------- the run

struct MatchingConfig {
  double r = 0.0;  // reset rate; 0 means m
  ChooseConfig choose;
  double duality_tol = 1e-8;
  bool throw_on_violation = true;
};

struct StepRecord {
  std::vector<double> p;
  double beta = 0.0;       // beta_j = max(0, max_i Gamma w_ij - alpha_i)
  double beta_star = 0.0;  // the bisection's beta*
  double beta_sum_residual = 0.0;  // beta_j - sum_i p_i (Gamma w_ij - alpha_i)
  double primal = 0.0;     // P after the step
  double dual = 0.0;       // D after the step
  double delta_primal = 0.0;
  double delta_dual = 0.0;
};

struct DualityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MatchingPlan {
  double gamma = 0.0;
  double r = 0.0;
  std::vector<StepRecord> steps;
  std::vector<double> alpha;  // final alpha_i
  OfflineState state;         // final profiles
  double primal = 0.0, dual = 0.0;
  double min_step_slack = std::numeric_limits<double>::infinity();         // min_j dP - dD
  double min_feasibility_slack = std::numeric_limits<double>::infinity();  // min alpha_i + beta_j - Gamma w_ij
  double max_alpha_decrease = 0.0;
  double max_mass_error = 0.0;
  double max_beta_sum_residual = 0.0;
  std::size_t violations = 0;
};

/// The deterministic part of the algorithm: p^{(j)}, duals and profiles.
inline MatchingPlan plan_matching(const Instance& inst, const DualTables& t, const MatchingConfig& cfg = {}) {
  inst.validate();
  const std::size_t L = inst.num_offline();
  MatchingPlan plan;
  plan.gamma = t.gamma();
  plan.r = cfg.r > 0.0 ? cfg.r : static_cast<double>(t.F().m);
  plan.state.assign(L, VertexState{});
  plan.alpha.assign(L, 0.0);
  const double G = plan.gamma;

  auto fail = [&](const std::string& what, std::size_t j) {
    ++plan.violations;
    if (!cfg.throw_on_violation) return;
    std::ostringstream os;
    os.precision(17);
    os << "matching: " << what << " at arrival " << j << "; weights [";
    for (double w : inst.weights[j]) os << ' ' << w;
    os << " ]; p [";
    for (double p : plan.steps.back().p) os << ' ' << p;
    os << " ]; alpha [";
    for (double a : plan.alpha) os << ' ' << a;
    os << " ]; beta " << plan.steps.back().beta << "; dP " << plan.steps.back().delta_primal << "; dD "
       << plan.steps.back().delta_dual;
    throw DualityViolation(os.str());
  };

  std::vector<double> primal_i(L, 0.0);
  for (std::size_t j = 0; j < inst.num_online(); ++j) {
    const auto& w = inst.weights[j];
    StepRecord rec;
    Choice ch = choose_p(plan.state, w, t, plan.r, cfg.choose);
    rec.beta_star = ch.beta;
    apply_arrival(plan.state, w, ch.p, t, plan.r);

    double d_alpha = 0.0, d_primal = 0.0, beta = 0.0, beta_sum = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      const double a_new = vertex_alpha(plan.state[i], t);
      const double p_new = vertex_primal(plan.state[i], t);
      plan.max_alpha_decrease = std::max(plan.max_alpha_decrease, plan.alpha[i] - a_new);
      d_alpha += a_new - plan.alpha[i];
      d_primal += p_new - primal_i[i];
      plan.alpha[i] = a_new;
      primal_i[i] = p_new;
      beta = std::max(beta, G * w[i] - a_new);
      beta_sum += ch.p[i] * (G * w[i] - a_new);
      for (const auto& lv : plan.state[i].levels)
        plan.max_mass_error = std::max(plan.max_mass_error, std::fabs(level_mass(lv) - 1.0));
    }
    rec.p = std::move(ch.p);
    rec.beta = beta;
    rec.beta_sum_residual = beta - beta_sum;
    rec.delta_primal = d_primal;
    rec.delta_dual = d_alpha + beta;
    plan.primal += d_primal;
    plan.dual += rec.delta_dual;
    rec.primal = plan.primal;
    rec.dual = plan.dual;
    plan.steps.push_back(std::move(rec));
    const StepRecord& s = plan.steps.back();
    plan.max_beta_sum_residual = std::max(plan.max_beta_sum_residual, std::fabs(s.beta_sum_residual));

    plan.min_step_slack = std::min(plan.min_step_slack, s.delta_primal - s.delta_dual);
    if (s.delta_primal - s.delta_dual < -cfg.duality_tol) fail("reverse weak duality violated", j);
    for (std::size_t i = 0; i < L; ++i) {
      const double slack = plan.alpha[i] + beta - G * w[i];
      plan.min_feasibility_slack = std::min(plan.min_feasibility_slack, slack);
      if (slack < -cfg.duality_tol) fail("dual feasibility violated", j);
    }
  }
  // Feasibility with the final alphas (alpha only grows, so this is implied
  // up to rounding; checked anyway).
  for (std::size_t j = 0; j < plan.steps.size(); ++j)
    for (std::size_t i = 0; i < L; ++i) {
      const double slack = plan.alpha[i] + plan.steps[j].beta - G * inst.weights[j][i];
      plan.min_feasibility_slack = std::min(plan.min_feasibility_slack, slack);
      if (slack < -cfg.duality_tol) fail("final dual feasibility violated", j);
    }
  return plan;
}

struct Realization {
  double matched_weight = 0.0;            // free disposal: sum of per-vertex maxima
  std::vector<long> winners;              // offline index per arrival, -1 = none
  std::vector<double> best;               // per offline vertex
};

/// One random execution of a plan: every arrival's p^{(j)} goes to the selector.
inline Realization realize(const Instance& inst, const MatchingPlan& plan, OCSState& ocs) {
  Realization out;
  out.best.assign(inst.num_offline(), 0.0);
  std::vector<std::pair<ElementId, double>> probs;
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    probs.clear();
    const auto& p = plan.steps[j].p;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) probs.emplace_back(static_cast<ElementId>(i), p[i]);
    long winner = -1;
    if (!probs.empty()) {
      const ElementId id = ocs.continuous_step(probs);
      if (id != kDummy) winner = static_cast<long>(id);
    }
    out.winners.push_back(winner);
    if (winner >= 0) {
      double& b = out.best[static_cast<std::size_t>(winner)];
      b = std::max(b, inst.weights[j][static_cast<std::size_t>(winner)]);
    }
  }
  for (double b : out.best) out.matched_weight += b;
  return out;
}

struct MatchResult {
  MatchingPlan plan;
  Realization realization;
};

inline MatchResult run_matching(const Instance& inst, const DualTables& t,
                                const std::shared_ptr<const OCSModel>& model, std::uint64_t seed,
                                const MatchingConfig& cfg = {}) {
  if (model->m() != t.F().m) throw std::invalid_argument("run_matching: selector and F disagree on m");
  MatchResult res{plan_matching(inst, t, cfg), {}};
  OCSState ocs(model, seed);
  res.realization = realize(inst, res.plan, ocs);
  return res;
}

inline nlohmann::json plan_to_json(const MatchingPlan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : plan.steps)
    steps.push_back({{"p", s.p},
                     {"beta", s.beta},
                     {"beta_star", s.beta_star},
                     {"primal", s.primal},
                     {"dual", s.dual},
                     {"delta_primal", s.delta_primal},
                     {"delta_dual", s.delta_dual}});
  return {{"gamma", plan.gamma},
          {"r", plan.r},
          {"primal", plan.primal},
          {"dual", plan.dual},
          {"alpha", plan.alpha},
          {"min_step_slack", plan.steps.empty() ? 0.0 : plan.min_step_slack},
          {"min_feasibility_slack", plan.steps.empty() ? 0.0 : plan.min_feasibility_slack},
          {"violations", plan.violations},
          {"steps", steps}};
}

}  // namespace mocs
