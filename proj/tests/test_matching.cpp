#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "mocs/matching.hpp"

using namespace mocs;

namespace {

const DualTables& tables() {
  static const DualTables t(DiscreteF::from_table(compute_F(build_win_model(SeedParams{}), 10)), 20.0);
  return t;
}

// Exhaustive maximum-weight matching: every arrival picks an unused offline
// vertex or nothing.
double brute_force_opt(const Instance& inst) {
  std::vector<bool> used(inst.num_offline(), false);
  std::function<double(std::size_t)> rec = [&](std::size_t j) -> double {
    if (j == inst.num_online()) return 0.0;
    double best = rec(j + 1);
    for (std::size_t i = 0; i < inst.num_offline(); ++i) {
      if (used[i] || inst.weights[j][i] <= 0.0) continue;
      used[i] = true;
      best = std::max(best, inst.weights[j][i] + rec(j + 1));
      used[i] = false;
    }
    return best;
  };
  return rec(0);
}

Instance dense(std::vector<std::vector<double>> w) {
  Instance inst{default_ids(w.empty() ? 0 : w[0].size()), std::move(w)};
  return inst;
}

}  // namespace

TEST(Instance, ValidationAndJson) {
  Rng rng(4);
  const Instance inst = random_uniform(3, 5, 0.5, rng);
  const Instance back = instance_from_json(instance_to_json(inst));
  EXPECT_EQ(back.offline, inst.offline);
  EXPECT_EQ(back.weights, inst.weights);
  EXPECT_THROW((Instance{{"a", "a"}, {}}).validate(), std::invalid_argument);
  EXPECT_THROW((Instance{{"a"}, {{1.0, 2.0}}}).validate(), std::invalid_argument);
  EXPECT_THROW((Instance{{"a"}, {{-1.0}}}).validate(), std::invalid_argument);
  const auto bad = nlohmann::json::parse(R"({"offline":["a"],"arrivals":[{"weights":{"b":1}}]})");
  EXPECT_THROW(instance_from_json(bad), std::invalid_argument);
  EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"offline":["a"]})")), nlohmann::json::exception);
}

TEST(Instance, Generators) {
  const Instance ut = upper_triangular(3, 6);
  EXPECT_EQ(ut.weights[0], (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(ut.weights[5], (std::vector<double>{0, 0, 1}));
  EXPECT_DOUBLE_EQ(opt_offline(ut), 3.0);
  Rng rng(8);
  const Instance dh = duplicate_heavy(4, 10, rng);
  EXPECT_EQ(dh.num_online(), 10u);
  EXPECT_EQ(dh.weights[0], dh.weights[1]);
  for (const auto& row : dh.weights)
    for (double w : row) EXPECT_TRUE(w == 0.0 || w == 1.0 || w == 2.0 || w == 3.0);
}

TEST(OptOffline, SmallCasesAndBruteForce) {
  EXPECT_DOUBLE_EQ(opt_offline(dense({{5.0}})), 5.0);
  EXPECT_DOUBLE_EQ(opt_offline(dense({{1.0, 2.0}, {2.0, 1.0}})), 4.0);
  EXPECT_DOUBLE_EQ(opt_offline(dense({})), 0.0);
  Rng rng(12);
  for (int k = 0; k < 30; ++k) {
    const Instance inst = random_uniform(1 + k % 4, 1 + k % 6, 0.6, rng);
    EXPECT_NEAR(opt_offline(inst), brute_force_opt(inst), 1e-12) << k;
  }
  EXPECT_THROW(opt_offline(Instance{default_ids(kOptMaxOffline + 1), {}}), std::invalid_argument);
}

TEST(DualTables, InterpolationAccuracy) {
  const auto& t = tables();
  EXPECT_NEAR(t.gamma(), gamma_discrete(t.F()), 1e-12);
  for (double x : {0.0, 0.0012, 0.3333, 1.7777, 9.1234, 19.999, 25.0}) {
    EXPECT_NEAR(t.f(x), f_from_F(t.F(), x), 1e-10) << x;
    EXPECT_NEAR(t.a(x), a_from_F(t.F(), x), 1e-10) << x;
  }
  EXPECT_THROW(DualTables(t.F(), 0.0), std::invalid_argument);
}

TEST(Profiles, FreshArrivalAndAccumulation) {
  const auto& t = tables();
  OfflineState s(1);
  apply_arrival(s, {1.0}, {0.3}, t, 6.0);
  EXPECT_NEAR(y_at(s[0], 0.5, t), t.f(0.3), 1e-15);
  EXPECT_EQ(y_at(s[0], 1.5, t), 1.0);
  EXPECT_NEAR(vertex_alpha(s[0], t), t.gamma() - t.a(0.3), 1e-15);
  apply_arrival(s, {1.0}, {0.0}, t, 6.0);
  EXPECT_NEAR(y_at(s[0], 0.5, t), t.f(0.3), 1e-15);
  apply_arrival(s, {1.0}, {0.2}, t, 6.0);
  EXPECT_NEAR(y_at(s[0], 1.0, t), t.f(0.5), 1e-15);
  EXPECT_NEAR(vertex_primal(s[0], t), 1.0 - t.f(0.5), 1e-15);
  EXPECT_THROW(apply_arrival(s, {1.0}, {1.5}, t, 6.0), std::invalid_argument);
  EXPECT_THROW(apply_arrival(s, {1.0, 1.0}, {0.1}, t, 6.0), std::invalid_argument);
}

TEST(Profiles, ResetAboveLowerWeight) {
  const auto& t = tables();
  const double q1 = 0.4, q2 = 0.1, r = 6.0, rho = std::min(r * q2, 1.0);
  OfflineState s(1);
  apply_arrival(s, {1.0}, {q1}, t, r);
  apply_arrival(s, {0.5}, {q2}, t, r);
  ASSERT_EQ(s[0].levels.size(), 2u);
  // Below the new breakpoint the mass accumulates.
  EXPECT_NEAR(level_y(s[0].levels[0], t), t.f(q1 + q2), 1e-15);
  // Above it, the reset keeps y (c absorbs f) but lowers a.
  const auto& up = s[0].levels[1];
  EXPECT_NEAR(level_y(up, t), t.f(q1), 1e-14);
  EXPECT_NEAR(level_alpha(up, t), (1 - rho) * t.a(q1) + rho * t.f(q1) * t.a(0.0), 1e-14);
  EXPECT_NEAR(level_mass(up), 1.0, 1e-15);
  EXPECT_NEAR(vertex_alpha(s[0], t),
              0.5 * (t.gamma() - t.a(q1 + q2)) + 0.5 * (t.gamma() - level_alpha(up, t)), 1e-14);
}

TEST(ChooseP, ZeroWeightsAndSaturatedVertices) {
  const auto& t = tables();
  OfflineState s(3);
  const Choice c = choose_p(s, {0.0, 0.0, 0.0}, t, 6.0);
  EXPECT_EQ(c.p, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(c.beta, 0.0);
  for (int k = 0; k < 3; ++k) apply_arrival(s, {1.0, 0, 0}, {1.0, 0, 0}, t, 6.0);
  // alpha_0 exceeds Gamma * 0.1, so a light edge gets no mass.
  const Choice light = choose_p(s, {0.1, 0.0, 0.0}, t, 6.0);
  EXPECT_EQ(light.p[0], 0.0);
  EXPECT_THROW(choose_p(s, {1.0}, t, 6.0), std::invalid_argument);
}

TEST(ChooseP, SingleFreshVertexTakesAllMass) {
  const auto& t = tables();
  OfflineState s(1);
  const Choice c = choose_p(s, {1.0}, t, 6.0);
  EXPECT_NEAR(c.p[0], 1.0, 1e-6);
  EXPECT_NEAR(c.beta, t.a(1.0), 1e-9);
}

TEST(ChooseP, SymmetricVerticesSplitEvenly) {
  const auto& t = tables();
  OfflineState s(3);
  const Choice c = choose_p(s, {0.7, 0.7, 0.7}, t, 6.0);
  EXPECT_NEAR(c.p[0], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(c.p[1], c.p[0], 1e-12);
  EXPECT_NEAR(c.p[2], c.p[0], 1e-12);
  // Equalized marginal gains: beta* = Gamma w - alpha_i[p_i].
  OfflineState after = s;
  apply_arrival(after, {0.7, 0.7, 0.7}, c.p, t, 6.0);
  EXPECT_NEAR(t.gamma() * 0.7 - vertex_alpha(after[0], t), c.beta, 1e-9);
}

TEST(Plan, DualityHoldsOnRandomInstances) {
  const auto& t = tables();
  Rng rng(2024);
  for (int k = 0; k < 12; ++k) {
    const Instance inst = k % 3 == 0   ? upper_triangular(3, 6 + k)
                          : k % 3 == 1 ? random_uniform(4, 8, 0.5, rng)
                                       : duplicate_heavy(3, 9, rng);
    const MatchingPlan plan = plan_matching(inst, t);
    EXPECT_EQ(plan.violations, 0u) << k;
    EXPECT_GE(plan.primal, plan.dual - 1e-8);
    EXPECT_LE(plan.max_alpha_decrease, 1e-12);
    EXPECT_LE(plan.max_mass_error, 1e-12);
    EXPECT_LE(plan.max_beta_sum_residual, 1e-8);
    EXPECT_GE(plan.dual, t.gamma() * opt_offline(inst) - 1e-8) << "weak duality gives D >= Gamma OPT";
    for (const auto& v : plan.state)
      for (const auto& lv : v.levels) {
        const double y = level_y(lv, t);
        EXPECT_GE(y, -1e-15);
        EXPECT_LE(y, 1.0 + 1e-15);
      }
    for (const auto& st : plan.steps) {
      double s = 0.0;
      for (double p : st.p) s += p;
      EXPECT_LE(s, 1.0 + 1e-9);
    }
  }
}

TEST(Plan, HugeResetRateBreaksDuality) {
  const auto& t = tables();
  MatchingConfig loose;
  loose.r = 50.0;
  loose.throw_on_violation = false;
  Rng rng(2024);
  std::size_t violating = 0;
  Instance first;
  for (int k = 0; k < 120 && violating == 0; ++k) {
    const Instance inst = random_uniform(3 + k % 4, 6 + k % 10, 0.5, rng);
    if (plan_matching(inst, t, loose).violations > 0) {
      ++violating;
      first = inst;
    }
  }
  ASSERT_GT(violating, 0u);
  MatchingConfig strict = loose;
  strict.throw_on_violation = true;
  EXPECT_THROW(plan_matching(first, t, strict), DualityViolation);
}

TEST(Plan, DegenerateInstances) {
  const auto& t = tables();
  const MatchingPlan empty = plan_matching(Instance{default_ids(2), {}}, t);
  EXPECT_EQ(empty.primal, 0.0);
  EXPECT_EQ(empty.dual, 0.0);
  EXPECT_TRUE(plan_to_json(empty).at("steps").empty());
  auto model = build_ocs_model(SeedParams{});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MatchResult res = run_matching(dense({{2.5}}), t, model, seed);
    EXPECT_NEAR(res.plan.steps[0].p[0], 1.0, 1e-6);
    // With p = 1 every draw picks the vertex, so it is always matched.
    EXPECT_EQ(res.realization.winners[0], 0);
    EXPECT_DOUBLE_EQ(res.realization.matched_weight, 2.5);
  }
}
