#include <gtest/gtest.h>

#include <cmath>

#include "mocs/ratios.hpp"

using namespace mocs;

namespace {

// 1 - sum_k F(k) m^k / (m+1)^{k+1}: integrates e^{-x} f(x) term by term.
double gamma_series(const DiscreteF& F) {
  double s = 0.0;
  const double m = F.m;
  for (int k = 0; k < 5000; ++k) s += F.at(k) * std::pow(m / (m + 1.0), k) / (m + 1.0);
  return 1.0 - s;
}

double f_naive(const DiscreteF& F, double x) {
  double s = 0.0;
  for (int k = 0; k < 400; ++k) s += std::exp(-F.m * x + k * std::log(F.m * x + 1e-300) - std::lgamma(k + 1.0)) * F.at(k);
  return s;
}

DiscreteF reference_F() { return DiscreteF::from_table(compute_F(build_win_model(SeedParams{}), 10)); }

}  // namespace

TEST(DiscreteF, GeometricTailAndDifferences) {
  const DiscreteF F = DiscreteF::fahrbach(0.5);
  EXPECT_DOUBLE_EQ(F.at(0), 1.0);
  EXPECT_DOUBLE_EQ(F.at(1), 0.5);
  EXPECT_NEAR(F.at(3), 0.125 * 0.25, 1e-16);
  EXPECT_NEAR(F.delta(0, 2), F.at(2) - 2 * F.at(1) + F.at(0), 1e-16);
  EXPECT_THROW((DiscreteF{{0.9}, 0.1, 2}).validate(), std::invalid_argument);
}

TEST(Gamma, ClosedFormsAndSeries) {
  for (double g : {0.0, 0.1, 0.25, 1.0}) {
    EXPECT_NEAR(gamma_discrete(DiscreteF::fahrbach(g)), gamma_fahrbach(g), 1e-14) << g;
    EXPECT_NEAR(gamma_series(DiscreteF::fahrbach(g)), gamma_fahrbach(g), 1e-13) << g;
  }
  EXPECT_NEAR(gamma_discrete(DiscreteF::independent(6)), 0.5, 1e-14);
  const DiscreteF F = reference_F();
  EXPECT_NEAR(gamma_discrete(F), gamma_series(F), 1e-13);
  EXPECT_NEAR(gamma_discrete(F), 0.5368335929, 1e-9);
  EXPECT_THROW(gamma_fahrbach(1.5), std::invalid_argument);
}

TEST(Gamma, ContinuousAgreesWithDiscrete) {
  const DiscreteF F = reference_F();
  EXPECT_NEAR(gamma_continuous([&](double x) { return f_from_F(F, x); }), gamma_discrete(F), 1e-10);
}

TEST(FFromF, IndependentIsExponential) {
  const DiscreteF F = DiscreteF::independent(6);
  for (double x : {0.0, 0.1, 1.0, 7.5, 40.0}) EXPECT_NEAR(f_from_F(F, x), std::exp(-x), 1e-14 + 1e-12 * std::exp(-x));
}

TEST(FFromF, MatchesNaivePoissonSum) {
  const DiscreteF F = reference_F();
  for (double x : {0.0, 0.05, 0.5, 2.0, 10.0}) EXPECT_NEAR(f_from_F(F, x), f_naive(F, x), 1e-13) << x;
  EXPECT_THROW(f_from_F(F, -1.0), std::invalid_argument);
}

TEST(FFromF, DerivativeMatchesFiniteDifference) {
  const DiscreteF F = reference_F();
  for (double x : {0.1, 1.0, 3.0}) {
    const double h = 1e-5;
    EXPECT_NEAR(f_derivative(F, x, 1), (f_from_F(F, x + h) - f_from_F(F, x - h)) / (2 * h), 1e-8);
  }
}

TEST(AFunction, SeriesMatchesQuadrature) {
  const DiscreteF F = reference_F();
  const RealFn f = [&](double x) { return f_from_F(F, x); };
  for (double x : {0.0, 0.01, 0.3, 1.0, 4.0, 12.0}) EXPECT_NEAR(a_from_F(F, x), a_function(f, x), 1e-11) << x;
  EXPECT_NEAR(a_from_F(F, 0.0), gamma_discrete(F), 1e-12);
}

TEST(Conditions, PassForReferenceAndBaselines) {
  const RatioReport rep = check_conditions(reference_F());
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
  EXPECT_NEAR(rep.m_bound, 6.2873, 1e-4);
  EXPECT_TRUE(check_conditions(DiscreteF::independent(6)).all_pass());
  EXPECT_TRUE(check_conditions(DiscreteF::fahrbach(1.0)).all_pass());
  ASSERT_NE(rep.find("a_gamma"), nullptr);
  EXPECT_EQ(rep.find("nonexistent"), nullptr);
}

TEST(Conditions, EdgeCases) {
  EXPECT_TRUE(std::isinf(rate_bound(0.0, 0.0)));
  EXPECT_TRUE(std::isinf(rate_bound(-1.0, 0.5)));
  EXPECT_NEAR(rate_bound(-0.8, 0.5), 3.0, 1e-12);
  EXPECT_THROW(discounted_integral([](double) { return 1.0; }), std::domain_error);
  EXPECT_THROW(a_function([](double x) { return std::exp(-x); }, -0.5), std::invalid_argument);
}
