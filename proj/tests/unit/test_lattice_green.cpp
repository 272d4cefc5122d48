#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dpolymer/lattice_green.hpp"
#include "dpolymer/oracle.hpp"

using namespace dpolymer;

namespace {

double mass(const SiteMap& f) {
  double s = 0.0;
  for (const auto& [x, v] : f) s += v;
  return s;
}

double closed_walk_probability(int d, int n) {
  return static_cast<double>(oracle::count_closed_walks(d, 2 * n)) / std::pow(2.0 * d, 2 * n);
}

}  // namespace

TEST(Convolve, OneStepInOneDimension) {
  const SiteMap out = convolve({{Site{}, 1.0}}, WalkKernel(1));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out.at(make_site({-1})), 0.5);
  EXPECT_DOUBLE_EQ(out.at(make_site({1})), 0.5);
}

TEST(Convolve, OneStepInTwoDimensions) {
  const SiteMap out = convolve({{Site{}, 1.0}}, WalkKernel(2));
  ASSERT_EQ(out.size(), 4u);
  for (const Site& x : {make_site({1, 0}), make_site({-1, 0}), make_site({0, 1}), make_site({0, -1})})
    EXPECT_DOUBLE_EQ(out.at(x), 0.25);
}

TEST(Convolve, TwoStepsMatchTheBinomialLaw) {
  const SiteMap out = convolve_power({{Site{}, 1.0}}, WalkKernel(1), 2);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_DOUBLE_EQ(out.at(make_site({-2})), 0.25);
  EXPECT_DOUBLE_EQ(out.at(make_site({0})), 0.5);
  EXPECT_DOUBLE_EQ(out.at(make_site({2})), 0.25);
}

TEST(Convolve, EmptyInputGivesEmptyOutput) { EXPECT_TRUE(convolve({}, WalkKernel(3)).empty()); }

TEST(Convolve, PreservesMassOfNonnegativeFunctions) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> c(-5, 5);
  for (int d = 1; d <= 4; ++d) {
    SiteMap f;
    for (int i = 0; i < 60; ++i) {
      Site x;
      for (int k = 0; k < d; ++k) x[k] = c(rng);
      f[x] += u(rng);
    }
    const SiteMap g = convolve(f, WalkKernel(d));
    EXPECT_NEAR(mass(g), mass(f), 1e-12 * mass(f)) << "d=" << d;
  }
}

TEST(WalkKernel, RejectsUnsupportedDimensions) {
  EXPECT_THROW(WalkKernel(0), ValidationError);
  EXPECT_THROW(WalkKernel(kMaxDim + 1), ValidationError);
}

TEST(ReturnProbability, SmallCases) {
  EXPECT_DOUBLE_EQ(return_probability(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(return_probability(2, 1), 0.25);
  EXPECT_NEAR(return_probability(3, 1), 1.0 / 6.0, 1e-16);
}

TEST(ReturnProbability, AgreesWithWalkEnumeration) {
  for (int d = 1; d <= 3; ++d)
    for (int n = 1; n <= 3; ++n)
      EXPECT_NEAR(return_probability(d, n), closed_walk_probability(d, n), 1e-14) << "d=" << d << " n=" << n;
}

TEST(ReturnProbability, BudgetIsEnforced) {
  EXPECT_THROW(return_probability(1, 200, 100), BudgetError);
  EXPECT_THROW(return_probability(1, 0), ValidationError);
}

TEST(GreenG0, TruncationAtOneInOneDimension) {
  const GreenTable t = green_g0(1, 1);
  ASSERT_EQ(t.values.size(), 3u);
  EXPECT_DOUBLE_EQ(t.at(make_site({-2})), 0.25);
  EXPECT_DOUBLE_EQ(t.at(make_site({0})), 0.5);
  EXPECT_DOUBLE_EQ(t.at(make_site({2})), 0.25);
  EXPECT_DOUBLE_EQ(t.g0_at_0, 0.5);
}

TEST(GreenG0, TotalMassEqualsTruncationLevel) {
  for (int d = 1; d <= 4; ++d)
    for (int n0 : {1, 2, 5}) {
      const GreenTable t = green_g0(d, n0);
      EXPECT_NEAR(t.norm1, n0, 1e-12);
      EXPECT_NEAR(mass(t.values), n0, 1e-12);
    }
}

TEST(GreenG0, SupportIsEvenAndWithinRadius) {
  const GreenTable t = green_g0(3, 3);
  for (const auto& [x, v] : t.values) {
    EXPECT_EQ(parity(x), 0);
    EXPECT_LE(l1_norm(x), 6);
    EXPECT_GE(v, 0.0);
  }
}

TEST(GreenG0, ThreeDimensionsTwoTerms) {
  const double expected = 1.0 / 6.0 + closed_walk_probability(3, 2);
  EXPECT_NEAR(green_g0(3, 2).g0_at_0, expected, 1e-15);
}

TEST(GreenG0, MatchesDirectWalkStepping) {
  for (int d = 1; d <= 3; ++d) {
    const GreenTable t = green_g0(d, 3);
    const auto ref = oracle::green_g0<double>(d, 3);
    ASSERT_EQ(t.values.size(), ref.size());
    for (const auto& [x, v] : ref) EXPECT_NEAR(t.at(x), v, 1e-15);
  }
}

TEST(GreenG0, OperatorIdentity) {
  for (int d = 1; d <= 3; ++d)
    for (int n0 = 1; n0 <= 3; ++n0) {
      const WalkKernel k(d);
      const GreenTable t = green_g0(d, n0);
      const SiteMap lhs = convolve_power(t.values, k, 2);
      const SiteMap near = convolve_power({{Site{}, 1.0}}, k, 2);
      const SiteMap far = convolve_power({{Site{}, 1.0}}, k, 2 * (n0 + 1));
      auto at = [](const SiteMap& m, const Site& x) {
        auto it = m.find(x);
        return it == m.end() ? 0.0 : it->second;
      };
      for (const auto& [x, v] : far) EXPECT_NEAR(t.at(x) - at(lhs, x), at(near, x) - v, 1e-12);
    }
}

TEST(GreenG0, IncreasesTowardTheFullGreenValue) {
  const double g = green_g_at_0(3, 1e-8).value;
  double prev = 0.0;
  for (int n0 = 1; n0 <= 30; ++n0) {
    const double v = green_g0(3, n0).g0_at_0;
    EXPECT_GT(v, prev);
    EXPECT_LT(v, g);
    prev = v;
  }
}

TEST(GreenG0, BudgetIsEnforced) { EXPECT_THROW(green_g0(1, 50, 20), BudgetError); }

TEST(GreenAtZero, ThreeDimensions) {
  const GreenSeries s = green_g_at_0(3, 1e-6);
  EXPECT_NEAR(s.value, 0.5164, 5e-5);
  EXPECT_TRUE(s.tolerance_met);
  EXPECT_GT(s.truncation_point, 0);
}

TEST(GreenAtZero, DecreasesWithDimension) { EXPECT_LT(green_g_at_0(5, 1e-6).value, green_g_at_0(3, 1e-6).value); }

TEST(GreenAtZero, RecurrentDimensionsAreRejected) {
  EXPECT_THROW(green_g_at_0(2, 1e-6), ValidationError);
  EXPECT_THROW(green_g_at_0(1, 1e-6), ValidationError);
}

TEST(GreenAtZero, RenewalRouteAgrees) {
  const ReturnProbability r = return_probability_renewal(3);
  EXPECT_NEAR(r.p, 0.3405, 1e-4);
  EXPECT_NEAR(r.green_value, green_g_at_0(3, 1e-7).value, 1e-6);
}

TEST(Beta2, ConstantEnvironmentIsInfinite) {
  EXPECT_TRUE(beta2_solve(BinaryEnv{1.0, 1.0, 0.5}, 3).infinite);
  EXPECT_TRUE(beta2_solve(BinaryEnv{-1.0, 1.0, 1.0}, 3).infinite);
}

TEST(Beta2, RecurrentDimensionsGiveZero) {
  const Beta2Result r = beta2_solve(BinaryEnv{}, 2);
  EXPECT_FALSE(r.infinite);
  EXPECT_EQ(r.beta2, 0.0);
}

TEST(Beta2, SymmetricSignsInThreeDimensionsAreInfinite) {
  // chi = tanh^2(beta) stays below 1 while 1/g(0) is close to 1.94.
  EXPECT_TRUE(beta2_solve(BinaryEnv{}, 3).infinite);
}

TEST(Beta2, SolvesTheThresholdCondition) {
  for (const EnvSpec& env : {EnvSpec{UniformEnv{-1.0, 0.0}}, EnvSpec{BinaryEnv{-1.0, 1.0, 0.2}},
                             EnvSpec{ShiftedExpEnv{0.0, 1.0}}}) {
    const Beta2Result r = beta2_solve(env, 3);
    ASSERT_FALSE(r.infinite);
    EXPECT_GT(r.beta2, 0.0);
    EXPECT_LE(r.residual, 1e-9);
    EXPECT_NEAR(chi(env, r.beta2) * r.g_at_0, 1.0, 1e-9);
    EXPECT_LT(chi(env, 0.99 * r.beta2) * r.g_at_0, 1.0);
    EXPECT_GT(chi(env, 1.01 * r.beta2) * r.g_at_0, 1.0);
  }
}

TEST(MinimalN0, IsMinimal) {
  const EnvSpec env = UniformEnv{-1.0, 0.0};
  const double beta = 1.3 * beta2_solve(env, 3).beta2;
  const int n0 = minimal_n0(env, beta, 3);
  EXPECT_GT(chi(env, beta) * green_g0(3, n0).g0_at_0, 1.0);
  if (n0 > 1) {
    EXPECT_LE(chi(env, beta) * green_g0(3, n0 - 1).g0_at_0, 1.0);
  }
}

TEST(MinimalN0, UnavailableBelowThreshold) {
  EXPECT_THROW(minimal_n0(BinaryEnv{}, 2.0, 3), CapabilityError);
  EXPECT_THROW(minimal_n0(BinaryEnv{}, 0.0, 1), CapabilityError);
}
