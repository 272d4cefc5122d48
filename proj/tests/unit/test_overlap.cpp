#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dpolymer/oracle.hpp"
#include "dpolymer/overlap.hpp"

using namespace dpolymer;

namespace {

PolymerFront step(const PolymerFront& f, const DisorderField& field, double beta) {
  return advance(f, field, env_scalars(field.env(), beta, 0, field.dim()));
}

SiteMap random_law(std::mt19937_64& rng, int d, int sites, int radius) {
  std::gamma_distribution<double> g(0.3, 1.0);
  std::uniform_int_distribution<int> c(-radius, radius);
  SiteMap mu;
  double total = 0.0;
  for (int i = 0; i < sites; ++i) {
    Site x;
    for (int k = 0; k < d; ++k) x[k] = c(rng);
    const double w = g(rng) + 1e-300;
    mu[x] += w;
    total += w;
  }
  for (auto& [x, v] : mu) v /= total;
  return mu;
}

}  // namespace

TEST(OverlapStep, ZeroBetaFirstSteps) {
  const DisorderField field(parse_seed("0x1"), BinaryEnv{}, 1);
  const GreenTable g = green_g0(1, 1);
  const EnvScalars s = env_scalars(BinaryEnv{}, 0.0, 1, 1);
  const PolymerFront f0 = PolymerFront::origin(1), f1 = step(f0, field, 0.0), f2 = step(f1, field, 0.0);
  const OverlapStep s1 = overlap_step(f0, f1, g, s);
  EXPECT_DOUBLE_EQ(s1.I, 0.5);
  EXPECT_DOUBLE_EQ(s1.Dmu.at(make_site({-1})), 0.5);
  EXPECT_DOUBLE_EQ(s1.Dmu.at(make_site({1})), 0.5);
  EXPECT_DOUBLE_EQ(overlap_step(f1, f2, g, s).I, 0.375);
}

TEST(OverlapStep, JMatchesDirectDoubleSum) {
  const DisorderField field(parse_seed("0x1"), BinaryEnv{}, 1);
  const GreenTable g = green_g0(1, 1);
  const PolymerFront f1 = step(PolymerFront::origin(1), field, 0.0);
  const BasicSiteMap<double> mu{{make_site({-1}), 0.5}, {make_site({1}), 0.5}};
  const double expected = oracle::green_form(mu, mu, oracle::green_g0<double>(1, 1));
  EXPECT_NEAR(front_green_form(f1, g), expected, 1e-15);
  EXPECT_NEAR(expected, 0.375, 1e-15);
}

TEST(OverlapStep, RejectsNonConsecutiveFronts) {
  const DisorderField field(parse_seed("0x1"), BinaryEnv{}, 1);
  const PolymerFront f0 = PolymerFront::origin(1), f2 = step(step(f0, field, 1.0), field, 1.0);
  EXPECT_THROW(overlap_step(f0, f2, green_g0(1, 1), env_scalars(BinaryEnv{}, 1.0, 1, 1)), ValidationError);
}

TEST(OverlapStep, JBoundedByTruncationTimesNorm) {
  for (int d = 1; d <= 3; ++d) {
    const DisorderField field(parse_seed("0xbee"), BinaryEnv{}, d);
    const int n0 = 3;
    const GreenTable g = green_g0(d, n0);
    const EnvScalars s = env_scalars(BinaryEnv{}, 1.5, n0, d);
    PolymerFront prev = PolymerFront::origin(d);
    for (int n = 1; n <= 25; ++n) {
      const PolymerFront cur = step(prev, field, 1.5);
      const OverlapStep o = overlap_step(prev, cur, g, s);
      EXPECT_GE(o.J, 0.0);
      EXPECT_LE(o.J, n0 * o.mu_norm2_sq + 1e-12);
      EXPECT_GT(o.I, 0.0);
      EXPECT_LE(o.I, 1.0);
      prev = cur;
    }
  }
}

TEST(ApplyGreen, DirectAndConvolutionAgree) {
  std::mt19937_64 rng(3);
  for (int d : {1, 2, 3})
    for (int n0 : {1, 2, 4}) {
      const GreenTable g = green_g0(d, n0);
      const SiteMap mu = random_law(rng, d, 30, 4);
      const SiteMap a = apply_green(mu, g, GreenMethod::kDirect), b = apply_green(mu, g, GreenMethod::kConvolution);
      for (const auto& [x, v] : a) {
        auto it = b.find(x);
        EXPECT_NEAR(v, it == b.end() ? 0.0 : it->second, 1e-10);
      }
      for (const auto& [x, v] : b)
        if (!a.count(x)) {
          EXPECT_NEAR(v, 0.0, 1e-10);
        }
    }
}

TEST(Splash, PointMass) {
  const GreenTable g = green_g0(2, 3);
  const SplashCheck c = splash_check({{Site{}, 1.0}}, g);
  EXPECT_DOUBLE_EQ(c.mu_norm2, 1.0);
  EXPECT_NEAR(c.sup_G0mu, g.g0_at_0, 1e-15);
  EXPECT_LE(c.sup_G0mu, c.sup_bound);
  EXPECT_TRUE(c.ok);
}

TEST(Splash, SlackGrowsWithSpread) {
  const GreenTable g = green_g0(1, 3);
  double prev = -1.0;
  for (int k = 1; k <= 100; ++k) {
    SiteMap mu;
    for (int i = 0; i < k; ++i) mu[make_site({2 * i})] = 1.0 / k;
    const SplashCheck c = splash_check(mu, g);
    EXPECT_NEAR(c.mu_norm2 * c.mu_norm2, 1.0 / k, 1e-14);
    EXPECT_TRUE(c.ok);
    const double slack = (c.sup_bound - c.sup_G0mu) / c.sup_bound;
    if (k > 8) {
      EXPECT_GE(slack, prev - 1e-12);
    }
    prev = slack;
  }
}

TEST(Splash, RandomLawsNeverViolate) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> sites(1, 40), n0s(1, 4);
  for (int d : {1, 3}) {
    std::vector<GreenTable> tables;
    for (int n0 = 1; n0 <= 4; ++n0) tables.push_back(green_g0(d, n0));
    for (int trial = 0; trial < 10000; ++trial) {
      const SiteMap mu = random_law(rng, d, sites(rng), 3);
      const SplashCheck c = splash_check(mu, tables[static_cast<std::size_t>(n0s(rng) - 1)]);
      ASSERT_TRUE(c.ok) << "d=" << d << " trial=" << trial << " slack=" << c.min_slack;
    }
  }
}

TEST(DriftBound, Formula) {
  EXPECT_DOUBLE_EQ(drift_lower_bound(0.5, 0.1, 0.2, 0.75, 2.0, 3.0),
                   (2.0 * 0.75 - 1.0) * 0.5 - 4.0 * 2.0 * 0.1 - 2.0 * 3.0 * 0.75 * 0.2);
}

TEST(Kappa, Formula) { EXPECT_DOUBLE_EQ(kappa(3, 2, 5.0), 9.0 * (16.0 + 5.0)); }

TEST(Doob, ZeroBetaHasNoMartingalePart) {
  const DisorderField field(parse_seed("0x2"), BinaryEnv{}, 1);
  const DoobDecomposition dd = doob_decompose(field, 0.0, green_g0(1, 2), 4);
  for (const auto& s : dd.steps) {
    EXPECT_NEAR(s.N, 0.0, 1e-15);
    EXPECT_NEAR(s.cond_var_N, 0.0, 1e-15);
    EXPECT_NEAR(s.A, s.J - dd.J0, 1e-15);
  }
}

TEST(Doob, TelescopesAndMatchesTheSliceOracle) {
  const DisorderField field(parse_seed("0x2"), BinaryEnv{}, 1);
  const double beta = 1.0;
  const GreenTable g = green_g0(1, 2);
  const DoobDecomposition dd = doob_decompose(field, beta, g, 4);
  const auto law = oracle::binary_law(BinaryEnv{}, oracle::HighPrecision(beta));
  const auto g0 = oracle::green_g0<oracle::HighPrecision>(1, 2);
  const EnvScalars s = env_scalars(BinaryEnv{}, beta, 2, 1);
  PolymerFront prev = PolymerFront::origin(1);
  for (const auto& st : dd.steps) {
    EXPECT_NEAR(st.A + st.N + dd.J0, st.J, 1e-12);
    BasicSiteMap<oracle::HighPrecision> mu;
    for (const auto& [x, m] : prev.endpoint_law()) mu[x] = m;
    const auto slice = oracle::conditional_slice(mu, 1, law, &g0);
    EXPECT_NEAR(st.drift, static_cast<double>(slice.mean_J - slice.J_prev), 1e-12);
    EXPECT_NEAR(st.cond_ratio_mean, 1.0, 1e-12);
    EXPECT_NEAR(st.cond_ratio_sq_dev, s.chi * st.I, 1e-12);
    prev = advance(prev, field, s);
  }
}

TEST(Doob, BudgetIsEnforced) {
  const DisorderField field(parse_seed("0x2"), BinaryEnv{}, 2);
  EXPECT_THROW(doob_decompose(field, 1.0, green_g0(2, 1), 5, 256), BudgetError);
}

TEST(Concentration, BoundIsCappedAtOne) {
  EXPECT_EQ(concentration_bound(0.1, 10.0, 1.0), 1.0);
  const double b = concentration_bound(4.0, 0.3, 1.0);
  EXPECT_NEAR(b, std::exp(-2.0 * (std::log(4.0 / 0.6) - 1.0)), 1e-15);
}

TEST(Concentration, ZeroBetaNeverHits) {
  ReplicaPlan plan;
  plan.master = parse_seed("0x1");
  plan.replicas = 50;
  plan.workers = 1;
  const auto probe = martingale_concentration_probe(ModelSpec{1, 0.0, BinaryEnv{}}, plan, {{0.5, 1.0}}, 100);
  EXPECT_EQ(probe.points[0].events, 0u);
  EXPECT_TRUE(probe.points[0].pass);
}

TEST(Concentration, RejectsTooSmallIncrementBound) {
  ReplicaPlan plan;
  plan.replicas = 2;
  EXPECT_THROW(martingale_concentration_probe(ModelSpec{1, 2.0, BinaryEnv{}}, plan, {{1.0, 1.0}}, 10, 0.5),
               ValidationError);
}
