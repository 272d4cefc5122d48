#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/oracle.hpp"

using namespace dpolymer;

namespace {

const std::vector<EnvSpec>& envs() {
  static const std::vector<EnvSpec> all{BinaryEnv{}, BinaryEnv{-0.5, 2.0, 0.3}, UniformEnv{-1.0, 0.0},
                                        UniformEnv{-2.0, 1.0}, ShiftedExpEnv{0.0, 1.0}, ShiftedExpEnv{1.5, 3.0}};
  return all;
}

// log E[exp(beta omega)] by composite Simpson quadrature of the density.
double quadrature_log_mgf(const EnvSpec& env, double beta) {
  auto simpson = [](auto&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
  };
  if (const auto* e = std::get_if<UniformEnv>(&env))
    return std::log(simpson([&](double w) { return std::exp(beta * w) / (e->b - e->a); }, e->a, e->b, 20000));
  const auto& e = std::get<ShiftedExpEnv>(env);
  const double upper = 60.0 / e.rate;
  return std::log(
      simpson([&](double x) { return e.rate * std::exp(-e.rate * x) * std::exp(beta * (e.top - x)); }, 0.0, upper,
              200000));
}

}  // namespace

TEST(LogMgf, VanishesAtZero) {
  for (const auto& env : envs()) EXPECT_EQ(log_mgf(env, 0.0), 0.0);
}

TEST(LogMgf, SymmetricSignsGiveLogCosh) {
  EXPECT_NEAR(log_mgf(BinaryEnv{}, 1.0), 0.4337808, 1e-7);
  for (double b : {0.1, 0.7, 2.5}) EXPECT_NEAR(log_mgf(BinaryEnv{}, b), std::log(std::cosh(b)), 1e-14);
}

TEST(LogMgf, UniformOnMinusOneZero) {
  EXPECT_NEAR(log_mgf(UniformEnv{-1.0, 0.0}, 1.0), -0.45867, 1e-5);
  EXPECT_NEAR(log_mgf(UniformEnv{-1.0, 0.0}, 1.0), std::log(1.0 - std::exp(-1.0)), 1e-14);
}

TEST(LogMgf, ClosedFormsMatchQuadrature) {
  for (const EnvSpec& env : {EnvSpec{UniformEnv{-1.0, 0.0}}, EnvSpec{UniformEnv{-2.0, 1.0}},
                             EnvSpec{ShiftedExpEnv{0.0, 1.0}}, EnvSpec{ShiftedExpEnv{1.5, 3.0}}})
    for (double beta : {0.3, 1.0, 2.0}) EXPECT_NEAR(log_mgf(env, beta), quadrature_log_mgf(env, beta), 1e-10);
}

TEST(LogMgf, UniformSmallBetaLimitIsContinuous) {
  const EnvSpec env = UniformEnv{-1.0, 0.0};
  EXPECT_NEAR(log_mgf(env, 1e-9), -0.5e-9, 1e-15);
}

TEST(LogMgf, ShiftedExponentialDomain) {
  const EnvSpec env = ShiftedExpEnv{0.0, 2.0};
  EXPECT_THROW(log_mgf(env, -2.0), DomainError);
  EXPECT_THROW(log_mgf(env, -3.0), DomainError);
  EXPECT_NO_THROW(log_mgf(env, -1.5));
}

TEST(Validate, RejectsMalformedParameters) {
  EXPECT_THROW(validate(EnvSpec{BinaryEnv{1.0, -1.0, 0.5}}), ValidationError);
  EXPECT_THROW(validate(EnvSpec{BinaryEnv{-1.0, 1.0, 1.5}}), ValidationError);
  EXPECT_THROW(validate(EnvSpec{UniformEnv{0.0, 0.0}}), ValidationError);
  EXPECT_THROW(validate(EnvSpec{ShiftedExpEnv{0.0, -1.0}}), ValidationError);
}

TEST(EnvScalars, ZeroBeta) {
  for (const auto& env : envs()) {
    const EnvScalars s = env_scalars(env, 0.0, 1, 1);
    EXPECT_EQ(s.chi, 0.0);
    EXPECT_NEAR(s.chi3, 0.0, 1e-15);
    EXPECT_EQ(s.L, 1.0);
  }
}

TEST(EnvScalars, SymmetricSignsAtBetaOne) {
  const EnvScalars s = env_scalars(BinaryEnv{}, 1.0, 2, 1);
  EXPECT_NEAR(s.chi, std::exp(std::log(std::cosh(2.0)) - 2.0 * std::log(std::cosh(1.0))) - 1.0, 1e-14);
  EXPECT_NEAR(s.L, std::exp(1.0) / std::cosh(1.0), 1e-14);
  EXPECT_NEAR(s.L, 1.7615, 1e-4);
}

TEST(EnvScalars, LIsTheLargestWeightOverTheSupport) {
  for (double beta : {0.5, 1.0, 2.0}) {
    const BinaryEnv e{-0.5, 2.0, 0.3};
    const auto law = oracle::binary_law(e, beta);
    EXPECT_NEAR(env_scalars(e, beta, 1, 1).L, std::max(law.w_hi, law.w_lo), 1e-13);
  }
}

TEST(EnvScalars, ChiAndChi3MatchTwoPointMoments) {
  for (const BinaryEnv& e : {BinaryEnv{}, BinaryEnv{-0.5, 2.0, 0.3}, BinaryEnv{0.0, 1.0, 0.9}})
    for (double beta : {0.25, 1.0, 2.0}) {
      const auto law = oracle::binary_law(e, oracle::HighPrecision(beta));
      const EnvScalars s = env_scalars(e, beta, 1, 1);
      EXPECT_NEAR(s.chi, static_cast<double>(law.chi), 1e-12);
      EXPECT_NEAR(s.chi3, static_cast<double>(law.chi3), 1e-12);
    }
}

TEST(EnvScalars, KappaFormula) {
  const EnvScalars s = env_scalars(BinaryEnv{}, 0.5, 3, 2);
  const double c4 = std::exp(0.5 * (std::log(std::cosh(4.0)) + std::log(std::cosh(-4.0))));
  EXPECT_NEAR(s.fourth_moment_constant, c4, 1e-12);
  EXPECT_NEAR(s.kappa, 9.0 * (16.0 + c4), 1e-9);
}

TEST(EnvScalars, KappaUnavailableForLargeExponentialBeta) {
  const EnvScalars s = env_scalars(ShiftedExpEnv{0.0, 1.0}, 0.2, 1, 1);
  EXPECT_FALSE(s.kappa_available);
  EXPECT_TRUE(env_scalars(ShiftedExpEnv{0.0, 1.0}, 0.1, 1, 1).kappa_available);
}

TEST(EnvScalars, ChiNonnegativeAndZeroOnlyWhenTrivial) {
  for (const auto& env : envs())
    for (double beta : {0.1, 1.0, 3.0}) EXPECT_GT(chi(env, beta), 0.0);
  EXPECT_EQ(chi(BinaryEnv{0.5, 0.5, 0.5}, 1.0), 0.0);
}

TEST(Tilted, SymmetricSignsUpperProbability) {
  EXPECT_NEAR(tilted_upper_probability(BinaryEnv{}, 1.0), std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(tilted_upper_probability(BinaryEnv{}, 1.0), 0.8808, 1e-4);
}

TEST(Tilted, ZeroBetaIsTheBaseLaw) {
  for (const auto& env : envs())
    for (double u : {0.01, 0.3, 0.5, 0.77, 0.99}) EXPECT_NEAR(sample_tilted(env, 0.0, u), sample_base(env, u), 1e-12);
}

TEST(Tilted, MeanIncreasesWithTilt) {
  for (const auto& env : envs()) {
    double base = 0.0, tilted = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double u = (i + 0.5) / n;
      base += sample_base(env, u);
      tilted += sample_tilted(env, 1.0, u);
    }
    EXPECT_GE(tilted / n, base / n - 1e-9);
  }
}

TEST(Tilted, ChangeOfMeasureIsExactForTwoPoints) {
  const BinaryEnv e{-0.5, 2.0, 0.3};
  const double beta = 1.3, lam = log_mgf(e, beta);
  const double total = e.p * std::exp(beta * e.b - lam) + (1 - e.p) * std::exp(beta * e.a - lam);
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(tilted_upper_probability(e, beta), e.p * std::exp(beta * e.b - lam), 1e-15);
}

TEST(DisorderField, Deterministic) {
  const DisorderField a(parse_seed("0x1234"), BinaryEnv{}, 2);
  const DisorderField b(parse_seed("0x1234"), BinaryEnv{}, 2);
  for (int n = 1; n < 20; ++n)
    for (int x = -n; x <= n; ++x) EXPECT_EQ(a.value(n, make_site({x, 1})), b.value(n, make_site({x, 1})));
}

TEST(DisorderField, ShiftSemanticsAreExact) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> c(-50, 50), t(0, 100);
  for (const auto& env : envs())
    for (int d : {1, 3, 5}) {
      const DisorderField f(parse_seed("0xfeedbeef00112233"), env, d);
      for (int probe = 0; probe < 100; ++probe) {
        const int m = t(rng), n = t(rng);
        Site x, y;
        for (int k = 0; k < d; ++k) {
          x[k] = c(rng);
          y[k] = c(rng);
        }
        const DisorderField g = f.shifted(m, y);
        EXPECT_EQ(g.value(n, x), f.value(n + m, x + y));
        EXPECT_EQ(g.shifted(1, x).value(n, y), f.value(n + m + 1, x + y + y));
      }
    }
}

TEST(DisorderField, DistinctSeedsDiffer) {
  const DisorderField a(parse_seed("0x1"), UniformEnv{}, 1), b(parse_seed("0x2"), UniformEnv{}, 1);
  int same = 0;
  for (int n = 1; n <= 100; ++n) same += a.value(n, Site{}) == b.value(n, Site{});
  EXPECT_EQ(same, 0);
}

TEST(DisorderField, NormalisedWeightHasMeanOne) {
  for (const auto& env : envs()) {
    const double beta = 0.8, lam = log_mgf(env, beta);
    const DisorderField f(parse_seed("0xabcdef"), env, 1);
    const int n = 1'000'000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = std::exp(beta * f.value(1 + i / 1000, make_site({i % 1000})) - lam);
      s += w;
      s2 += w * w;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    EXPECT_NEAR(mean, 1.0, 4.0 * se) << env_kind(env);
  }
}

TEST(DisorderField, WeightsNeverExceedL) {
  for (const auto& env : envs())
    for (double beta : {0.5, 1.0, 2.0}) {
      const EnvScalars s = env_scalars(env, beta, 1, 1);
      const DisorderField f(parse_seed("0x77"), env, 1);
      double worst = 0.0;
      for (int i = 0; i < 200000; ++i)
        worst = std::max(worst, std::exp(beta * f.value(i, Site{}) - s.lambda_beta));
      EXPECT_LE(worst, s.L * (1 + 1e-15));
      EXPECT_GE(s.L, std::exp(beta * mean(env) - s.lambda_beta));
    }
}

TEST(DisorderField, HighDimensionalCoordinatesAreAllUsed) {
  const DisorderField f(parse_seed("0x5"), UniformEnv{}, 6);
  Site a, b;
  b[5] = 1;
  EXPECT_NE(f.value(3, a), f.value(3, b));
}
