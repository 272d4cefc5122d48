#include <gtest/gtest.h>

#include <cmath>

#include "dpolymer/estimators.hpp"
#include "dpolymer/oracle.hpp"

using namespace dpolymer;

namespace {

ReplicaPlan plan(const char* seed, std::size_t replicas, int workers = 1) {
  ReplicaPlan p;
  p.master = parse_seed(seed);
  p.replicas = replicas;
  p.workers = workers;
  return p;
}

double exact_mean_sqrt_W(int d, double beta, int n) {
  const oracle::LightCone cone(d, n);
  const auto law = oracle::binary_law(BinaryEnv{}, beta);
  return oracle::expectation(cone, law, {}, [&](const oracle::ConeConfiguration& c) {
    double W = 0.0;
    const auto hist = oracle::p2p_history(c, law, n);
    for (const auto& [x, w] : hist.back()) W += w;
    return std::sqrt(W);
  });
}

}  // namespace

TEST(FreeEnergy, ZeroBetaIsExactlyZero) {
  const auto fe = estimate_free_energy(ModelSpec{2, 0.0, BinaryEnv{}}, plan("0x1", 8), {5, 10, 20});
  ASSERT_EQ(fe.per_n.size(), 3u);
  for (const auto& e : fe.per_n) {
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_EQ(e.std_error, 0.0);
  }
  for (const auto& w : fe.mean_W) EXPECT_EQ(w.mean, 1.0);
}

TEST(FreeEnergy, GridIsSortedAndEnvelopeIsRunningMax) {
  const auto fe = estimate_free_energy(ModelSpec{1, 1.0, BinaryEnv{}}, plan("0x2", 50), {40, 10, 20, 10});
  EXPECT_EQ(fe.grid, (std::vector<int>{10, 20, 40}));
  double running = -1e300;
  for (std::size_t g = 0; g < fe.grid.size(); ++g) {
    running = std::max(running, fe.per_n[g].mean);
    EXPECT_EQ(fe.envelope[g], running);
    EXPECT_LT(fe.per_n[g].mean, 0.0);
  }
}

TEST(FreeEnergy, DecreasesWithBetaOnPairedReplicas) {
  const ReplicaPlan p = plan("0x3", 40);
  double prev = 1.0;
  for (double beta : {0.5, 1.0, 1.5, 2.0}) {
    const double f = estimate_free_energy(ModelSpec{1, beta, BinaryEnv{}}, p, {200}).per_n[0].mean;
    EXPECT_LT(f, prev) << "beta=" << beta;
    prev = f;
  }
}

TEST(FreeEnergy, WorkerCountDoesNotChangeResults) {
  const ModelSpec model{2, 1.0, UniformEnv{}};
  const auto a = estimate_free_energy(model, plan("0x4", 12, 1), {15, 30});
  const auto b = estimate_free_energy(model, plan("0x4", 12, 4), {15, 30});
  for (std::size_t g = 0; g < 2; ++g) {
    EXPECT_EQ(a.per_n[g].mean, b.per_n[g].mean);
    EXPECT_EQ(a.per_n[g].std_error, b.per_n[g].std_error);
  }
}

TEST(FreeEnergy, RejectsBadInput) {
  EXPECT_THROW(estimate_free_energy(ModelSpec{1, 1.0, BinaryEnv{}}, plan("0x1", 8), {}), ValidationError);
  EXPECT_THROW(estimate_free_energy(ModelSpec{1, 1.0, BinaryEnv{}}, plan("0x1", 8), {0, 3}), ValidationError);
  EXPECT_THROW(estimate_free_energy(ModelSpec{1, 1.0, BinaryEnv{}}, plan("0x1", 1), {3}), ValidationError);
}

TEST(Certificate, Thresholds) {
  EXPECT_EQ(certificate_threshold(CertificateMode::kSumOverEndpoints, 7, 3), 1.0);
  EXPECT_NEAR(certificate_threshold(CertificateMode::kWhole, 2, 1), 0.141421, 1e-6);
  EXPECT_EQ(to_string(CertificateMode::kWhole), "whole");
}

TEST(Certificate, ZeroBetaIsInconclusive) {
  const auto certs = fractional_moment_certificates(ModelSpec{1, 0.0, BinaryEnv{}}, plan("0x5", 20), {10, 20, 50});
  for (const auto& c : certs) {
    EXPECT_FALSE(c.certified);
    double rho = 0.0;
    for (int k = 0; k <= c.n; ++k) rho += std::sqrt(std::exp(std::lgamma(c.n + 1.0) - std::lgamma(k + 1.0) -
                                                             std::lgamma(c.n - k + 1.0) - c.n * std::log(2.0)));
    EXPECT_NEAR(c.estimate.mean, rho, 1e-12);
    EXPECT_LT(c.estimate.std_error, 1e-12);
  }
}

TEST(Certificate, WholeModeMatchesTheExactFractionalMoment) {
  for (int n : {2, 3}) {
    const double exact = exact_mean_sqrt_W(1, 1.0, n);
    CertificateOptions opt;
    opt.mode = CertificateMode::kWhole;
    const auto c = fractional_moment_certificate(ModelSpec{1, 1.0, BinaryEnv{}}, plan("0x6", 20000), n, opt);
    EXPECT_NEAR(c.estimate.mean, exact, 4.0 * c.estimate.std_error) << "n=" << n;
    EXPECT_LT(exact, 1.0);
  }
}

TEST(Certificate, StrongDisorderCertifiesAndStopsEarly) {
  const auto certs = fractional_moment_certificates(ModelSpec{1, 2.0, BinaryEnv{}}, plan("0x7", 200),
                                                    {10, 20, 40, 80, 160}, {}, true);
  ASSERT_FALSE(certs.empty());
  EXPECT_TRUE(certs.back().certified);
  for (std::size_t i = 0; i + 1 < certs.size(); ++i) EXPECT_FALSE(certs[i].certified);
  EXPECT_LT(certs.back().implied_free_energy_bound, 0.0);
}

TEST(Certificate, HoeffdingIsMoreConservative) {
  const ModelSpec model{1, 2.0, BinaryEnv{}};
  CertificateOptions h;
  h.hoeffding = true;
  const auto a = fractional_moment_certificate(model, plan("0x8", 100), 20);
  const auto b = fractional_moment_certificate(model, plan("0x8", 100), 20, h);
  EXPECT_EQ(a.estimate.mean, b.estimate.mean);
  EXPECT_GE(b.ucb, b.estimate.mean);
}

TEST(Tail, BandAndTrivialLevel) {
  TailOptions opt;
  opt.initial_horizon = 64;
  opt.max_horizon = 1024;
  const auto curve = tail_scan(ModelSpec{1, 1.0, BinaryEnv{}}, plan("0x9", 300), TailQuantity::kMaxW, {1.0, 2.0, 4.0},
                               opt);
  ASSERT_EQ(curve.points.size(), 3u);
  EXPECT_EQ(curve.points[0].survival.mean, 1.0);
  EXPECT_NEAR(curve.points[1].band_low, 0.2838, 1e-4);
  EXPECT_DOUBLE_EQ(curve.points[1].band_high, 0.5);
  EXPECT_GE(curve.points[1].survival.mean, curve.points[2].survival.mean);
  for (const auto& p : curve.points) EXPECT_LE(p.survival.mean, p.band_high + 4 * p.survival.std_error + 1e-12);
}

TEST(Tail, ZeroBetaNeverExceedsOne) {
  TailOptions opt;
  opt.initial_horizon = 8;
  opt.max_horizon = 16;
  const auto curve = tail_scan(ModelSpec{1, 0.0, BinaryEnv{}}, plan("0xa", 20), TailQuantity::kMaxW, {2.0}, opt);
  EXPECT_EQ(curve.points[0].hits, 0u);
  EXPECT_EQ(curve.truncated, 20u);
}

TEST(Tail, PointToPointHasNoLowerBand) {
  TailOptions opt;
  opt.initial_horizon = 32;
  opt.max_horizon = 64;
  const auto curve =
      tail_scan(ModelSpec{1, 1.5, BinaryEnv{}}, plan("0xb", 50), TailQuantity::kMaxP2P, {0.01, 0.1}, opt);
  for (const auto& p : curve.points) EXPECT_EQ(p.band_low, 0.0);
  EXPECT_GE(curve.points[0].survival.mean, curve.points[1].survival.mean);
}

TEST(Tail, RejectsBadGrids) {
  const ModelSpec m{1, 1.0, BinaryEnv{}};
  EXPECT_THROW(tail_scan(m, plan("0x1", 5), TailQuantity::kMaxW, {}), ValidationError);
  EXPECT_THROW(tail_scan(m, plan("0x1", 5), TailQuantity::kMaxW, {-1.0}), ValidationError);
}

TEST(Babac, CertainAndImpossibleEvents) {
  const ModelSpec model{1, 1.0, BinaryEnv{}};
  const auto all = babac_bound_probe(model, plan("0xc", 500), 10, [](const DisorderField&) { return true; });
  EXPECT_EQ(all.p_event.mean, 1.0);
  EXPECT_EQ(all.p_tilted_miss.mean, 0.0);
  EXPECT_TRUE(all.pass);
  const auto none = babac_bound_probe(model, plan("0xc", 500), 10, [](const DisorderField&) { return false; });
  EXPECT_EQ(none.rhs, 1.0);
  EXPECT_TRUE(none.pass);
  EXPECT_EQ(all.sqrt_W.mean, none.sqrt_W.mean);
}

TEST(Babac, NontrivialEventHolds) {
  const ModelSpec model{1, 1.0, BinaryEnv{}};
  const auto p = babac_bound_probe(model, plan("0xd", 2000), 6, [](const DisorderField& f) {
    return f.value(1, make_site({1})) > 0 && f.value(1, make_site({-1})) > 0;
  });
  EXPECT_NEAR(p.p_event.mean, 0.25, 4 * p.p_event.std_error);
  EXPECT_TRUE(p.pass);
}

TEST(Hill, ParetoSampleRecoversTheExponent) {
  std::vector<double> logs;
  const int n = 40000;
  for (int i = 0; i < n; ++i) logs.push_back(-std::log((i + 0.5) / n) / 1.5);
  const TailIndex t = hill_estimate(logs, std::exp(1.0), 2000);
  EXPECT_NEAR(t.alpha, 1.5, 4 * t.std_error);
  EXPECT_FALSE(t.degenerate);
}

TEST(Hill, InvariantUnderBaseChange) {
  std::vector<double> ln, l10;
  for (int i = 1; i <= 1000; ++i) {
    const double v = std::log(1000.0 / i) * 0.9;
    ln.push_back(v);
    l10.push_back(v / std::log(10.0));
  }
  EXPECT_NEAR(hill_estimate(ln, std::exp(1.0)).alpha, hill_estimate(l10, 10.0).alpha, 1e-12);
}

TEST(Hill, DegenerateSamples) {
  EXPECT_TRUE(hill_estimate(std::vector<double>(100, 0.0), std::exp(1.0)).degenerate);
  EXPECT_THROW(hill_estimate({1.0, 2.0}, 2.0), ValidationError);
  EXPECT_TRUE(tail_index_diagnostic(ModelSpec{1, 0.0, BinaryEnv{}}, plan("0x1", 10000), 3).degenerate);
}

TEST(Stats, SummarizeAndIntervals) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const EstimateWithCI e = summarize("x", v, 2.0);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_DOUBLE_EQ(e.ci_half_width, 2.0 * e.std_error);
  const auto [lo, hi] = wilson_interval(0, 100, 3.0);
  EXPECT_EQ(lo, 0.0);
  EXPECT_NEAR(hi, 9.0 / 109.0, 1e-12);
  EXPECT_NEAR(hoeffding_upper(0.2, 1000, 0.0, 1.0, 0.05), 0.2 + std::sqrt(std::log(20.0) / 2000.0), 1e-12);
}
