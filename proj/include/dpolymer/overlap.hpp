#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/lattice_green.hpp"
#include "dpolymer/stats.hpp"
#include "dpolymer/transfer_engine.hpp"

namespace dpolymer {

enum class GreenMethod { kAuto, kDirect, kConvolution };

// Above this many (support(f) x support(g0)) pairs kAuto switches from the
// direct double loop to n0 repeated D^2 convolutions.
inline constexpr std::size_t kDirectGreenPairs = 1'000'000;

// (G0 f)(x) = sum_y g0(y - x) f(y).
SiteMap apply_green(const SiteMap& f, const GreenTable& green, GreenMethod method = GreenMethod::kAuto);

// (f, G0 h).
double green_form(const SiteMap& f, const SiteMap& h, const GreenTable& green);

// J = (mu, G0 mu) for the endpoint law of a front, using its dense layout.
double front_green_form(const PolymerFront& front, const GreenTable& green);

struct OverlapStep {
  int n = 0;
  double I = 0.0;
  double J = 0.0;
  SiteMap Dmu;
  SiteMap G0Dmu;
  double mu_norm2_sq = 0.0;       // ||mu_n||_2^2
  double prev_mu_norm2_sq = 0.0;  // ||mu_{n-1}||_2^2
  // (chi g0(0) - 1) I - 4 chi ((D mu)^2, G0 D mu) - 2 chi3 g0(0) sum (D mu)^3
  double drift_lower_bound = 0.0;
  double N_sq_bound = 0.0;  // kappa I^2
};

OverlapStep overlap_step(const PolymerFront& previous, const PolymerFront& current, const GreenTable& green,
                         const EnvScalars& scalars);

// Lower bound on E[J_n | F_{n-1}] - J_{n-1} from the smoothed law nu = D mu_{n-1}.
double drift_lower_bound(double I, double nu_sq_G0_nu, double sum_nu_cubed, double g0_at_0, double chi,
                         double chi3);

double kappa(int n0, int dim, double fourth_moment_constant);

// The three Hoelder-type bounds with the truncated kernel g0:
//   ||G0 mu||_inf <= ||g0||_4 ||mu||_2^{1/2}
//   (mu, G0 mu)   <= ||g0||_4 ||mu||_2^{1/2}
//   (mu^2, G0 mu) <= ||g0||_4 ||mu||_2^{5/2}
struct SplashCheck {
  double mu_norm2 = 0.0;
  double g0_norm4 = 0.0;
  double sup_G0mu = 0.0;
  double sup_bound = 0.0;
  double J = 0.0;
  double J_bound = 0.0;
  double mu2_G0mu = 0.0;
  double mu2_G0mu_bound = 0.0;
  double min_slack = 0.0;  // smallest (bound - value) / bound
  bool ok = true;
};

SplashCheck splash_check(const SiteMap& mu, const GreenTable& green);

// Exact Doob decomposition J_n - J_0 = A_n + N_n for a binary environment,
// with the conditional quantities each inequality needs. Index k holds step
// n = k + 1.
struct DoobStep {
  int n = 0;
  double I = 0.0;
  double J = 0.0;
  double J_prev = 0.0;
  double A = 0.0;
  double N = 0.0;
  double drift = 0.0;              // A_n - A_{n-1}
  double drift_lower_bound = 0.0;
  double N_increment = 0.0;        // N_n - N_{n-1}
  double N_increment_bound = 0.0;  // n0 max(||mu_n||^2, ||mu_{n-1}||^2)
  double cond_var_N = 0.0;         // E[(N_n - N_{n-1})^2 | F_{n-1}]
  double kappa_I_sq = 0.0;
  double cond_mu_norm4 = 0.0;      // E[||mu_n||^4 | F_{n-1}]
  double mu_norm4_bound = 0.0;     // exp((lambda(8b)+lambda(-8b))/2) I^2
  double cond_ratio_mean = 0.0;    // E[W_n / W_{n-1} | F_{n-1}]
  double cond_ratio_sq_dev = 0.0;  // E[(W_n / W_{n-1} - 1)^2 | F_{n-1}]
  std::uint64_t configs = 0;
};

struct DoobDecomposition {
  double J0 = 0.0;
  std::vector<DoobStep> steps;
};

// Slice enumeration for one step; throws BudgetError when 2^|supp D mu|
// exceeds max_env_configs.
DoobStep doob_step(const PolymerFront& previous, const PolymerFront& current, const BinaryEnv& env,
                   const EnvScalars& scalars, const GreenTable& green, std::uint64_t max_env_configs);

DoobDecomposition doob_decompose(const DisorderField& field, double beta, const GreenTable& green, int horizon,
                                 std::uint64_t max_env_configs = std::uint64_t{1} << 20);

// P(T_v < inf, <M>_{T_v} <= a) <= exp(-v/(A+1) (log(v / (a (A+1))) - 1)),
// reported capped at 1.
double concentration_bound(double v, double a, double A);

struct ConcentrationPoint {
  double v = 0.0;
  double a = 0.0;
  double bound = 1.0;
  std::size_t events = 0;
  std::size_t trials = 0;
  std::size_t unresolved = 0;  // neither hit nor excluded within the horizon
  double frequency = 0.0;
  double ci_low = 0.0;  // 95% Wilson interval
  double ci_high = 1.0;
  bool pass = true;
};

struct ConcentrationProbe {
  double A_bound = 1.0;
  int horizon = 0;
  std::vector<ConcentrationPoint> points;
};

// Runs replicas of M_n = sum (W_k / W_{k-1} - 1) with bracket chi sum I_k and
// records, for each (v, a), whether M reaches v while the bracket is still
// <= a. A replica stops as soon as every point is decided. A_bound = 0 selects
// max(L - 1, 1); a smaller explicit value is rejected.
ConcentrationProbe martingale_concentration_probe(const ModelSpec& model, const ReplicaPlan& plan,
                                                  const std::vector<std::pair<double, double>>& points, int horizon,
                                                  double A_bound = 0.0);

}  // namespace dpolymer
