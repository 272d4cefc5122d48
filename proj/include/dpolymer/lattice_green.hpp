#pragma once

#include <cstdint>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/lattice.hpp"

namespace dpolymer {

inline constexpr int kDefaultConvolutionBudget = 200000;

// Nearest-neighbour simple random walk step law D(x, y) = 1/(2d) 1{|y-x|_1 = 1}.
struct WalkKernel {
  int dim = 1;

  explicit WalkKernel(int d) : dim(d) { check_dimension(d); }
  double step_probability() const { return 1.0 / (2.0 * dim); }
  std::vector<Site> offsets() const;
};

// (Df)(x) = sum_y D(x, y) f(y).
SiteMap convolve(const SiteMap& f, const WalkKernel& kernel);
SiteMap convolve_power(SiteMap f, const WalkKernel& kernel, int steps);

// P(X_{2n} = 0) for k = 0..n_max, via the coordinate-splitting recursion
//   u_d(2n) = sum_j C(2n,2j) d^{-2j} (1-1/d)^{2n-2j} u_1(2j) u_{d-1}(2n-2j).
std::vector<double> return_probability_sequence(int dim, int n_max);

// P(X_{2n} = 0). Throws BudgetError when 2n exceeds max_steps.
double return_probability(int dim, int n, int max_steps = kDefaultConvolutionBudget);

// g0(x) = sum_{n=1}^{n0} P(X_{2n} = x), built by repeated D^2 convolution.
struct GreenTable {
  int dim = 1;
  int n0 = 1;
  SiteMap values;
  double g0_at_0 = 0.0;
  double norm1 = 0.0;
  double norm4 = 0.0;

  double at(const Site& x) const {
    auto it = values.find(x);
    return it == values.end() ? 0.0 : it->second;
  }
};

GreenTable green_g0(int dim, int n0, int max_steps = kDefaultConvolutionBudget);

// Full Green value g(0) = sum_{n>=1} P(X_{2n} = 0) for transient dimensions.
//
// Terms are summed exactly up to the truncation point N. The reported
// tail_bound uses the envelope P(X_{2n}=0) <= C n^{-d/2}, C being twice the
// largest ratio over the first 200 terms. When that envelope cannot reach the
// tolerance within max_terms (d = 3, 4 at tight tolerances), the tail is
// instead estimated from a fit u_n n^{d/2} = c0 + c1/n + c2/n^2 on [N/2, N];
// tail_error then reports the spread between fits of different order.
struct GreenSeries {
  double value = 0.0;
  int truncation_point = 0;
  double partial_sum = 0.0;
  double envelope_constant = 0.0;
  double tail_bound = 0.0;     // envelope bound on the omitted tail
  double tail_estimate = 0.0;  // tail added to partial_sum (0 when envelope suffices)
  double tail_error = 0.0;     // uncertainty of value
  bool used_tail_fit = false;
  bool tolerance_met = false;
};

GreenSeries green_g_at_0(int dim, double tolerance, int max_terms = 16384);

// Same quantity via the return probability p = P(exists n >= 1: X_n = 0):
// first-return probabilities f_{2n} from the renewal relation, summed with a
// fitted tail, then g(0) = p / (1 - p).
struct ReturnProbability {
  double p = 0.0;
  int truncation_point = 0;
  double tail_estimate = 0.0;
  double tail_error = 0.0;
  double green_value = 0.0;  // p / (1 - p)
};

ReturnProbability return_probability_renewal(int dim, int n_terms = 8192);

// sup{beta : chi(beta) g(0) < 1}.
struct Beta2Result {
  bool infinite = false;
  double beta2 = 0.0;
  double g_at_0 = 0.0;
  double residual = 0.0;  // |chi(beta2) g(0) - 1|, 0 when infinite
  int iterations = 0;
};

Beta2Result beta2_solve(const EnvSpec& env, int dim, double tolerance = 1e-10);
Beta2Result beta2_solve(const EnvSpec& env, int dim, double g_at_0, double tolerance);

// Smallest n0 with chi(beta) sum_{n=1}^{n0} P(X_{2n}=0) > 1. Throws
// CapabilityError when no such n0 exists within max_n0 (beta <= beta_2).
int minimal_n0(const EnvSpec& env, double beta, int dim, int max_n0 = 4096);

}  // namespace dpolymer
