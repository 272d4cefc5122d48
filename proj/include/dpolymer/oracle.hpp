#pragma once

// Brute-force reference computations. Everything here is written directly
// from the model definitions (path sums, environment enumeration, explicit
// convolutions) and does not call into the transfer engine, the Green
// module or the environment scalars, so it can serve as ground truth for
// them. All routines are templated on the arithmetic type; HighPrecision
// carries 50 decimal digits.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/lattice.hpp"

namespace dpolymer::oracle {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;
inline constexpr const char* kOracleVersion = "oracle-1";

struct EnumerationBudget {
  std::uint64_t max_paths = 1'000'000;
  std::uint64_t max_env_configs = std::uint64_t{1} << 20;
};

namespace detail {

inline std::vector<Site> unit_steps(int dim) {
  std::vector<Site> steps;
  for (int i = 0; i < dim; ++i)
    for (int s : {-1, 1}) steps.push_back(unit_site(i, s));
  return steps;
}

inline std::uint64_t checked_power(std::uint64_t base, int exponent, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int i = 0; i < exponent; ++i) {
    if (r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

}  // namespace detail

// log E[exp(beta omega)] evaluated in Real.
template <class Real>
Real log_mgf(const EnvSpec& env, const Real& beta) {
  using std::exp;
  using std::log;
  if (const auto* e = std::get_if<BinaryEnv>(&env))
    return log(Real(e->p) * exp(beta * Real(e->b)) + (Real(1) - Real(e->p)) * exp(beta * Real(e->a)));
  if (const auto* e = std::get_if<UniformEnv>(&env)) {
    if (beta == 0) return Real(0);
    return log((exp(beta * Real(e->b)) - exp(beta * Real(e->a))) / (beta * (Real(e->b) - Real(e->a))));
  }
  const auto& e = std::get<ShiftedExpEnv>(env);
  if (!(beta > -Real(e.rate))) throw DomainError("log_mgf undefined for beta <= -rate");
  return beta * Real(e.top) - log(Real(1) + beta / Real(e.rate));
}

template <class Real>
struct PathSums {
  Real W = Real(0);
  BasicSiteMap<Real> p2p;
  std::uint64_t paths = 0;
};

// W_n and every What_n(x) by summing exp(beta H_n - n lambda) over all (2d)^n
// nearest-neighbour paths.
template <class Real, FieldLike Field>
PathSums<Real> enumerate_W(const Field& field, const EnvSpec& env, const Real& beta, int n,
                           const EnumerationBudget& budget = {}) {
  using std::exp;
  const int d = field.dim();
  if (detail::checked_power(2 * static_cast<std::uint64_t>(d), n, budget.max_paths) > budget.max_paths)
    throw BudgetError("enumerate_W: (2d)^n exceeds the path budget");
  const Real lambda = log_mgf<Real>(env, beta);
  Real path_weight = Real(1);
  for (int i = 0; i < n; ++i) path_weight /= Real(2 * d);
  const auto steps = detail::unit_steps(d);
  PathSums<Real> out;
  std::function<void(int, const Site&, const Real&)> walk = [&](int k, const Site& x, const Real& energy) {
    if (k == n) {
      const Real w = exp(beta * energy - Real(n) * lambda) * path_weight;
      out.W += w;
      out.p2p[x] += w;
      ++out.paths;
      return;
    }
    for (const Site& s : steps) {
      const Site y = x + s;
      walk(k + 1, y, energy + Real(field.value(k + 1, y)));
    }
  };
  if (n == 0) {
    out.W = Real(1);
    out.p2p[Site{}] = Real(1);
    out.paths = 1;
    return out;
  }
  walk(0, Site{}, Real(0));
  return out;
}

// Number of nearest-neighbour walks of the given length returning to 0.
std::uint64_t count_closed_walks(int dim, int steps);

// g0(x) = sum_{k=1}^{n0} P(X_{2k} = x) by explicit stepping of the walk law.
template <class Real>
BasicSiteMap<Real> green_g0(int dim, int n0) {
  const auto steps = detail::unit_steps(dim);
  const Real q = Real(1) / Real(2 * dim);
  BasicSiteMap<Real> law{{Site{}, Real(1)}};
  BasicSiteMap<Real> g;
  for (int k = 1; k <= 2 * n0; ++k) {
    BasicSiteMap<Real> next;
    for (const auto& [x, m] : law)
      for (const Site& s : steps) next[x + s] += m * q;
    law = std::move(next);
    if (k % 2 == 0)
      for (const auto& [x, m] : law) g[x] += m;
  }
  return g;
}

// Two-point environment with exact weights.
template <class Real>
struct BinaryLaw {
  Real beta, lambda;
  Real a, b;
  Real p_hi, p_lo;  // P(omega = b), P(omega = a)
  Real w_hi, w_lo;  // exp(beta b - lambda), exp(beta a - lambda)
  Real chi;         // E[(w - 1)^2]
  Real chi3;        // E[(w - 1)^3]
};

template <class Real>
BinaryLaw<Real> binary_law(const BinaryEnv& e, const Real& beta) {
  using std::exp;
  BinaryLaw<Real> law;
  law.beta = beta;
  law.lambda = log_mgf<Real>(EnvSpec{e}, beta);
  law.a = Real(e.a);
  law.b = Real(e.b);
  law.p_hi = Real(e.p);
  law.p_lo = Real(1) - law.p_hi;
  law.w_hi = exp(beta * law.b - law.lambda);
  law.w_lo = exp(beta * law.a - law.lambda);
  const Real dh = law.w_hi - 1, dl = law.w_lo - 1;
  law.chi = law.p_hi * dh * dh + law.p_lo * dl * dl;
  law.chi3 = law.p_hi * dh * dh * dh + law.p_lo * dl * dl * dl;
  return law;
}

// Reachable space-time sites {(k, x) : 1 <= k <= n, |x|_1 <= k, parity k}.
struct LightCone {
  int dim = 1;
  int n = 0;
  std::vector<std::pair<int, Site>> sites;
  std::map<std::pair<int, Site>, int> index;

  LightCone(int d, int horizon);
  std::size_t size() const { return sites.size(); }
};

// One configuration of a binary field on a light cone. Sites outside the cone
// read as the lower value (they never enter a path sum).
class ConeConfiguration {
 public:
  ConeConfiguration(const LightCone& cone, double a, double b, std::uint64_t bits)
      : cone_(&cone), a_(a), b_(b), bits_(bits) {}
  bool upper(int k, const Site& x) const {
    auto it = cone_->index.find({k, x});
    return it != cone_->index.end() && ((bits_ >> it->second) & 1u);
  }
  double value(int k, const Site& x) const { return upper(k, x) ? b_ : a_; }
  int dim() const { return cone_->dim; }
  std::uint64_t bits() const { return bits_; }

 private:
  const LightCone* cone_;
  double a_, b_;
  std::uint64_t bits_;
};

// Probability of a configuration under the product law.
template <class Real>
Real configuration_probability(const LightCone& cone, const BinaryLaw<Real>& law, std::uint64_t bits) {
  Real p = Real(1);
  for (std::size_t i = 0; i < cone.size(); ++i) p *= ((bits >> i) & 1u) ? law.p_hi : law.p_lo;
  return p;
}

// What_k on a configuration, k = 0..n, by the explicit step-by-step path sum
// (D What_{k-1} multiplied by the site weight).
template <class Real>
std::vector<BasicSiteMap<Real>> p2p_history(const ConeConfiguration& config, const BinaryLaw<Real>& law, int n) {
  const int d = config.dim();
  const auto steps = detail::unit_steps(d);
  const Real q = Real(1) / Real(2 * d);
  std::vector<BasicSiteMap<Real>> hist;
  hist.push_back({{Site{}, Real(1)}});
  for (int k = 1; k <= n; ++k) {
    BasicSiteMap<Real> next;
    for (const auto& [x, w] : hist.back())
      for (const Site& s : steps) next[x + s] += w * q;
    for (auto& [x, w] : next) w *= config.upper(k, x) ? law.w_hi : law.w_lo;
    hist.push_back(std::move(next));
  }
  return hist;
}

// E[F(config)] over all 2^|cone| configurations.
template <class Real, class F>
Real expectation(const LightCone& cone, const BinaryLaw<Real>& law, const EnumerationBudget& budget, F&& functional) {
  if (cone.size() >= 63 || (std::uint64_t{1} << cone.size()) > budget.max_env_configs)
    throw BudgetError("expectation: light cone too large for the configuration budget");
  Real total = Real(0);
  const double a = static_cast<double>(law.a), b = static_cast<double>(law.b);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << cone.size()); ++bits) {
    ConeConfiguration config(cone, a, b, bits);
    total += configuration_probability(cone, law, bits) * Real(functional(config));
  }
  return total;
}

// Conditional moments of the step n-1 -> n given the endpoint law mu_{n-1},
// by enumerating the time-n environment on the support of D mu_{n-1}.
template <class Real>
struct SliceMoments {
  Real I = Real(0);               // sum (D mu)^2
  Real sum_cubes = Real(0);       // sum (D mu)^3
  Real mean_ratio = Real(0);      // E[W_n / W_{n-1}]
  Real mean_sq_dev = Real(0);     // E[(W_n / W_{n-1} - 1)^2]
  Real mean_J = Real(0);          // E[J_n]
  Real mean_J_sq = Real(0);       // E[J_n^2]
  Real mean_mu_norm4 = Real(0);   // E[||mu_n||_2^4]
  Real nu_sq_G0_nu = Real(0);     // ((D mu)^2, G0 D mu)
  Real J_prev = Real(0);          // (mu_{n-1}, G0 mu_{n-1})
  Real mu_prev_norm2_sq = Real(0);
  BasicSiteMap<Real> nu;          // D mu_{n-1}
  std::uint64_t configs = 0;
  // Per configuration: probability, J_n and ||mu_n||^2.
  std::vector<Real> probability, J, mu_norm2_sq;
};

template <class Real>
Real green_form(const BasicSiteMap<Real>& f, const BasicSiteMap<Real>& h, const BasicSiteMap<Real>& g0) {
  Real s = Real(0);
  for (const auto& [x, fx] : f)
    for (const auto& [y, hy] : h) {
      auto it = g0.find(y - x);
      if (it != g0.end()) s += fx * it->second * hy;
    }
  return s;
}

template <class Real>
SliceMoments<Real> conditional_slice(const BasicSiteMap<Real>& mu_prev, int dim, const BinaryLaw<Real>& law,
                                     const BasicSiteMap<Real>* g0, const EnumerationBudget& budget = {}) {
  const auto steps = detail::unit_steps(dim);
  const Real q = Real(1) / Real(2 * dim);
  SliceMoments<Real> out;
  for (const auto& [x, m] : mu_prev)
    for (const Site& s : steps) out.nu[x + s] += m * q;
  std::vector<Site> support;
  std::vector<Real> nu;
  for (const auto& [x, v] : out.nu) {
    support.push_back(x);
    nu.push_back(v);
    out.I += v * v;
    out.sum_cubes += v * v * v;
  }
  for (const auto& [x, v] : mu_prev) out.mu_prev_norm2_sq += v * v;
  if (g0) {
    BasicSiteMap<Real> nu_sq;
    for (const auto& [x, v] : out.nu) nu_sq[x] = v * v;
    out.nu_sq_G0_nu = green_form(nu_sq, out.nu, *g0);
    out.J_prev = green_form(mu_prev, mu_prev, *g0);
  }
  const std::size_t k = support.size();
  if (k >= 63 || (std::uint64_t{1} << k) > budget.max_env_configs)
    throw BudgetError("conditional_slice: support of D mu exceeds the configuration budget");
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
    Real prob = Real(1), ratio = Real(0);
    std::vector<Real> weighted(k);
    for (std::size_t i = 0; i < k; ++i) {
      const bool hi = (bits >> i) & 1u;
      prob *= hi ? law.p_hi : law.p_lo;
      weighted[i] = (hi ? law.w_hi : law.w_lo) * nu[i];
      ratio += weighted[i];
    }
    BasicSiteMap<Real> mu;
    Real norm2 = Real(0);
    for (std::size_t i = 0; i < k; ++i) {
      const Real m = weighted[i] / ratio;
      mu[support[i]] = m;
      norm2 += m * m;
    }
    const Real dev = ratio - 1;
    out.mean_ratio += prob * ratio;
    out.mean_sq_dev += prob * dev * dev;
    out.mean_mu_norm4 += prob * norm2 * norm2;
    Real J = Real(0);
    if (g0) {
      J = green_form(mu, mu, *g0);
      out.mean_J += prob * J;
      out.mean_J_sq += prob * J * J;
    }
    out.probability.push_back(prob);
    out.J.push_back(J);
    out.mu_norm2_sq.push_back(norm2);
    ++out.configs;
  }
  return out;
}

// Total variation sum |P_spine(c) - E[W_s 1{c}]| over binary configurations of
// the time <= s light cone. `on_spine(path, k, x)` decides which sites of a
// given spine path read the tilted marginal; the caller passes the overlay
// membership used by the sampler.
template <class Real>
Real spine_vs_size_biased_deviation(
    int dim, int s, const BinaryLaw<Real>& law,
    const std::function<bool(const std::vector<Site>&, int, const Site&)>& on_spine,
    const EnumerationBudget& budget = {}) {
  const LightCone cone(dim, s);
  if (cone.size() >= 63 || (std::uint64_t{1} << cone.size()) > budget.max_env_configs)
    throw BudgetError("spine_vs_size_biased_deviation: light cone too large");
  const auto steps = detail::unit_steps(dim);
  std::vector<std::vector<Site>> paths{{Site{}}};
  for (int k = 1; k <= s; ++k) {
    std::vector<std::vector<Site>> next;
    for (const auto& p : paths)
      for (const Site& st : steps) {
        auto q = p;
        q.push_back(p.back() + st);
        next.push_back(std::move(q));
      }
    paths = std::move(next);
  }
  const Real path_prob = Real(1) / Real(paths.size());
  const Real tilted_hi = law.p_hi * law.w_hi, tilted_lo = law.p_lo * law.w_lo;
  const double a = static_cast<double>(law.a), b = static_cast<double>(law.b);
  Real deviation = Real(0);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << cone.size()); ++bits) {
    ConeConfiguration config(cone, a, b, bits);
    const auto hist = p2p_history(config, law, s);
    Real W = Real(0);
    for (const auto& [x, w] : hist.back()) W += w;
    const Real size_biased = configuration_probability(cone, law, bits) * W;
    Real spine = Real(0);
    for (const auto& p : paths) {
      Real pr = path_prob;
      for (std::size_t i = 0; i < cone.size(); ++i) {
        const auto& [k, x] = cone.sites[i];
        const bool hi = (bits >> i) & 1u;
        if (on_spine(p, k, x))
          pr *= hi ? tilted_hi : tilted_lo;
        else
          pr *= hi ? law.p_hi : law.p_lo;
      }
      spine += pr;
    }
    using std::abs;
    deviation += abs(spine - size_biased);
  }
  return deviation;
}

}  // namespace dpolymer::oracle
