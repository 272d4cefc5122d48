#pragma once

#include <cmath>
#include <concepts>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dpolymer/lattice.hpp"
#include "dpolymer/philox.hpp"

namespace dpolymer {

// omega = b with probability p, omega = a otherwise.
struct BinaryEnv {
  double a = -1.0;
  double b = 1.0;
  double p = 0.5;
};

struct UniformEnv {
  double a = -1.0;
  double b = 0.0;
};

// omega = top - E with E ~ Exp(rate).
struct ShiftedExpEnv {
  double top = 0.0;
  double rate = 1.0;
};

using EnvSpec = std::variant<BinaryEnv, UniformEnv, ShiftedExpEnv>;

std::string env_kind(const EnvSpec& env);
void validate(const EnvSpec& env);
double ess_sup(const EnvSpec& env);
double mean(const EnvSpec& env);
bool is_degenerate(const EnvSpec& env);
bool is_finite_support(const EnvSpec& env);

// log E[exp(beta * omega)]. Throws DomainError for the shifted exponential
// when beta <= -rate.
double log_mgf(const EnvSpec& env, double beta);
bool log_mgf_defined(const EnvSpec& env, double beta);

// Base law inverse CDF at u in (0,1).
double sample_base(const EnvSpec& env, double u);
// Inverse CDF of the exponentially tilted law exp(beta*omega - lambda) P(d omega).
double sample_tilted(const EnvSpec& env, double beta, double u);

// Probability that the tilted binary variable takes the upper value b.
double tilted_upper_probability(const BinaryEnv& env, double beta);

// chi(beta) = exp(lambda(2 beta) - 2 lambda(beta)) - 1; supremum over beta for
// environments where it is bounded (binary), nullopt otherwise.
double chi(const EnvSpec& env, double beta);
std::optional<double> chi_supremum(const EnvSpec& env);

struct EnvScalars {
  double beta = 0.0;
  double lambda_beta = 0.0;
  double lambda_2beta = 0.0;
  double lambda_3beta = 0.0;
  double lambda_8beta = 0.0;
  double lambda_minus8beta = 0.0;
  double chi = 0.0;
  double chi3 = 0.0;
  // ess sup of exp(beta*omega - lambda(beta)); bounds W_{n+1}/W_n.
  double L = 1.0;
  // n0^2 [(2d)^2 + exp((lambda(8b) + lambda(-8b))/2)]; unavailable when
  // lambda(-8 beta) is undefined (shifted exponential with beta >= rate/8).
  bool kappa_available = true;
  double kappa = 0.0;
  double fourth_moment_constant = 1.0;  // exp((lambda(8b)+lambda(-8b))/2)
  int n0 = 0;
  int dim = 1;
};

EnvScalars env_scalars(const EnvSpec& env, double beta, int n0, int dim);

// The physical parameters shared by every replica of an experiment.
struct ModelSpec {
  int dim = 1;
  double beta = 0.0;
  EnvSpec env = BinaryEnv{};
};

void validate(const ModelSpec& model);

// Spine overlay: sites (i, X_i) of a walk, in absolute field coordinates.
struct SpineOverlay {
  std::vector<Site> path;  // path[i] = X_i, path[0] = origin
  double beta = 0.0;
  PhiloxKey tilted_key{};

  bool on_spine(int time, const Site& x) const {
    return time >= 0 && static_cast<std::size_t>(time) < path.size() &&
           path[static_cast<std::size_t>(time)] == x;
  }
};

// Reproducible random-access i.i.d. field omega_{n,x}. Immutable; copies are
// cheap (the spine is shared).
class DisorderField {
 public:
  DisorderField(Seed128 seed, EnvSpec env, int dim);

  const Seed128& seed() const { return seed_; }
  const EnvSpec& env() const { return env_; }
  int dim() const { return dim_; }
  int time_shift() const { return time_shift_; }
  const Site& space_shift() const { return space_shift_; }
  const std::shared_ptr<const SpineOverlay>& spine() const { return spine_; }

  // theta_{m,y}: value(n, x) of the result equals value(n + m, x + y) here.
  DisorderField shifted(int m, const Site& y) const;
  DisorderField with_spine(std::shared_ptr<const SpineOverlay> spine) const;

  double value(int n, const Site& x) const {
    const int t = n + time_shift_;
    const Site z = x + space_shift_;
    if (spine_ && spine_->on_spine(t, z))
      return sample_tilted(env_, spine_->beta, uniform(spine_->tilted_key, t, z));
    const double u = uniform(base_key_, t, z);
    if (binary_) return u < binary_->lower_mass ? binary_->a : binary_->b;
    return sample_base(env_, u);
  }

  // Uniform variate driving the base value at absolute coordinates.
  double base_uniform(int t, const Site& z) const { return uniform(base_key_, t, z); }

 private:
  double uniform(const PhiloxKey& key, int t, const Site& z) const {
    PhiloxKey k = key;
    if (dim_ > 3) k = fold_extra_coordinates(key, z);
    return to_open_unit(philox4x32_10({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(z[0]),
                                       static_cast<std::uint32_t>(z[1]), static_cast<std::uint32_t>(z[2])},
                                      k));
  }
  static PhiloxKey fold_extra_coordinates(const PhiloxKey& key, const Site& z);

  Seed128 seed_;
  EnvSpec env_;
  int dim_;
  PhiloxKey base_key_{};
  int time_shift_ = 0;
  Site space_shift_{};
  std::shared_ptr<const SpineOverlay> spine_;
  // Inline inverse CDF for the binary case (same rule as sample_base).
  struct BinaryFast {
    double a, b, lower_mass;
  };
  std::optional<BinaryFast> binary_;
};

// Explicit finite table of values with a constant fallback, used to drive the
// transfer recursion on enumerated configurations.
class TabulatedField {
 public:
  TabulatedField(int dim, double fallback) : dim_(dim), fallback_(fallback) {}
  void set(int n, const Site& x, double v) { values_[{n, x}] = v; }
  double value(int n, const Site& x) const {
    auto it = values_.find({n, x});
    return it == values_.end() ? fallback_ : it->second;
  }
  int dim() const { return dim_; }

 private:
  int dim_;
  double fallback_;
  std::map<std::pair<int, Site>, double> values_;
};

template <class F>
concept FieldLike = requires(const F& f, int n, const Site& x) {
  { f.value(n, x) } -> std::convertible_to<double>;
  { f.dim() } -> std::convertible_to<int>;
};

}  // namespace dpolymer
