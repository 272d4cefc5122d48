#include "dpolymer/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpolymer {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double log_sum_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

}  // namespace

std::string env_kind(const EnvSpec& env) {
  return std::visit(overloaded{[](const BinaryEnv&) { return std::string("binary"); },
                               [](const UniformEnv&) { return std::string("uniform"); },
                               [](const ShiftedExpEnv&) { return std::string("shifted-negative-exponential"); }},
                    env);
}

void validate(const EnvSpec& env) {
  std::visit(overloaded{[](const BinaryEnv& e) {
                          if (!std::isfinite(e.a) || !std::isfinite(e.b) || e.a > e.b)
                            throw ValidationError("env.params: binary requires finite a <= b");
                          if (!(e.p >= 0.0 && e.p <= 1.0))
                            throw ValidationError("env.params.p: must lie in [0, 1]");
                        },
                        [](const UniformEnv& e) {
                          if (!std::isfinite(e.a) || !std::isfinite(e.b) || !(e.a < e.b))
                            throw ValidationError("env.params: uniform requires finite a < b");
                        },
                        [](const ShiftedExpEnv& e) {
                          if (!std::isfinite(e.top))
                            throw ValidationError("env.params.A: must be finite");
                          if (!(e.rate > 0.0) || !std::isfinite(e.rate))
                            throw ValidationError("env.params.rate: must be positive");
                        }},
             env);
}

double ess_sup(const EnvSpec& env) {
  return std::visit(overloaded{[](const BinaryEnv& e) { return e.p > 0.0 ? e.b : e.a; },
                               [](const UniformEnv& e) { return e.b; },
                               [](const ShiftedExpEnv& e) { return e.top; }},
                    env);
}

double mean(const EnvSpec& env) {
  return std::visit(overloaded{[](const BinaryEnv& e) { return e.p * e.b + (1.0 - e.p) * e.a; },
                               [](const UniformEnv& e) { return 0.5 * (e.a + e.b); },
                               [](const ShiftedExpEnv& e) { return e.top - 1.0 / e.rate; }},
                    env);
}

bool is_degenerate(const EnvSpec& env) {
  if (const auto* e = std::get_if<BinaryEnv>(&env)) return e->a == e->b || e->p == 0.0 || e->p == 1.0;
  return false;
}

bool is_finite_support(const EnvSpec& env) { return std::holds_alternative<BinaryEnv>(env); }

bool log_mgf_defined(const EnvSpec& env, double beta) {
  if (const auto* e = std::get_if<ShiftedExpEnv>(&env)) return beta > -e->rate;
  return true;
}

double log_mgf(const EnvSpec& env, double beta) {
  return std::visit(
      overloaded{[beta](const BinaryEnv& e) {
                   const double ninf = -std::numeric_limits<double>::infinity();
                   const double hi = e.p > 0.0 ? beta * e.b + std::log(e.p) : ninf;
                   const double lo = e.p < 1.0 ? beta * e.a + std::log1p(-e.p) : ninf;
                   return log_sum_exp(hi, lo);
                 },
                 [beta](const UniformEnv& e) {
                   if (beta == 0.0) return 0.0;
                   const double t = beta * (e.b - e.a);
                   if (t > 0.0) return beta * e.b + std::log(-std::expm1(-t) / t);
                   return beta * e.a + std::log(std::expm1(t) / t);
                 },
                 [beta](const ShiftedExpEnv& e) {
                   if (!(beta > -e.rate))
                     throw DomainError("lambda(beta) undefined for shifted exponential with beta <= -rate");
                   return beta * e.top - std::log1p(beta / e.rate);
                 }},
      env);
}

double sample_base(const EnvSpec& env, double u) {
  return std::visit(overloaded{[u](const BinaryEnv& e) { return u < 1.0 - e.p ? e.a : e.b; },
                               [u](const UniformEnv& e) { return e.a + u * (e.b - e.a); },
                               [u](const ShiftedExpEnv& e) { return e.top + std::log1p(-u) / e.rate; }},
                    env);
}

double tilted_upper_probability(const BinaryEnv& e, double beta) {
  if (e.p == 0.0) return 0.0;
  return std::min(1.0, e.p * std::exp(beta * e.b - log_mgf(EnvSpec{e}, beta)));
}

double sample_tilted(const EnvSpec& env, double beta, double u) {
  if (beta < 0.0) throw DomainError("tilted sampling requires beta >= 0");
  return std::visit(overloaded{[&](const BinaryEnv& e) {
                                 return u < 1.0 - tilted_upper_probability(e, beta) ? e.a : e.b;
                               },
                               [&](const UniformEnv& e) {
                                 if (beta == 0.0) return e.a + u * (e.b - e.a);
                                 const double t = beta * (e.b - e.a);
                                 return e.b + std::log1p((1.0 - u) * std::expm1(-t)) / beta;
                               },
                               [&](const ShiftedExpEnv& e) { return e.top + std::log1p(-u) / (e.rate + beta); }},
                    env);
}

double chi(const EnvSpec& env, double beta) {
  return std::expm1(log_mgf(env, 2.0 * beta) - 2.0 * log_mgf(env, beta));
}

std::optional<double> chi_supremum(const EnvSpec& env) {
  if (const auto* e = std::get_if<BinaryEnv>(&env)) {
    if (is_degenerate(env)) return 0.0;
    return 1.0 / e->p - 1.0;
  }
  return std::nullopt;
}

EnvScalars env_scalars(const EnvSpec& env, double beta, int n0, int dim) {
  validate(env);
  if (beta < 0.0) throw DomainError("env_scalars requires beta >= 0");
  EnvScalars s;
  s.beta = beta;
  s.n0 = n0;
  s.dim = dim;
  s.lambda_beta = log_mgf(env, beta);
  s.lambda_2beta = log_mgf(env, 2.0 * beta);
  s.lambda_3beta = log_mgf(env, 3.0 * beta);
  s.lambda_8beta = log_mgf(env, 8.0 * beta);
  s.chi = std::expm1(s.lambda_2beta - 2.0 * s.lambda_beta);
  s.chi3 = std::exp(s.lambda_3beta - 3.0 * s.lambda_beta) - 3.0 * std::exp(s.lambda_2beta - 2.0 * s.lambda_beta) + 2.0;
  s.L = std::exp(beta * ess_sup(env) - s.lambda_beta);
  if (log_mgf_defined(env, -8.0 * beta)) {
    s.lambda_minus8beta = log_mgf(env, -8.0 * beta);
    s.fourth_moment_constant = std::exp(0.5 * (s.lambda_8beta + s.lambda_minus8beta));
    const double two_d = 2.0 * dim;
    s.kappa = static_cast<double>(n0) * n0 * (two_d * two_d + s.fourth_moment_constant);
  } else {
    s.kappa_available = false;
    s.lambda_minus8beta = std::numeric_limits<double>::quiet_NaN();
    s.fourth_moment_constant = std::numeric_limits<double>::infinity();
    s.kappa = std::numeric_limits<double>::infinity();
  }
  return s;
}

void validate(const ModelSpec& model) {
  check_dimension(model.dim);
  validate(model.env);
  if (!(model.beta >= 0.0) || !std::isfinite(model.beta)) throw ValidationError("beta: must be finite and >= 0");
}

DisorderField::DisorderField(Seed128 seed, EnvSpec env, int dim) : seed_(seed), env_(std::move(env)), dim_(dim) {
  validate(env_);
  check_dimension(dim);
  base_key_ = derive_key(seed_, Stream::kBaseField);
  if (const auto* e = std::get_if<BinaryEnv>(&env_)) binary_ = BinaryFast{e->a, e->b, 1.0 - e->p};
}

DisorderField DisorderField::shifted(int m, const Site& y) const {
  DisorderField f = *this;
  f.time_shift_ += m;
  f.space_shift_ = f.space_shift_ + y;
  return f;
}

DisorderField DisorderField::with_spine(std::shared_ptr<const SpineOverlay> spine) const {
  DisorderField f = *this;
  f.spine_ = std::move(spine);
  return f;
}

PhiloxKey DisorderField::fold_extra_coordinates(const PhiloxKey& key, const Site& z) {
  const PhiloxCounter out = philox4x32_10(
      {static_cast<std::uint32_t>(z[3]), static_cast<std::uint32_t>(z[4]), static_cast<std::uint32_t>(z[5]), 0xF01Du},
      key);
  return {out[0], out[1]};
}

std::string to_string(const Site& s, int dim) {
  std::string r = "(";
  for (int i = 0; i < dim; ++i) {
    if (i) r += ",";
    r += std::to_string(s[i]);
  }
  return r + ")";
}

}  // namespace dpolymer
