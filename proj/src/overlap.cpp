#include "dpolymer/overlap.hpp"

#include <algorithm>
#include <cmath>

#include "dpolymer/parallel.hpp"

namespace dpolymer {

SiteMap apply_green(const SiteMap& f, const GreenTable& green, GreenMethod method) {
  if (method == GreenMethod::kAuto)
    method = f.size() * green.values.size() <= kDirectGreenPairs ? GreenMethod::kDirect : GreenMethod::kConvolution;
  SiteMap out;
  if (method == GreenMethod::kDirect) {
    for (const auto& [x, fx] : f)
      for (const auto& [y, gy] : green.values) out[x + y] += fx * gy;
    return out;
  }
  const WalkKernel kernel(green.dim);
  SiteMap cur = f;
  for (int k = 1; k <= green.n0; ++k) {
    cur = convolve(convolve(cur, kernel), kernel);
    for (const auto& [x, v] : cur) out[x] += v;
  }
  return out;
}

double green_form(const SiteMap& f, const SiteMap& h, const GreenTable& green) {
  double s = 0.0;
  for (const auto& [x, fx] : f) {
    double inner = 0.0;
    for (const auto& [y, gy] : green.values) {
      auto it = h.find(x + y);
      if (it != h.end()) inner += gy * it->second;
    }
    s += fx * inner;
  }
  return s;
}

double front_green_form(const PolymerFront& front, const GreenTable& green) {
  const DiamondLayout& layout = front.layout();
  const auto& w = front.weights();
  double s = 0.0;
  front.for_each([&](const Site& x, double wx) {
    if (wx == 0.0) return;
    double inner = 0.0;
    for (const auto& [y, gy] : green.values) {
      const auto idx = layout.index_of(x + y);
      if (idx) inner += gy * w[*idx];
    }
    s += wx * inner;
  });
  const double total = front.weight_sum();
  return s / (total * total);
}

double drift_lower_bound(double I, double nu_sq_G0_nu, double sum_nu_cubed, double g0_at_0, double chi,
                         double chi3) {
  return (chi * g0_at_0 - 1.0) * I - 4.0 * chi * nu_sq_G0_nu - 2.0 * chi3 * g0_at_0 * sum_nu_cubed;
}

double kappa(int n0, int dim, double fourth_moment_constant) {
  const double two_d = 2.0 * dim;
  return static_cast<double>(n0) * n0 * (two_d * two_d + fourth_moment_constant);
}

namespace {

void check_consecutive(const PolymerFront& previous, const PolymerFront& current) {
  if (previous.dim() != current.dim()) throw ValidationError("fronts have different dimensions");
  if (current.time() != previous.time() + 1) throw ValidationError("fronts are not consecutive in time");
}

SiteMap smoothed_map(const PolymerFront& previous) {
  DiamondLayout layout;
  const auto nu = smoothed_law(previous, layout);
  SiteMap m;
  for (std::size_t r = 0; r < layout.row_count(); ++r)
    for (int j = 0; j <= layout.row_half_width(r); ++j) {
      const double v = nu[layout.row_offset(r) + static_cast<std::size_t>(j)];
      if (v > 0.0) m.emplace_hint(m.end(), layout.site_at(r, j), v);
    }
  return m;
}

double norm2_sq(const PolymerFront& f) {
  double s = 0.0;
  for (double w : f.weights()) s += w * w;
  return s / (f.weight_sum() * f.weight_sum());
}

}  // namespace

OverlapStep overlap_step(const PolymerFront& previous, const PolymerFront& current, const GreenTable& green,
                         const EnvScalars& scalars) {
  check_consecutive(previous, current);
  if (green.dim != current.dim()) throw ValidationError("Green table dimension differs from the fronts");
  OverlapStep s;
  s.n = current.time();
  s.Dmu = smoothed_map(previous);
  s.G0Dmu = apply_green(s.Dmu, green);
  double nu_sq_G0_nu = 0.0, cubes = 0.0;
  for (const auto& [x, v] : s.Dmu) {
    s.I += v * v;
    cubes += v * v * v;
    auto it = s.G0Dmu.find(x);
    if (it != s.G0Dmu.end()) nu_sq_G0_nu += v * v * it->second;
  }
  s.J = front_green_form(current, green);
  s.mu_norm2_sq = norm2_sq(current);
  s.prev_mu_norm2_sq = norm2_sq(previous);
  s.drift_lower_bound = drift_lower_bound(s.I, nu_sq_G0_nu, cubes, green.g0_at_0, scalars.chi, scalars.chi3);
  s.N_sq_bound = kappa(green.n0, green.dim, scalars.fourth_moment_constant) * s.I * s.I;
  return s;
}

SplashCheck splash_check(const SiteMap& mu, const GreenTable& green) {
  SplashCheck c;
  double sq = 0.0;
  for (const auto& [x, v] : mu) sq += v * v;
  c.mu_norm2 = std::sqrt(sq);
  c.g0_norm4 = green.norm4;
  const SiteMap G0mu = apply_green(mu, green);
  for (const auto& [x, v] : G0mu) c.sup_G0mu = std::max(c.sup_G0mu, v);
  for (const auto& [x, v] : mu) {
    auto it = G0mu.find(x);
    if (it == G0mu.end()) continue;
    c.J += v * it->second;
    c.mu2_G0mu += v * v * it->second;
  }
  c.sup_bound = c.g0_norm4 * std::sqrt(c.mu_norm2);
  c.J_bound = c.sup_bound;
  c.mu2_G0mu_bound = c.g0_norm4 * std::pow(c.mu_norm2, 2.5);
  auto slack = [](double bound, double value) { return bound > 0.0 ? (bound - value) / bound : -value; };
  c.min_slack = std::min({slack(c.sup_bound, c.sup_G0mu), slack(c.J_bound, c.J), slack(c.mu2_G0mu_bound, c.mu2_G0mu)});
  c.ok = c.min_slack >= -1e-12;
  return c;
}

DoobStep doob_step(const PolymerFront& previous, const PolymerFront& current, const BinaryEnv& env,
                   const EnvScalars& scalars, const GreenTable& green, std::uint64_t max_env_configs) {
  check_consecutive(previous, current);
  const SiteMap nu_map = smoothed_map(previous);
  std::vector<Site> sites;
  std::vector<double> nu;
  for (const auto& [x, v] : nu_map) {
    sites.push_back(x);
    nu.push_back(v);
  }
  const std::size_t k = sites.size();
  if (k >= 63 || (std::uint64_t{1} << k) > max_env_configs)
    throw BudgetError("doob_decompose: 2^|supp D mu| = 2^" + std::to_string(k) + " exceeds max_env_configs");

  std::vector<double> G(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) G[i * k + j] = green.at(sites[j] - sites[i]);

  const double w_hi = std::exp(scalars.beta * env.b - scalars.lambda_beta);
  const double w_lo = std::exp(scalars.beta * env.a - scalars.lambda_beta);
  DoobStep s;
  s.n = current.time();
  double cubes = 0.0;
  for (double v : nu) {
    s.I += v * v;
    cubes += v * v * v;
  }
  double nu_sq_G0_nu = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) nu_sq_G0_nu += nu[i] * nu[i] * G[i * k + j] * nu[j];

  std::vector<double> mu(k), Js, probs;
  const std::uint64_t configs = std::uint64_t{1} << k;
  Js.reserve(configs);
  probs.reserve(configs);
  double mean_J = 0.0;
  for (std::uint64_t bits = 0; bits < configs; ++bits) {
    double prob = 1.0, ratio = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const bool hi = (bits >> i) & 1u;
      prob *= hi ? env.p : 1.0 - env.p;
      mu[i] = (hi ? w_hi : w_lo) * nu[i];
      ratio += mu[i];
    }
    double norm2 = 0.0, J = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      mu[i] /= ratio;
      norm2 += mu[i] * mu[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < k; ++j) row += G[i * k + j] * mu[j];
      J += mu[i] * row;
    }
    s.cond_ratio_mean += prob * ratio;
    s.cond_ratio_sq_dev += prob * (ratio - 1.0) * (ratio - 1.0);
    s.cond_mu_norm4 += prob * norm2 * norm2;
    mean_J += prob * J;
    Js.push_back(J);
    probs.push_back(prob);
  }
  for (std::size_t c = 0; c < Js.size(); ++c) s.cond_var_N += probs[c] * (Js[c] - mean_J) * (Js[c] - mean_J);

  s.J_prev = front_green_form(previous, green);
  s.J = front_green_form(current, green);
  s.drift = mean_J - s.J_prev;
  s.N_increment = s.J - mean_J;
  s.drift_lower_bound = drift_lower_bound(s.I, nu_sq_G0_nu, cubes, green.g0_at_0, scalars.chi, scalars.chi3);
  s.N_increment_bound = green.n0 * std::max(norm2_sq(current), norm2_sq(previous));
  s.kappa_I_sq = kappa(green.n0, green.dim, scalars.fourth_moment_constant) * s.I * s.I;
  s.mu_norm4_bound = scalars.fourth_moment_constant * s.I * s.I;
  s.configs = configs;
  return s;
}

DoobDecomposition doob_decompose(const DisorderField& field, double beta, const GreenTable& green, int horizon,
                                 std::uint64_t max_env_configs) {
  const auto* env = std::get_if<BinaryEnv>(&field.env());
  if (!env) throw CapabilityError("exact Doob decomposition requires a binary environment");
  if (green.dim != field.dim()) throw ValidationError("Green table dimension differs from the field");
  const EnvScalars scalars = env_scalars(field.env(), beta, green.n0, field.dim());
  DoobDecomposition out;
  PolymerFront prev = PolymerFront::origin(field.dim());
  out.J0 = front_green_form(prev, green);
  double A = 0.0;
  for (int n = 1; n <= horizon; ++n) {
    PolymerFront cur = advance(prev, field, scalars);
    DoobStep s = doob_step(prev, cur, *env, scalars, green, max_env_configs);
    A += s.drift;
    s.A = A;
    s.N = s.J - out.J0 - A;
    out.steps.push_back(s);
    prev = std::move(cur);
  }
  return out;
}

double concentration_bound(double v, double a, double A) {
  if (!(v > 0.0) || !(a > 0.0)) return 1.0;
  const double e = -v / (A + 1.0) * (std::log(v / (a * (A + 1.0))) - 1.0);
  return std::min(1.0, std::exp(e));
}

ConcentrationProbe martingale_concentration_probe(const ModelSpec& model, const ReplicaPlan& plan,
                                                  const std::vector<std::pair<double, double>>& points, int horizon,
                                                  double A_bound) {
  validate(model);
  if (points.empty()) throw ValidationError("concentration probe needs at least one (v, a) point");
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  const EnvScalars scalars = env_scalars(model.env, model.beta, 0, model.dim);
  const double required = std::max(scalars.L - 1.0, 1.0);
  if (A_bound == 0.0) A_bound = required;
  if (A_bound < required)
    throw ValidationError("A_bound is smaller than the increment bound max(L - 1, 1) of M");

  // 0 = undecided, 1 = event, 2 = excluded
  auto outcomes = map_replicas(plan.replicas, plan.workers, [&](std::size_t i) {
    const DisorderField field(replica_seed(plan.master, i), model.env, model.dim);
    std::vector<std::uint8_t> state(points.size(), 0);
    std::size_t open = points.size();
    double M = 0.0, bracket = 0.0;
    run_steps(field, scalars, horizon, plan.max_front_sites, [&](const PolymerFront&, const StepInfo& info) {
      M += info.ratio - 1.0;
      bracket += scalars.chi * info.overlap_I;
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (state[p]) continue;
        const auto [v, a] = points[p];
        if (bracket > a) {
          state[p] = 2;
          --open;
        } else if (M >= v) {
          state[p] = 1;
          --open;
        }
      }
      return open > 0;
    });
    return state;
  });

  ConcentrationProbe probe;
  probe.A_bound = A_bound;
  probe.horizon = horizon;
  for (std::size_t p = 0; p < points.size(); ++p) {
    ConcentrationPoint cp;
    cp.v = points[p].first;
    cp.a = points[p].second;
    cp.bound = concentration_bound(cp.v, cp.a, A_bound);
    cp.trials = outcomes.size();
    for (const auto& st : outcomes) {
      if (st[p] == 1) ++cp.events;
      if (st[p] == 0) ++cp.unresolved;
    }
    cp.frequency = static_cast<double>(cp.events) / static_cast<double>(cp.trials);
    std::tie(cp.ci_low, cp.ci_high) = wilson_interval(cp.events, cp.trials, 1.959963984540054);
    cp.pass = cp.ci_low <= cp.bound;
    probe.points.push_back(cp);
  }
  return probe;
}

}  // namespace dpolymer
