#include "dpolymer/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpolymer/parallel.hpp"
#include "dpolymer/size_bias.hpp"
#include "dpolymer/transfer_engine.hpp"

namespace dpolymer {

namespace {

void check_grid(std::vector<int>& grid) {
  if (grid.empty()) throw ValidationError("grid: must not be empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() < 1) throw ValidationError("grid: entries must be >= 1");
}

void check_replicas(const ReplicaPlan& plan, std::size_t minimum) {
  if (plan.replicas < minimum)
    throw ValidationError("replicas: need at least " + std::to_string(minimum));
}

EstimateWithCI tagged(EstimateWithCI e, const ReplicaPlan& plan) {
  e.config_hash = plan.config_hash;
  return e;
}

}  // namespace

FreeEnergyEstimate estimate_free_energy(const ModelSpec& model, const ReplicaPlan& plan, std::vector<int> grid) {
  validate(model);
  check_grid(grid);
  check_replicas(plan, 2);
  const int horizon = grid.back();
  const EnvScalars scalars = env_scalars(model.env, model.beta, 0, model.dim);
  auto samples = map_replicas(plan.replicas, plan.workers, [&](std::size_t i) {
    const DisorderField field(replica_seed(plan.master, i), model.env, model.dim);
    std::vector<double> logW;
    logW.reserve(grid.size());
    std::size_t next = 0;
    run_steps(field, scalars, horizon, plan.max_front_sites, [&](const PolymerFront& f, const StepInfo&) {
      if (f.time() == grid[next]) {
        logW.push_back(f.log_W());
        ++next;
      }
      return next < grid.size();
    });
    return logW;
  });
  FreeEnergyEstimate out;
  out.grid = grid;
  double running = -std::numeric_limits<double>::infinity();
  std::vector<double> column(plan.replicas), wcol(plan.replicas);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < plan.replicas; ++i) {
      column[i] = samples[i][g] / grid[g];
      wcol[i] = std::exp(samples[i][g]);
    }
    out.per_n.push_back(tagged(summarize("free_energy_n" + std::to_string(grid[g]), column, plan.z), plan));
    out.mean_W.push_back(tagged(summarize("mean_W_n" + std::to_string(grid[g]), wcol, plan.z), plan));
    running = std::max(running, out.per_n.back().mean);
    out.envelope.push_back(running);
  }
  return out;
}

std::string to_string(CertificateMode mode) {
  return mode == CertificateMode::kWhole ? "whole" : "sum-over-endpoints";
}

double certificate_threshold(CertificateMode mode, int n, int dim) {
  if (mode == CertificateMode::kSumOverEndpoints) return 1.0;
  return 1.0 / (std::sqrt(2.0) * std::pow(2.0 * n + 1.0, dim));
}

std::vector<VSDCertificate> fractional_moment_certificates(const ModelSpec& model, const ReplicaPlan& plan,
                                                           const std::vector<int>& grid_in,
                                                           const CertificateOptions& options, bool stop_at_first) {
  validate(model);
  std::vector<int> grid = grid_in;
  check_grid(grid);
  check_replicas(plan, 2);
  const EnvScalars scalars = env_scalars(model.env, model.beta, 0, model.dim);
  const bool sum_mode = options.mode == CertificateMode::kSumOverEndpoints;
  auto samples = map_replicas(plan.replicas, plan.workers, [&](std::size_t i) {
    const DisorderField field(replica_seed(plan.master, i), model.env, model.dim);
    std::vector<double> values;
    std::size_t next = 0;
    run_steps(field, scalars, grid.back(), plan.max_front_sites, [&](const PolymerFront& f, const StepInfo&) {
      if (f.time() == grid[next]) {
        double v;
        if (sum_mode) {
          double s = 0.0;
          for (double w : f.weights()) s += std::sqrt(w);
          v = std::exp(0.5 * f.log_scale()) * s;
        } else {
          v = std::exp(0.5 * f.log_W());
        }
        values.push_back(v);
        ++next;
      }
      return next < grid.size();
    });
    return values;
  });

  std::vector<VSDCertificate> out;
  std::vector<double> column(plan.replicas);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const int n = grid[g];
    for (std::size_t i = 0; i < plan.replicas; ++i) column[i] = samples[i][g];
    VSDCertificate c;
    c.n = n;
    c.mode = options.mode;
    c.estimate = tagged(summarize(sum_mode ? "rho_n" : "mean_sqrt_W", column, plan.z), plan);
    c.hoeffding = options.hoeffding;
    if (options.hoeffding) {
      // Each sample lies in [0, sqrt(#sites * L^n)] (sum mode) or [0, L^{n/2}].
      const double half_log_Ln = 0.5 * n * std::log(scalars.L);
      const double sites = static_cast<double>(DiamondLayout::predicted_size(model.dim, n));
      const double hi = std::exp(half_log_Ln + (sum_mode ? 0.5 * std::log(sites) : 0.0));
      c.ucb = hoeffding_upper(c.estimate.mean, c.estimate.n_samples, 0.0, hi, options.hoeffding_delta);
    } else {
      c.ucb = c.estimate.upper();
    }
    c.threshold = certificate_threshold(options.mode, n, model.dim);
    c.certified = c.ucb < c.threshold;
    const double factor = sum_mode ? 1.0 : std::pow(2.0 * n + 1.0, model.dim);
    c.implied_free_energy_bound = 2.0 / n * std::log(factor * c.ucb);
    c.note = "statistical certificate: the upper confidence bound replaces the exact expectation";
    out.push_back(c);
    if (stop_at_first && c.certified) break;
  }
  return out;
}

VSDCertificate fractional_moment_certificate(const ModelSpec& model, const ReplicaPlan& plan, int n,
                                             const CertificateOptions& options) {
  return fractional_moment_certificates(model, plan, {n}, options).front();
}

namespace {

struct TailReplica {
  std::vector<int> hit;  // first step at which the running max reached u, -1 if never
  bool retired = false;
  bool truncated = false;
};

TailReplica tail_replica(const DisorderField& field, const EnvScalars& scalars, TailQuantity quantity,
                         const std::vector<double>& log_u, double log_cutoff, int horizon, std::size_t max_sites) {
  TailReplica r;
  r.hit.assign(log_u.size(), -1);
  std::size_t open = 0;
  for (std::size_t k = 0; k < log_u.size(); ++k) {
    if (log_u[k] <= 0.0)
      r.hit[k] = 0;  // W_0 = What_0(0) = 1
    else
      ++open;
  }
  if (open == 0) return r;
  r.truncated = true;
  run_steps(field, scalars, horizon, max_sites, [&](const PolymerFront& f, const StepInfo&) {
    double level;
    if (quantity == TailQuantity::kMaxW) {
      level = f.log_W();
    } else {
      const double wmax = *std::max_element(f.weights().begin(), f.weights().end());
      level = f.log_scale() + std::log(wmax);
    }
    for (std::size_t k = 0; k < log_u.size(); ++k)
      if (r.hit[k] < 0 && level >= log_u[k]) {
        r.hit[k] = f.time();
        --open;
      }
    if (open == 0) {
      r.truncated = false;
      return false;
    }
    if (f.log_W() < log_cutoff) {
      r.truncated = false;
      r.retired = true;
      return false;
    }
    return true;
  });
  return r;
}

}  // namespace

TailCurve tail_scan(const ModelSpec& model, const ReplicaPlan& plan, TailQuantity quantity,
                    const std::vector<double>& u_grid, const TailOptions& options) {
  validate(model);
  check_replicas(plan, 2);
  if (u_grid.empty()) throw ValidationError("u_grid: must not be empty");
  if (options.initial_horizon < 2 || options.max_horizon < options.initial_horizon)
    throw ValidationError("tail horizons: need 2 <= initial_horizon <= max_horizon");
  std::vector<double> us = u_grid;
  std::sort(us.begin(), us.end());
  if (us.front() <= 0.0) throw ValidationError("u_grid: entries must be > 0");
  std::vector<double> log_u(us.size());
  for (std::size_t k = 0; k < us.size(); ++k) log_u[k] = std::log(us[k]);
  const double log_cutoff = std::log(options.cutoff) + std::log(std::max(1.0, us.front()));
  const EnvScalars scalars = env_scalars(model.env, model.beta, 0, model.dim);

  TailCurve curve;
  curve.quantity = quantity;
  curve.L = scalars.L;
  int horizon = options.initial_horizon;
  std::vector<TailReplica> reps = map_replicas(plan.replicas, plan.workers, [&](std::size_t i) {
    const DisorderField field(replica_seed(plan.master, i), model.env, model.dim);
    return tail_replica(field, scalars, quantity, log_u, log_cutoff, horizon, plan.max_front_sites);
  });

  auto count_by = [&](int h) {
    std::vector<std::size_t> c(us.size(), 0);
    for (const auto& r : reps)
      for (std::size_t k = 0; k < us.size(); ++k)
        if (r.hit[k] >= 0 && r.hit[k] <= h) ++c[k];
    return c;
  };
  while (true) {
    const auto full = count_by(horizon), half = count_by(horizon / 2);
    bool stable = true;
    for (std::size_t k = 0; k < us.size(); ++k)
      if (static_cast<double>(full[k] - half[k]) > options.plateau_tolerance * std::max<double>(1.0, full[k]))
        stable = false;
    if (stable) {
      curve.plateau_reached = true;
      break;
    }
    if (horizon * 2 > options.max_horizon) break;
    horizon *= 2;
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < reps.size(); ++i)
      if (reps[i].truncated) alive.push_back(i);
    auto redo = map_replicas(alive.size(), plan.workers, [&](std::size_t j) {
      const DisorderField field(replica_seed(plan.master, alive[j]), model.env, model.dim);
      return tail_replica(field, scalars, quantity, log_u, log_cutoff, horizon, plan.max_front_sites);
    });
    for (std::size_t j = 0; j < alive.size(); ++j) reps[alive[j]] = std::move(redo[j]);
  }
  curve.horizon = horizon;
  if (!curve.plateau_reached)
    curve.warnings.push_back("plateau not reached: hit counts still changed by more than " +
                             std::to_string(options.plateau_tolerance) + " at horizon " + std::to_string(horizon));
  for (const auto& r : reps) {
    curve.retired += r.retired;
    curve.truncated += r.truncated;
  }

  std::vector<double> indicator(reps.size());
  for (std::size_t k = 0; k < us.size(); ++k) {
    TailPoint p;
    p.u = us[k];
    for (std::size_t i = 0; i < reps.size(); ++i) {
      indicator[i] = reps[i].hit[k] >= 0 ? 1.0 : 0.0;
      p.hits += reps[i].hit[k] >= 0;
    }
    p.survival = tagged(summarize(quantity == TailQuantity::kMaxW ? "P(max W >= u)" : "P(max p2p >= u)", indicator,
                                  plan.z),
                        plan);
    p.band_high = std::min(1.0, 1.0 / us[k]);
    p.band_low = quantity == TailQuantity::kMaxW ? std::min(1.0, 1.0 / (scalars.L * us[k])) : 0.0;
    curve.points.push_back(p);
  }

  // Weighted least squares of log S on log u; var(log S) ~ (1 - S) / (S R).
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double R = static_cast<double>(reps.size());
  for (const auto& p : curve.points) {
    const double S = p.survival.mean;
    if (S <= 0.0 || S >= 1.0) continue;
    const double w = S * R / (1.0 - S);
    const double x = std::log(p.u), y = std::log(S);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double det = sw * sxx - sx * sx;
  if (sw > 0.0 && det > 0.0) {
    curve.slope = (sw * sxy - sx * sy) / det;
    curve.slope_std_error = std::sqrt(sw / det);
    curve.slope_consistent_with_minus_one = std::abs(curve.slope + 1.0) <= plan.z * curve.slope_std_error;
  } else {
    curve.warnings.push_back("slope undefined: fewer than two grid points with survival in (0, 1)");
  }
  if (model.dim >= 3)
    curve.warnings.push_back("the [1/(Lu), 1/u] band presumes strong disorder; this scan cannot decide the phase");
  return curve;
}

BabacProbe babac_bound_probe(const ModelSpec& model, const ReplicaPlan& plan, int n, const FieldPredicate& event) {
  validate(model);
  check_replicas(plan, 2);
  if (n < 1) throw ValidationError("n must be >= 1");
  const EnvScalars scalars = env_scalars(model.env, model.beta, 0, model.dim);
  struct Sample {
    double sqrt_W;
    double in_A;
    double tilted_miss;
  };
  auto samples = map_replicas(plan.replicas, plan.workers, [&](std::size_t i) {
    const DisorderField base(replica_seed(plan.master, i), model.env, model.dim);
    double logW = 0.0;
    run_steps(base, scalars, n, plan.max_front_sites, [&](const PolymerFront& f, const StepInfo&) {
      logW = f.log_W();
      return true;
    });
    const SpineSample spine = spine_sample(replica_seed(plan.master, plan.replicas + i), model, n);
    return Sample{std::exp(0.5 * logW), event(base) ? 1.0 : 0.0, event(spine.tilted) ? 0.0 : 1.0};
  });
  std::vector<double> a(samples.size()), b(samples.size()), c(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    a[i] = samples[i].sqrt_W;
    b[i] = samples[i].in_A;
    c[i] = samples[i].tilted_miss;
  }
  BabacProbe p;
  p.sqrt_W = tagged(summarize("mean_sqrt_W", a, plan.z), plan);
  p.p_event = tagged(summarize("P(A)", b, plan.z), plan);
  p.p_tilted_miss = tagged(summarize("P_tilde(A^c)", c, plan.z), plan);
  p.rhs = std::sqrt(p.p_event.mean) + std::sqrt(p.p_tilted_miss.mean);
  // Delta method, with the proportion floored at 1/R where the root is flat.
  const double floor_p = 1.0 / static_cast<double>(plan.replicas);
  auto root_se = [&](const EstimateWithCI& e) { return e.std_error / (2.0 * std::sqrt(std::max(e.mean, floor_p))); };
  p.rhs_std_error = root_se(p.p_event) + root_se(p.p_tilted_miss);
  const double sigma = std::hypot(p.sqrt_W.std_error, p.rhs_std_error);
  p.pass = p.sqrt_W.mean <= p.rhs + 4.0 * sigma;
  return p;
}

TailIndex hill_estimate(std::vector<double> log_values, double log_base, std::size_t k) {
  TailIndex t;
  t.caveat = "exploratory Hill estimate; finite-s samples need not be in the asymptotic tail regime";
  if (log_values.size() < 3) throw ValidationError("hill_estimate: need at least 3 samples");
  const double to_natural = std::log(log_base);
  for (double& v : log_values) v *= to_natural;
  std::sort(log_values.begin(), log_values.end(), std::greater<>());
  if (log_values.front() - log_values.back() <= 1e-12 * std::max(1.0, std::abs(log_values.front()))) {
    t.degenerate = true;
    t.caveat = "degenerate: all samples are equal, there is no tail";
    return t;
  }
  if (k == 0) k = static_cast<std::size_t>(std::sqrt(static_cast<double>(log_values.size())));
  k = std::clamp<std::size_t>(k, 1, log_values.size() - 1);
  t.k = k;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += log_values[i] - log_values[k];
  if (s <= 0.0) {
    t.degenerate = true;
    t.caveat = "degenerate: the top order statistics coincide";
    return t;
  }
  t.alpha = static_cast<double>(k) / s;
  t.std_error = t.alpha / std::sqrt(static_cast<double>(k));
  return t;
}

TailIndex tail_index_diagnostic(const ModelSpec& model, const ReplicaPlan& plan, int s) {
  validate(model);
  check_replicas(plan, 10'000);
  if (s < 1) throw ValidationError("s must be >= 1");
  const EnvScalars scalars = env_scalars(model.env, model.beta, 0, model.dim);
  auto logs = map_replicas(plan.replicas, plan.workers, [&](std::size_t i) {
    const DisorderField field(replica_seed(plan.master, i), model.env, model.dim);
    double logW = 0.0;
    run_steps(field, scalars, s, plan.max_front_sites, [&](const PolymerFront& f, const StepInfo&) {
      logW = f.log_W();
      return true;
    });
    return logW;
  });
  return hill_estimate(std::move(logs), std::exp(1.0));
}

}  // namespace dpolymer
