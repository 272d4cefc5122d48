#include "dpolymer/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "dpolymer/estimators.hpp"
#include "dpolymer/lattice_green.hpp"
#include "dpolymer/oracle.hpp"
#include "dpolymer/overlap.hpp"
#include "dpolymer/parallel.hpp"
#include "dpolymer/size_bias.hpp"
#include "dpolymer/transfer_engine.hpp"

namespace dpolymer {

namespace {

Json site_json(const Site& x, int dim) {
  if (dim == 1) return x[0];
  return coordinates(x, dim);
}

Json estimate_json(const EstimateWithCI& e) {
  return {{"name", e.name},           {"mean", e.mean},   {"std_error", e.std_error},
          {"ci_low", e.lower()},      {"ci_high", e.upper()}, {"n_samples", e.n_samples},
          {"z", e.z}};
}

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

ReplicaPlan plan_for(const RunConfig& config, const OutputOptions& options) {
  ReplicaPlan plan;
  plan.master = config.seed;
  plan.replicas = config.replicas;
  plan.workers = options.workers;
  plan.z = param(config, "z", kDefaultZ);
  plan.max_front_sites = config.budgets.max_front_sites;
  plan.config_hash = config_hash(config);
  return plan;
}

std::optional<GreenTable> green_table(const RunConfig& config) {
  const int n0 = config.n0 ? *config.n0 : minimal_n0(config.env, config.beta, config.d);
  return green_g0(config.d, n0, config.budgets.max_convolution_steps);
}

std::vector<int> default_grid(int horizon, int points) {
  std::vector<int> grid;
  for (int k = 1; k <= points; ++k) grid.push_back(std::max(1, static_cast<int>(std::lround(horizon * k / double(points)))));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// ---- green / beta2 --------------------------------------------------------

int cmd_green(const RunConfig& config, RecordWriter& out) {
  const GreenTable table = *green_table(config);
  for (const auto& [x, g] : table.values) out.add({{"x", site_json(x, config.d)}, {"g0", g}});
  Json summary = {{"d", config.d}, {"n0", table.n0}, {"g0_at_0", table.g0_at_0}, {"norm1", table.norm1},
                  {"norm4", table.norm4}, {"sites", table.values.size()}};
  if (config.d >= 3 && param(config, "full_green", false)) {
    const GreenSeries series = green_g_at_0(config.d, param(config, "tolerance", 1e-9));
    summary["g_at_0"] = series.value;
    summary["g_at_0_error"] = series.tail_error;
  }
  out.finish(summary);
  return kExitOk;
}

int cmd_beta2(const RunConfig& config, RecordWriter& out) {
  const Beta2Result r = beta2_solve(config.env, config.d, param(config, "tolerance", 1e-10));
  Json rec = {{"d", config.d},           {"env", env_to_json(config.env)}, {"infinite", r.infinite},
              {"g_at_0", r.g_at_0},      {"residual", r.residual},         {"iterations", r.iterations}};
  rec["beta2"] = r.infinite ? Json(nullptr) : Json(r.beta2);
  if (std::isinf(r.g_at_0)) rec["g_at_0"] = "infinity";
  out.add(rec);
  out.finish(rec);
  return kExitOk;
}

// ---- run ------------------------------------------------------------------

int cmd_run(const RunConfig& config, const OutputOptions& options, RecordWriter& out) {
  RunSpec spec;
  spec.dim = config.d;
  spec.beta = config.beta;
  spec.env = config.env;
  spec.horizon = config.effective_horizon();
  spec.checkpoints = param(config, "checkpoints", std::vector<int>{});
  spec.exact_doob = param(config, "exact_doob", false);
  if (param(config, "track_J", spec.exact_doob)) spec.green = green_table(config);
  spec.max_env_configs = config.budgets.max_env_configs;
  spec.max_front_sites = config.budgets.max_front_sites;
  const int stride = param(config, "stride", 1);
  if (stride < 1) throw ValidationError("params.stride: must be >= 1");

  const std::size_t R = config.replicas;
  const std::size_t chunk = std::max<std::size_t>(1, 4 * static_cast<std::size_t>(std::max(1, options.workers)));
  std::vector<double> final_logW;
  for (std::size_t start = 0; start < R; start += chunk) {
    const std::size_t count = std::min(chunk, R - start);
    auto results = map_replicas(count, options.workers, [&](std::size_t i) {
      RunSpec s = spec;
      s.seed = replica_seed(config.seed, start + i);
      return run(s);
    });
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t replica = start + i;
      const auto& trace = results[i].trace;
      for (const TraceRecord& r : trace.records) {
        if (r.n % stride != 0 && r.n != spec.horizon) continue;
        Json rec = {{"type", "step"},          {"replica", replica},     {"n", r.n},
                    {"logW", r.logW},          {"I", r.I},               {"M_inc", r.M_inc},
                    {"bracket", r.bracket},    {"argmax", site_json(r.argmax_site, config.d)},
                    {"max_endpoint_mass", r.max_endpoint_mass},          {"max_p2p_log", r.max_p2p_log}};
        if (spec.green) {
          rec["J"] = r.J;
          rec["A"] = r.A;
          rec["N"] = r.N;
        }
        out.add(rec);
      }
      for (const PolymerFront& f : results[i].checkpoints)
        out.add({{"type", "front"}, {"replica", replica}, {"front", front_to_json(f)}});
      final_logW.push_back(trace.records.empty() ? 0.0 : trace.records.back().logW);
    }
  }
  Json summary = {{"horizon", spec.horizon}, {"replicas", R}, {"final_logW", final_logW}};
  if (spec.green) summary["n0"] = spec.green->n0;
  out.finish(summary);
  return kExitOk;
}

// ---- free energy and certificates ----------------------------------------

int cmd_free_energy(const RunConfig& config, const OutputOptions& options, RecordWriter& out) {
  const auto grid = param(config, "grid", default_grid(config.effective_horizon(), 10));
  const FreeEnergyEstimate fe = estimate_free_energy(config.model(), plan_for(config, options), grid);
  for (std::size_t g = 0; g < fe.grid.size(); ++g)
    out.add({{"n", fe.grid[g]},
             {"free_energy", estimate_json(fe.per_n[g])},
             {"envelope", fe.envelope[g]},
             {"mean_W", estimate_json(fe.mean_W[g])}});
  const EstimateWithCI& last = fe.per_n.back();
  out.finish({{"n", fe.grid.back()},
              {"free_energy", estimate_json(last)},
              {"negative", last.upper() < 0.0},
              {"envelope", fe.envelope.back()}});
  return kExitOk;
}

CertificateMode parse_mode(const std::string& s) {
  if (s == "sum") return CertificateMode::kSumOverEndpoints;
  if (s == "whole") return CertificateMode::kWhole;
  throw ValidationError("params.mode: expected \"sum\" or \"whole\"");
}

int cmd_certify(const RunConfig& config, const OutputOptions& options, RecordWriter& out) {
  std::vector<int> fallback;
  for (int n = 10; n <= 200; n += 10) fallback.push_back(n);
  const auto grid = param(config, "grid", fallback);
  CertificateOptions copts;
  copts.mode = parse_mode(param<std::string>(config, "mode", "sum"));
  copts.hoeffding = param(config, "hoeffding", false);
  copts.hoeffding_delta = param(config, "hoeffding_delta", copts.hoeffding_delta);
  const auto certs = fractional_moment_certificates(config.model(), plan_for(config, options), grid, copts,
                                                    param(config, "stop_at_first", true));
  const VSDCertificate* first = nullptr;
  for (const auto& c : certs) {
    out.add({{"n", c.n},
             {"mode", to_string(c.mode)},
             {"estimate", estimate_json(c.estimate)},
             {"ucb", c.ucb},
             {"hoeffding", c.hoeffding},
             {"threshold", c.threshold},
             {"certified", c.certified},
             {"implied_free_energy_bound", c.implied_free_energy_bound},
             {"note", c.note}});
    if (c.certified && !first) first = &c;
  }
  Json summary = {{"verdict", first ? "certified" : "inconclusive"}, {"mode", to_string(copts.mode)}};
  if (first) {
    summary["n"] = first->n;
    summary["ucb"] = first->ucb;
    summary["threshold"] = first->threshold;
    summary["implied_free_energy_bound"] = first->implied_free_energy_bound;
  }
  out.finish(summary);
  return first ? kExitOk : kExitInconclusive;
}

// ---- tails ----------------------------------------------------------------

int cmd_tail(const RunConfig& config, const OutputOptions& options, RecordWriter& out, TailQuantity quantity) {
  TailOptions topts;
  topts.initial_horizon = param(config, "initial_horizon", topts.initial_horizon);
  topts.max_horizon = param(config, "max_horizon", topts.max_horizon);
  topts.cutoff = param(config, "cutoff", topts.cutoff);
  topts.plateau_tolerance = param(config, "plateau_tolerance", topts.plateau_tolerance);
  const auto u_grid = param(config, "u_grid", std::vector<double>{2.0, 4.0, 8.0, 16.0});
  const TailCurve curve = tail_scan(config.model(), plan_for(config, options), quantity, u_grid, topts);
  for (const auto& p : curve.points)
    out.add({{"u", p.u},
             {"hits", p.hits},
             {"survival", estimate_json(p.survival)},
             {"band_low", p.band_low},
             {"band_high", p.band_high}});
  out.finish({{"quantity", quantity == TailQuantity::kMaxW ? "max_W" : "max_p2p"},
              {"L", curve.L},
              {"horizon", curve.horizon},
              {"plateau_reached", curve.plateau_reached},
              {"retired", curve.retired},
              {"truncated", curve.truncated},
              {"slope", curve.slope},
              {"slope_std_error", curve.slope_std_error},
              {"slope_consistent_with_minus_one", curve.slope_consistent_with_minus_one},
              {"warnings", curve.warnings}});
  return kExitOk;
}

// ---- spine and windows ----------------------------------------------------

int cmd_spine(const RunConfig& config, const OutputOptions& options, RecordWriter& out) {
  const int s = param(config, "s", std::min(config.effective_horizon(), 100));
  const ModelSpec model = config.model();
  const SpineSample sample = spine_sample(config.seed, model, s);
  for (int k = 1; k <= s; ++k) {
    const Site& x = sample.path[static_cast<std::size_t>(k)];
    out.add({{"k", k},
             {"x", site_json(x, config.d)},
             {"omega_base", sample.base.value(k, x)},
             {"omega_tilted", sample.tilted.value(k, x)}});
  }
  const EnvScalars scalars = env_scalars(config.env, config.beta, 0, config.d);
  double logW = 0.0;
  run_steps(sample.tilted, scalars, s, config.budgets.max_front_sites, [&](const PolymerFront& f, const StepInfo&) {
    logW = f.log_W();
    return true;
  });
  Json summary = {{"s", s}, {"log_W_tilted", logW}};
  if (param(config, "replica_check", false)) {
    const auto logs = sb_partition_samples(model, plan_for(config, options), s);
    std::vector<double> inv(logs.size());
    std::transform(logs.begin(), logs.end(), inv.begin(), [](double l) { return std::exp(-l); });
    summary["mean_inverse_W"] = estimate_json(summarize("mean_inverse_W_tilted", inv, plan_for(config, options).z));
  }
  out.finish(summary);
  return kExitOk;
}

int cmd_scan_windows(const RunConfig& config, const OutputOptions& options, RecordWriter& out) {
  const int n = param(config, "n", config.effective_horizon());
  const int s = param(config, "s", std::max(1, n / 10));
  const double threshold = param(config, "threshold", default_window_threshold(n, config.d));
  const bool aligned = param(config, "spine_aligned", false);
  WindowScanResult result;
  if (aligned) {
    const SpineSample sample = spine_sample(config.seed, config.model(), n);
    result = spine_aligned_scan(sample.tilted, sample.path, config.beta, n, s, threshold);
  } else {
    const DisorderField field(config.seed, config.env, config.d);
    result = window_scan(field, config.beta, n, s, threshold, config.budgets.max_scan_cost, options.workers);
  }
  for (const auto& h : result.hits) out.add({{"m", h.m}, {"y", site_json(h.y, config.d)}, {"logW_s", h.logW}, {"threshold", result.threshold}});
  out.finish({{"n", result.n},
              {"s", result.s},
              {"threshold", result.threshold},
              {"epsilon", param(config, "epsilon", default_window_epsilon(config.d))},
              {"spine_aligned", result.spine_aligned},
              {"scanned", result.scanned},
              {"hits", result.hits.size()},
              {"event", !result.hits.empty()},
              {"max_logW", result.max_logW}});
  return kExitOk;
}

// ---- oracle fixtures ------------------------------------------------------

std::string hp_string(const oracle::HighPrecision& v) { return v.str(45, std::ios_base::scientific); }

const char* kPrecisionNote = "cpp_bin_float_50 (about 1e-49 relative)";

int cmd_oracle(const RunConfig& config, RecordWriter& out) {
  using oracle::HighPrecision;
  const std::string instance = param<std::string>(config, "instance", "mean_sqrt_W");
  const int n = param(config, "n", 2);
  const oracle::EnumerationBudget budget{config.budgets.max_paths, config.budgets.max_env_configs};
  Json description = {{"kind", instance}, {"d", config.d}, {"beta", config.beta}, {"n", n},
                      {"env", env_to_json(config.env)}};
  HighPrecision value;
  if (instance == "enumerate_W") {
    const DisorderField field(config.seed, config.env, config.d);
    const auto sums = oracle::enumerate_W<HighPrecision>(field, config.env, HighPrecision(config.beta), n, budget);
    description["seed"] = format_seed(config.seed);
    for (const auto& [x, w] : sums.p2p)
      out.add({{"instance", {{"kind", "p2p"}, {"x", site_json(x, config.d)}}},
               {"value", hp_string(w)},
               {"precision", kPrecisionNote},
               {"oracle_version", oracle::kOracleVersion}});
    value = sums.W;
  } else if (instance == "mean_sqrt_W" || instance == "mean_W") {
    const auto* env = std::get_if<BinaryEnv>(&config.env);
    if (!env) throw CapabilityError("oracle " + instance + " requires a binary environment");
    const auto law = oracle::binary_law(*env, HighPrecision(config.beta));
    const oracle::LightCone cone(config.d, n);
    const bool root = instance == "mean_sqrt_W";
    value = oracle::expectation(cone, law, budget, [&](const oracle::ConeConfiguration& c) {
      HighPrecision W = 0;
      const auto hist = oracle::p2p_history(c, law, n);
      for (const auto& [x, w] : hist.back()) W += w;
      return root ? HighPrecision(sqrt(W)) : W;
    });
    description["environment_configurations"] = std::uint64_t{1} << cone.size();
  } else {
    throw ValidationError("params.instance: expected enumerate_W, mean_W or mean_sqrt_W");
  }
  const Json fixture = {{"instance", description},
                        {"value", hp_string(value)},
                        {"value_double", static_cast<double>(value)},
                        {"precision", kPrecisionNote},
                        {"oracle_version", oracle::kOracleVersion}};
  out.add(fixture);
  out.finish(fixture);
  return kExitOk;
}

// ---- verify ---------------------------------------------------------------

struct Check {
  std::string name;
  bool pass = true;
  Json detail = Json::object();
};

Check check_philox() {
  Check c{"philox_known_answers"};
  const auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
  const auto b = philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u});
  c.pass = a == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u} &&
           b == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu};
  return c;
}

Check check_engine_vs_oracle(const RunConfig& config) {
  Check c{"engine_matches_path_enumeration"};
  const std::vector<std::pair<int, int>> matrix{{1, 6}, {2, 4}, {3, 3}};
  double worst = 0.0;
  int instances = 0;
  const BinaryEnv env{};
  for (const auto& [d, n] : matrix)
    for (std::uint64_t i = 0; i < 3; ++i) {
      const double beta = 0.5 + 0.5 * static_cast<double>(i);
      const DisorderField field(replica_seed(config.seed, 1000 + i), env, d);
      const auto sums = oracle::enumerate_W<oracle::HighPrecision>(field, env, oracle::HighPrecision(beta), n);
      const EnvScalars scalars = env_scalars(env, beta, 0, d);
      run_steps(field, scalars, n, std::size_t(-1), [&](const PolymerFront& f, const StepInfo&) {
        if (f.time() < n) return true;
        worst = std::max(worst, std::abs(f.log_W() - static_cast<double>(log(sums.W))));
        for (const auto& [x, w] : sums.p2p)
          worst = std::max(worst, std::abs(f.log_p2p(x) - static_cast<double>(log(w))));
        return false;
      });
      ++instances;
    }
  c.pass = worst <= 1e-12;
  c.detail = {{"instances", instances}, {"max_abs_log_error", worst}};
  return c;
}

Check check_martingale_identities() {
  using oracle::HighPrecision;
  Check c{"martingale_and_conditional_variance"};
  const BinaryEnv env{};
  HighPrecision worst = 0;
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto law = oracle::binary_law(env, HighPrecision(beta));
    const oracle::LightCone cone(1, 3);
    const HighPrecision mean_W = oracle::expectation(cone, law, {}, [&](const oracle::ConeConfiguration& cfg) {
      HighPrecision W = 0;
      const auto hist = oracle::p2p_history(cfg, law, 3);
      for (const auto& [x, w] : hist.back()) W += w;
      return W;
    });
    worst = std::max(worst, HighPrecision(abs(mean_W - 1)));
    const oracle::LightCone past_cone(1, 2);
    const oracle::ConeConfiguration cfg(past_cone, -1.0, 1.0, 0b10110);
    const auto hist = oracle::p2p_history(cfg, law, 2);
    HighPrecision W = 0;
    for (const auto& [x, w] : hist.back()) W += w;
    BasicSiteMap<HighPrecision> mu;
    for (const auto& [x, w] : hist.back()) mu[x] = w / W;
    const auto slice = oracle::conditional_slice<HighPrecision>(mu, 1, law, nullptr);
    worst = std::max(worst, HighPrecision(abs(slice.mean_ratio - 1)));
    worst = std::max(worst, HighPrecision(abs(slice.mean_sq_dev - law.chi * slice.I)));
  }
  c.pass = worst <= HighPrecision("1e-30");
  c.detail = {{"max_abs_error", static_cast<double>(worst)}};
  return c;
}

Check check_green_identity() {
  Check c{"green_operator_identity"};
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d)
    for (int n0 = 1; n0 <= 3; ++n0) {
      const WalkKernel k(d);
      const GreenTable table = green_g0(d, n0);
      const SiteMap smoothed = convolve_power(table.values, k, 2);
      const SiteMap delta{{Site{}, 1.0}};
      const SiteMap near = convolve_power(delta, k, 2);
      const SiteMap far = convolve_power(delta, k, 2 * (n0 + 1));
      std::set<Site> support;
      for (const auto* m : {&table.values, &smoothed, &near, &far})
        for (const auto& [x, v] : *m) support.insert(x);
      auto at = [](const SiteMap& m, const Site& x) {
        auto it = m.find(x);
        return it == m.end() ? 0.0 : it->second;
      };
      for (const Site& x : support)
        worst = std::max(worst, std::abs(at(table.values, x) - at(smoothed, x) - at(near, x) + at(far, x)));
    }
  c.pass = worst <= 1e-12;
  c.detail = {{"max_abs_error", worst}};
  return c;
}

Check check_size_bias() {
  using oracle::HighPrecision;
  Check c{"spine_law_equals_size_biased_law"};
  const auto law = oracle::binary_law(BinaryEnv{}, HighPrecision(1));
  HighPrecision worst = 0;
  for (int s = 1; s <= 2; ++s) {
    const HighPrecision dev = oracle::spine_vs_size_biased_deviation<HighPrecision>(
        1, s, law, [](const std::vector<Site>& path, int k, const Site& x) {
          return path[static_cast<std::size_t>(k)] == x;
        });
    worst = std::max(worst, dev);
  }
  c.pass = worst <= HighPrecision("1e-30");
  c.detail = {{"total_deviation", static_cast<double>(worst)}};
  return c;
}

Check check_config_round_trip(const RunConfig& config) {
  Check c{"config_round_trip"};
  const RunConfig back = config_from_json(to_json(config));
  c.pass = canonical_dump(back) == canonical_dump(config) && config_hash(back) == config_hash(config);
  return c;
}

int cmd_verify(const RunConfig& config, RecordWriter& out) {
  const std::vector<Check> checks{check_philox(),         check_engine_vs_oracle(config), check_martingale_identities(),
                                  check_green_identity(), check_size_bias(),              check_config_round_trip(config)};
  std::size_t failed = 0;
  for (const Check& c : checks) {
    failed += c.pass ? 0 : 1;
    out.add({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  out.finish({{"checks", checks.size()}, {"failed", failed}, {"verdict", failed == 0 ? "pass" : "fail"}});
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

// ---- writer ---------------------------------------------------------------

RecordWriter::RecordWriter(const RunConfig& config, OutputOptions options, std::ostream& console)
    : config_hash_(config_hash(config)), seed_(format_seed(config.seed)), options_(std::move(options)),
      console_(&console) {
  if (!options_.path.empty()) {
    const auto parent = std::filesystem::path(options_.path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    file_.open(options_.path, std::ios::out | std::ios::trunc);
    if (!file_) throw ValidationError("out: cannot open '" + options_.path + "' for writing");
  }
}

RecordWriter::~RecordWriter() = default;

Json RecordWriter::stamped(Json record) const {
  record["config_hash"] = config_hash_;
  record["seed"] = seed_;
  record["tool_version"] = kToolVersion;
  return record;
}

void RecordWriter::add(Json record) {
  Json r = stamped(std::move(record));
  if (options_.csv) kept_.push_back(r);
  if (file_.is_open())
    file_ << r.dump() << '\n';
  else if (!options_.csv)
    *console_ << r.dump() << '\n';
}

void RecordWriter::write_csv(std::ostream& os) const {
  std::set<std::string> columns;
  for (const Json& r : kept_)
    for (const auto& [k, v] : r.items()) columns.insert(k);
  bool first = true;
  for (const auto& col : columns) {
    os << (first ? "" : ",") << col;
    first = false;
  }
  os << '\n';
  for (const Json& r : kept_) {
    first = true;
    for (const auto& col : columns) {
      os << (first ? "" : ",") << (r.contains(col) ? csv_cell(r[col]) : "");
      first = false;
    }
    os << '\n';
  }
}

void RecordWriter::finish(Json summary) {
  if (finished_) return;
  finished_ = true;
  Json s = stamped(std::move(summary));
  s["type"] = "summary";
  if (file_.is_open()) {
    file_.close();
    std::ofstream sum(options_.path + ".summary.json", std::ios::out | std::ios::trunc);
    sum << s.dump(2) << '\n';
    if (options_.csv) {
      std::ofstream csv(options_.path + ".csv", std::ios::out | std::ios::trunc);
      write_csv(csv);
    }
  } else if (options_.csv) {
    write_csv(*console_);
    *console_ << s.dump() << '\n';
  } else {
    *console_ << s.dump() << '\n';
  }
}

// ---- dispatch -------------------------------------------------------------

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"green",     "beta2",     "run",   "free-energy",
                                              "certify-vsd", "tail-maxw", "tail-p2p", "spine",
                                              "scan-windows", "oracle",  "verify"};
  return names;
}

int execute(const std::string& command, const RunConfig& config, const OutputOptions& options, std::ostream& console) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw ValidationError("command: unknown command '" + command + "'");
  RecordWriter out(config, options, console);
  if (command == "green") return cmd_green(config, out);
  if (command == "beta2") return cmd_beta2(config, out);
  if (command == "run") return cmd_run(config, options, out);
  if (command == "free-energy") return cmd_free_energy(config, options, out);
  if (command == "certify-vsd") return cmd_certify(config, options, out);
  if (command == "tail-maxw") return cmd_tail(config, options, out, TailQuantity::kMaxW);
  if (command == "tail-p2p") return cmd_tail(config, options, out, TailQuantity::kMaxP2P);
  if (command == "spine") return cmd_spine(config, options, out);
  if (command == "scan-windows") return cmd_scan_windows(config, options, out);
  if (command == "oracle") return cmd_oracle(config, out);
  return cmd_verify(config, out);
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ValidationError*>(&error) || dynamic_cast<const BudgetError*>(&error) ||
      dynamic_cast<const DomainError*>(&error) || dynamic_cast<const CapabilityError*>(&error) ||
      dynamic_cast<const nlohmann::json::exception*>(&error))
    return kExitInvalid;
  return kExitFailure;
}

std::string resolve_output_path(const std::string& path, const std::string& command) {
  const char* dir = std::getenv("DPOLYMER_OUT_DIR");
  if (!dir || !*dir) return path;
  if (path.empty()) return (std::filesystem::path(dir) / (command + ".jsonl")).string();
  if (std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(dir) / path).string();
}

int workers_from_environment(int fallback) {
  const char* text = std::getenv("DPOLYMER_WORKERS");
  if (!text || !*text) return fallback;
  char* end = nullptr;
  const long v = std::strtol(text, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) throw ValidationError("DPOLYMER_WORKERS: expected a positive integer");
  return static_cast<int>(v);
}

}  // namespace dpolymer
