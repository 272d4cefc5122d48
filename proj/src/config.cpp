#include "dpolymer/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <set>

namespace dpolymer {

namespace {

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field + ": expected a number");
  return j.get<double>();
}

std::int64_t integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ValidationError(field + ": expected an integer");
  return j.get<std::int64_t>();
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ValidationError(where + key + ": unknown field");
}

}  // namespace

Json env_to_json(const EnvSpec& env) {
  Json params;
  if (const auto* e = std::get_if<BinaryEnv>(&env))
    params = {{"a", e->a}, {"b", e->b}, {"p", e->p}};
  else if (const auto* e = std::get_if<UniformEnv>(&env))
    params = {{"a", e->a}, {"b", e->b}};
  else {
    const auto& x = std::get<ShiftedExpEnv>(env);
    params = {{"A", x.top}, {"rate", x.rate}};
  }
  return {{"kind", env_kind(env)}, {"params", params}};
}

EnvSpec env_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("env: expected an object");
  reject_unknown(j, {"kind", "params"}, "env.");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ValidationError("env.kind: missing or not a string");
  const std::string kind = j["kind"].get<std::string>();
  const Json p = j.value("params", Json::object());
  if (!p.is_object()) throw ValidationError("env.params: expected an object");
  auto get = [&](const char* key, double fallback) {
    return p.contains(key) ? number(p[key], std::string("env.params.") + key) : fallback;
  };
  EnvSpec env;
  if (kind == "binary") {
    reject_unknown(p, {"a", "b", "p"}, "env.params.");
    env = BinaryEnv{get("a", -1.0), get("b", 1.0), get("p", 0.5)};
  } else if (kind == "uniform") {
    reject_unknown(p, {"a", "b"}, "env.params.");
    env = UniformEnv{get("a", -1.0), get("b", 0.0)};
  } else if (kind == "shifted-negative-exponential") {
    reject_unknown(p, {"A", "rate"}, "env.params.");
    env = ShiftedExpEnv{get("A", 0.0), get("rate", 1.0)};
  } else {
    throw ValidationError("env.kind: unknown kind '" + kind + "'");
  }
  validate(env);
  return env;
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  reject_unknown(j, {"d", "beta", "env", "seed", "horizon", "replicas", "n0", "budgets", "params"}, "");
  RunConfig c;
  if (j.contains("d")) c.d = static_cast<int>(integer(j["d"], "d"));
  check_dimension(c.d);
  if (j.contains("beta")) c.beta = number(j["beta"], "beta");
  if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) throw ValidationError("beta: must be finite and >= 0");
  if (j.contains("env")) c.env = env_from_json(j["env"]);
  if (j.contains("seed")) {
    if (!j["seed"].is_string()) throw ValidationError("seed: expected a hex string");
    try {
      c.seed = parse_seed(j["seed"].get<std::string>());
    } catch (const std::exception& e) {
      throw ValidationError(std::string("seed: ") + e.what());
    }
  }
  if (j.contains("horizon")) {
    c.horizon = static_cast<int>(integer(j["horizon"], "horizon"));
    if (c.horizon < 0) throw ValidationError("horizon: must be >= 0");
  }
  if (j.contains("replicas")) {
    const auto r = integer(j["replicas"], "replicas");
    if (r < 1) throw ValidationError("replicas: must be >= 1");
    c.replicas = static_cast<std::uint64_t>(r);
  }
  if (j.contains("n0")) {
    const Json& n0 = j["n0"];
    if (n0.is_string()) {
      if (n0.get<std::string>() != "auto") throw ValidationError("n0: expected \"auto\" or a positive integer");
    } else {
      const auto v = integer(n0, "n0");
      if (v < 1) throw ValidationError("n0: must be >= 1");
      c.n0 = static_cast<int>(v);
    }
  }
  if (j.contains("budgets")) {
    const Json& b = j["budgets"];
    if (!b.is_object()) throw ValidationError("budgets: expected an object");
    reject_unknown(b, {"max_front_sites", "max_env_configs", "max_paths", "max_scan_cost", "max_convolution_steps"},
                   "budgets.");
    auto positive = [&](const char* key) {
      const auto v = integer(b[key], std::string("budgets.") + key);
      if (v < 1) throw ValidationError(std::string("budgets.") + key + ": must be >= 1");
      return v;
    };
    if (b.contains("max_front_sites")) c.budgets.max_front_sites = static_cast<std::uint64_t>(positive("max_front_sites"));
    if (b.contains("max_env_configs")) c.budgets.max_env_configs = static_cast<std::uint64_t>(positive("max_env_configs"));
    if (b.contains("max_paths")) c.budgets.max_paths = static_cast<std::uint64_t>(positive("max_paths"));
    if (b.contains("max_scan_cost")) c.budgets.max_scan_cost = number(b["max_scan_cost"], "budgets.max_scan_cost");
    if (b.contains("max_convolution_steps"))
      c.budgets.max_convolution_steps = static_cast<int>(positive("max_convolution_steps"));
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ValidationError("params: expected an object");
    c.params = j["params"];
  }
  return c;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["d"] = c.d;
  j["beta"] = c.beta;
  j["env"] = env_to_json(c.env);
  j["seed"] = format_seed(c.seed);
  j["horizon"] = c.horizon;
  j["replicas"] = c.replicas;
  j["n0"] = c.n0 ? Json(*c.n0) : Json("auto");
  j["budgets"] = {{"max_front_sites", c.budgets.max_front_sites},
                  {"max_env_configs", c.budgets.max_env_configs},
                  {"max_paths", c.budgets.max_paths},
                  {"max_scan_cost", c.budgets.max_scan_cost},
                  {"max_convolution_steps", c.budgets.max_convolution_steps}};
  j["params"] = c.params;
  return j;
}

Json front_to_json(const PolymerFront& front) {
  Json entries = Json::array();
  front.for_each([&](const Site& x, double w) {
    Json e = coordinates(x, front.dim());
    e.push_back(w);
    entries.push_back(std::move(e));
  });
  return {{"n", front.time()}, {"dim", front.dim()}, {"logscale", front.log_scale()}, {"entries", entries}};
}

PolymerFront front_from_json(const Json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    check_dimension(dim);
    std::vector<std::pair<Site, double>> entries;
    for (const Json& e : j.at("entries")) {
      if (!e.is_array() || e.size() != static_cast<std::size_t>(dim) + 1)
        throw ValidationError("front.entries: expected [coordinates..., weight]");
      std::vector<int> coords;
      for (int i = 0; i < dim; ++i) coords.push_back(e[static_cast<std::size_t>(i)].get<int>());
      entries.emplace_back(site_from(coords), e.back().get<double>());
    }
    return PolymerFront::from_entries(dim, j.at("n").get<int>(), j.at("logscale").get<double>(), entries);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("front: ") + e.what());
  }
}

std::string canonical_dump(const RunConfig& config) { return to_json(config).dump(); }

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_dump(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace dpolymer
