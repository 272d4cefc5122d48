#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "dpolymer/environment.hpp"
#include "dpolymer/philox.hpp"
#include "dpolymer/transfer_engine.hpp"

namespace dpolymer {

using Json = nlohmann::json;

#ifndef DPOLYMER_VERSION
#define DPOLYMER_VERSION "0.0.0"
#endif
inline constexpr const char* kToolVersion = DPOLYMER_VERSION;

struct Budgets {
  std::uint64_t max_front_sites = 50'000'000;
  std::uint64_t max_env_configs = std::uint64_t{1} << 20;
  std::uint64_t max_paths = 1'000'000;
  double max_scan_cost = 1e9;
  int max_convolution_steps = 200'000;
};

// Everything that influences a result. Worker count and output location are
// deliberately absent: they cannot change any number.
struct RunConfig {
  int d = 1;
  double beta = 0.0;
  EnvSpec env = BinaryEnv{};
  Seed128 seed{};
  int horizon = 0;  // 0 selects the default for d (10^4 for d <= 2, 300 otherwise)
  std::uint64_t replicas = 100;
  std::optional<int> n0;  // nullopt: "auto"
  Budgets budgets;
  Json params = Json::object();

  int effective_horizon() const { return horizon > 0 ? horizon : (d <= 2 ? 10'000 : 300); }
  ModelSpec model() const { return ModelSpec{d, beta, env}; }
};

// Throws ValidationError naming the offending field.
RunConfig config_from_json(const Json& j);
Json to_json(const RunConfig& config);
Json env_to_json(const EnvSpec& env);
EnvSpec env_from_json(const Json& j);

// {n, dim, logscale, entries: [[site..., weight], ...]}; parsing back gives
// bit-identical weights.
Json front_to_json(const PolymerFront& front);
PolymerFront front_from_json(const Json& j);

// Keys sorted, shortest round-trip number formatting.
std::string canonical_dump(const RunConfig& config);
// FNV-1a (64 bit) of the canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// Typed access to command parameters with a default.
template <class T>
T param(const RunConfig& config, const std::string& key, const T& fallback) {
  if (!config.params.contains(key)) return fallback;
  try {
    return config.params.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("params." + key + ": wrong type");
  }
}

}  // namespace dpolymer
