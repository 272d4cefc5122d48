#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "dpolymer/commands.hpp"

namespace {

using dpolymer::Json;
using dpolymer::ValidationError;

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON (") + e.what() + ")");
  }
}

// "key=value"; the value is read as JSON when it parses, as a string otherwise.
void apply_set(Json& params, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("--set: expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  params[key] = value.is_discarded() ? Json(text) : value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed polymer transfer-matrix toolkit"};
  app.set_version_flag("--version", std::string(dpolymer::kToolVersion));

  std::string command, config_path, out_path, seed, n0, env_json;
  std::optional<int> d, horizon, workers;
  std::optional<double> beta;
  std::optional<std::uint64_t> replicas;
  std::vector<std::string> sets;
  bool csv = false;

  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(dpolymer::command_names()));
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_path, "JSON Lines output path (default: console)");
  app.add_flag("--csv", csv, "Also export records as CSV");
  app.add_option("--workers", workers, "Worker threads (does not change results)");
  app.add_option("--d", d, "Lattice dimension");
  app.add_option("--beta", beta, "Inverse temperature");
  app.add_option("--seed", seed, "Master seed, up to 32 hex digits");
  app.add_option("--horizon", horizon, "Horizon N");
  app.add_option("--replicas", replicas, "Replica count R");
  app.add_option("--n0", n0, "Green truncation n0, or \"auto\"");
  app.add_option("--env", env_json, R"(Environment as JSON, e.g. {"kind":"binary","params":{"p":0.5}})");
  app.add_option("--set", sets, "Command parameter key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dpolymer::kExitInvalid;
  }

  try {
    Json j = load_config(config_path);
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    if (d) j["d"] = *d;
    if (beta) j["beta"] = *beta;
    if (!seed.empty()) j["seed"] = seed;
    if (horizon) j["horizon"] = *horizon;
    if (replicas) j["replicas"] = *replicas;
    if (!n0.empty()) {
      if (n0 == "auto") {
        j["n0"] = "auto";
      } else {
        try {
          j["n0"] = std::stoi(n0);
        } catch (const std::exception&) {
          throw ValidationError("n0: expected \"auto\" or a positive integer");
        }
      }
    }
    if (!env_json.empty()) {
      Json env = Json::parse(env_json, nullptr, false);
      if (env.is_discarded()) throw ValidationError("env: malformed JSON on the command line");
      j["env"] = env;
    }
    if (!sets.empty()) {
      if (!j.contains("params")) j["params"] = Json::object();
      for (const auto& s : sets) apply_set(j["params"], s);
    }
    const dpolymer::RunConfig config = dpolymer::config_from_json(j);
    dpolymer::OutputOptions options;
    options.path = dpolymer::resolve_output_path(out_path, command);
    options.csv = csv;
    options.workers = workers ? *workers : dpolymer::workers_from_environment(1);
    if (options.workers < 1) throw ValidationError("workers: must be >= 1");
    return dpolymer::execute(command, config, options, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dpolymer::exit_code_for(e);
  }
}
