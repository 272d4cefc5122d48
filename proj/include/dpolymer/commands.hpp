#pragma once

#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpolymer/config.hpp"

namespace dpolymer {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalid = 2,
  kExitInconclusive = 3,
};

struct OutputOptions {
  // JSON Lines destination; empty streams to the console.
  std::string path;
  bool csv = false;
  int workers = 1;
};

// Serializes records in the order they are added. Every record and the
// summary are stamped with {config_hash, seed, tool_version}.
//
// With a path, records go to <path>, the summary to <path>.summary.json and
// (with csv) a flattened copy to <path>.csv. Without one, records and then the
// summary are written to the console, as CSV when csv is set.
class RecordWriter {
 public:
  RecordWriter(const RunConfig& config, OutputOptions options, std::ostream& console);
  ~RecordWriter();
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;

  void add(Json record);
  void finish(Json summary);

 private:
  Json stamped(Json record) const;
  void write_csv(std::ostream& os) const;

  std::string config_hash_;
  std::string seed_;
  OutputOptions options_;
  std::ostream* console_;
  std::ofstream file_;
  std::vector<Json> kept_;  // retained only for CSV export
  bool finished_ = false;
};

const std::vector<std::string>& command_names();

// Runs one command. Validation, budget, domain and capability errors
// propagate as exceptions; exit_code_for maps them.
int execute(const std::string& command, const RunConfig& config, const OutputOptions& options,
            std::ostream& console);

int exit_code_for(const std::exception& error);

// Resolves the output path against DPOLYMER_OUT_DIR (only for relative paths
// or, when no path was given, to <dir>/<command>.jsonl).
std::string resolve_output_path(const std::string& path, const std::string& command);

// Worker count from DPOLYMER_WORKERS, or fallback when unset.
int workers_from_environment(int fallback);

}  // namespace dpolymer
