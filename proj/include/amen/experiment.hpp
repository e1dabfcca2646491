// Copyright 2026 The amen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch experiment runner behind the command line tool: config validation,
// one experiment per config, CSV/JSON outputs and a content-addressed cache.

#ifndef AMEN_EXPERIMENT_HPP_
#define AMEN_EXPERIMENT_HPP_

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace amen {

inline constexpr const char* kToolVersion = "0.4.0";

// Schema violation; `path` is the dotted config path, e.g. "tiling.epsilon".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path(path) {}
  std::string path;
};

struct ExperimentConfig {
  std::string kind;       // tiling, ergodic, ids, process, covering
  std::string output;     // output directory
  bool cache = true;
  nlohmann::json resolved;            // every field, defaults filled in
  std::vector<std::string> defaulted;  // paths that took their default
};

// Validates against the schema in configs/README.md. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& raw);

struct RunOutcome {
  int exit_code = 0;                  // 0 all checks pass, 1 some check failed
  nlohmann::json manifest;
  std::vector<std::string> failures;  // names of failed checks
};

// Runs the experiment and writes results.csv, summary.json, manifest.json
// (plus any kind-specific files) under cfg.output.
RunOutcome run_experiment(const ExperimentConfig& cfg);

// Plot spec: {"x": col, "y": col or [cols], "series": optional col}. With a
// series column the y column is pivoted into one column per series value.
// Throws ConfigError naming a missing column.
void emit_plotdata(const std::string& csv_text, const nlohmann::json& spec, std::ostream& out);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);
std::string csv_quote(const std::string& field);
// Shortest text that reads back to the same double.
std::string format_number(double x);

std::string sha256_hex(const std::string& data);

}  // namespace amen

#endif  // AMEN_EXPERIMENT_HPP_
