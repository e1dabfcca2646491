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

// amen run <config.json> | plotdata <results.csv> <spec> | verify <tiling.json>
// Exit codes: 0 ok, 1 invariant failure, 2 usage or config error.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "amen/experiment.hpp"
#include "amen/tiling.hpp"

namespace {

constexpr int kOk = 0, kInvariantFailure = 1, kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// AMEN_WORKERS sets the OpenMP thread count; results do not depend on it.
void apply_workers() {
  const char* env = std::getenv("AMEN_WORKERS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) throw UsageError("AMEN_WORKERS must be a positive integer, got '" + std::string(env) + "'");
  omp_set_num_threads(static_cast<int>(n));
}

int cmd_run(const std::string& path, const std::string& output_override) {
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
  if (!output_override.empty() && raw.is_object()) raw["output"] = output_override;
  const auto cfg = amen::parse_config(raw);
  const auto outcome = amen::run_experiment(cfg);
  const auto& cache = outcome.manifest["cache"];
  std::cout << "kind " << cfg.kind << ", output " << cfg.output << ", cache "
            << (cache["full_reuse"].get<bool>() ? "reused" : "computed") << "\n";
  for (const auto& f : outcome.failures) std::cerr << "FAILED check: " << f << "\n";
  std::cout << (outcome.failures.empty() ? "all checks pass" : "some checks failed") << "\n";
  return outcome.exit_code == 0 ? kOk : kInvariantFailure;
}

int cmd_plotdata(const std::string& results, const std::string& spec_arg, const std::string& out_path) {
  const std::string spec_text = !spec_arg.empty() && spec_arg.front() == '{' ? spec_arg : slurp(spec_arg);
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(spec_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("plot spec: " + std::string(e.what()));
  }
  const std::string csv = slurp(results);
  if (out_path.empty()) {
    amen::emit_plotdata(csv, spec, std::cout);
  } else {
    std::ostringstream s;
    amen::emit_plotdata(csv, spec, s);
    std::ofstream o(out_path, std::ios::binary | std::ios::trunc);
    if (!o) throw UsageError("cannot write " + out_path);
    o << s.str();
  }
  return kOk;
}

int cmd_verify(const std::string& path) {
  amen::QuasiTiling q;
  try {
    q = amen::tiling_from_json(slurp(path));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  const auto rep = amen::verify_tiling(q);
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << amen::format_number(c.measured)
              << " limit=" << amen::format_number(c.limit) << (c.detail.empty() ? "" : " " + c.detail) << "\n";
  return rep.all_pass() ? kOk : kInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi tilings, ergodic averages and density-of-states experiments"};
  app.require_subcommand(1);
  std::string config, output, results, spec, plot_out, tiling;
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("config", config, "Config file")->required();
  run->add_option("-o,--output", output, "Override the output directory");
  auto* plot = app.add_subcommand("plotdata", "Pivot results.csv into a plot-ready TSV");
  plot->add_option("results", results, "results.csv")->required();
  plot->add_option("spec", spec, "Plot spec: JSON file or inline JSON object")->required();
  plot->add_option("-o,--out", plot_out, "Write the TSV here instead of stdout");
  auto* verify = app.add_subcommand("verify", "Re-check a saved quasi tiling");
  verify->add_option("tiling", tiling, "tiling.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  try {
    apply_workers();
    if (*run) return cmd_run(config, output);
    if (*plot) return cmd_plotdata(results, spec, plot_out);
    return cmd_verify(tiling);
  } catch (const amen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariantFailure;
  }
}
