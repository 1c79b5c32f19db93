// lanemon/config.hpp
//
// Copyright 2026 The Lanemon Authors
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
//
// The command-line tool's run configuration: one JSON document that fixes
// the workspace, the models, the training budgets, and the experiment plan.
// Parsing is strict (unknown keys are errors) and the parsed form serializes
// back to an equivalent document. Every stage seed is derived from the one
// master seed, so overriding it re-seeds the whole run coherently.

#ifndef LANEMON_CONFIG_HPP_
#define LANEMON_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "lanemon/experiment.hpp"

namespace lanemon::cli {

// Tool version, recorded in the workspace manifest next to each artifact.
inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::filesystem::path workspace;  // empty until the config or a flag sets it
  std::filesystem::path severity_table = "data/severity.json";
  std::uint64_t seed = 1;  // master seed; every stage seed derives from it
  int jobs = 1;            // worker threads for recording/replay stages
  bool desk_scale = true;  // documents that the budgets are desk-sized
  std::string log_level = "info";  // quiet | info | debug
  eval::ModelConfig models;
  eval::TrainOptions training;   // stage seeds come from `seed`, not the file
  eval::ExperimentPlan plan;     // plan.seed mirrors `seed`
  eval::EvalOptions evaluation;  // .jobs mirrors `jobs` when stages run
};

// Sets the master seed and re-derives every stage seed from it.
void apply_seed(RunConfig& cfg, std::uint64_t seed);

// The built-in defaults (also what an empty JSON object parses to).
RunConfig default_run_config();

// Strict parse: unknown keys anywhere in the document are rejected, values
// are range-checked, and the embedded plan is validated. Throws
// std::invalid_argument with the offending key or value named.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& file);

// The full round-trip form: every recognized key, current values.
// parse_run_config(run_config_json(cfg)) reproduces cfg exactly.
nlohmann::json run_config_json(const RunConfig& cfg);

// FNV-1a over the canonical serialized config; hex form for the manifest.
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_hash_hex(const RunConfig& cfg);

// Updates <workspace>/manifest.json: tool version plus, under the given
// command name, the config hash and master seed that produced its artifacts.
void record_manifest(const eval::WorkspacePaths& ws, const std::string& command,
                     const RunConfig& cfg);

}  // namespace lanemon::cli

#endif  // LANEMON_CONFIG_HPP_
