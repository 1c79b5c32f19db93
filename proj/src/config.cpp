// lanemon/config.cpp
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

#include "lanemon/config.hpp"

#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "lanemon/common.hpp"
#include "lanemon/rng.hpp"

namespace lanemon::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

// Strictness gate: every object must contain only recognized keys.
void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail("'" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out,
                const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail("bad value for '" + std::string(key) + "' in " + where);
  }
}

void read_path(const json& obj, const char* key, fs::path& out,
               const std::string& where) {
  std::string s = out.string();
  read_field(obj, key, s, where);
  out = s;
}

void parse_train_config(const json& obj, const std::string& where,
                        nn::TrainConfig& out) {
  expect_keys(obj, where, {"epochs", "lr", "batch"});
  read_field(obj, "epochs", out.epochs, where);
  read_field(obj, "lr", out.lr, where);
  read_field(obj, "batch", out.batch, where);
  if (out.epochs < 1) fail("'epochs' must be >= 1 in " + where);
  if (!(out.lr > 0.0)) fail("'lr' must be > 0 in " + where);
  if (out.batch < 1) fail("'batch' must be >= 1 in " + where);
}

void parse_dataset(const json& obj, sim::CollectConfig& out) {
  const std::string where = "training.dataset";
  expect_keys(obj, where,
              {"tracks", "episodes_per_track", "max_frames", "stride",
               "drive_noise", "start_lateral_jitter", "start_heading_jitter"});
  read_field(obj, "tracks", out.tracks, where);
  read_field(obj, "episodes_per_track", out.episodes_per_track, where);
  read_field(obj, "max_frames", out.max_frames, where);
  read_field(obj, "stride", out.stride, where);
  read_field(obj, "drive_noise", out.drive_noise, where);
  read_field(obj, "start_lateral_jitter", out.start_lateral_jitter, where);
  read_field(obj, "start_heading_jitter", out.start_heading_jitter, where);
  if (out.tracks.empty()) fail("'tracks' must not be empty in " + where);
  if (out.episodes_per_track < 1)
    fail("'episodes_per_track' must be >= 1 in " + where);
  if (out.max_frames < 1) fail("'max_frames' must be >= 1 in " + where);
  if (out.stride < 1) fail("'stride' must be >= 1 in " + where);
}

void parse_plan(const json& obj, eval::ExperimentPlan& out) {
  const std::string where = "plan";
  expect_keys(obj, where,
              {"circuits", "calibration_laps", "eval_laps", "lap_frames",
               "run_frames", "anomaly_onset", "anomalies", "mutants",
               "reaction_offsets"});
  read_field(obj, "circuits", out.circuits, where);
  read_field(obj, "calibration_laps", out.calibration_laps, where);
  read_field(obj, "eval_laps", out.eval_laps, where);
  read_field(obj, "lap_frames", out.lap_frames, where);
  read_field(obj, "run_frames", out.run_frames, where);
  read_field(obj, "anomaly_onset", out.anomaly_onset, where);
  read_field(obj, "reaction_offsets", out.reaction_offsets, where);
  if (obj.contains("anomalies")) {
    const json& arr = obj.at("anomalies");
    if (!arr.is_array()) fail("'anomalies' must be an array in plan");
    out.anomalies.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string aw = "plan.anomalies[" + std::to_string(i) + "]";
      eval::AnomalyPlanEntry e;
      expect_keys(arr[i], aw, {"kind", "severities", "repeats"});
      read_field(arr[i], "kind", e.kind, aw);
      read_field(arr[i], "severities", e.severities, aw);
      read_field(arr[i], "repeats", e.repeats, aw);
      if (e.kind.empty()) fail("'kind' is required in " + aw);
      out.anomalies.push_back(std::move(e));
    }
  }
  if (obj.contains("mutants")) {
    const json& arr = obj.at("mutants");
    if (!arr.is_array()) fail("'mutants' must be an array in plan");
    out.mutants.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string mw = "plan.mutants[" + std::to_string(i) + "]";
      eval::MutantPlanEntry e;
      expect_keys(arr[i], mw, {"op", "param", "models", "repeats"});
      read_field(arr[i], "op", e.op, mw);
      read_field(arr[i], "param", e.param, mw);
      read_field(arr[i], "models", e.models, mw);
      read_field(arr[i], "repeats", e.repeats, mw);
      if (e.op.empty()) fail("'op' is required in " + mw);
      out.mutants.push_back(std::move(e));
    }
  }
}

}  // namespace

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.plan.seed = seed;
  cfg.training.dataset.seed = derive_seed(seed, "dataset");
  cfg.training.controller.seed = derive_seed(seed, "controller");
  cfg.training.sae.train.seed = derive_seed(seed, "sae");
  cfg.training.ensemble.train.seed = derive_seed(seed, "ensemble-train");
  cfg.training.ensemble.seed = derive_seed(seed, "ensemble");
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.training.sae.down = cfg.models.sae_down;
  cfg.training.sae.hidden = cfg.models.sae_hidden;
  cfg.training.dataset.cam_h = cfg.models.cam_h;
  cfg.training.dataset.cam_w = cfg.models.cam_w;
  cfg.evaluation.markdown = true;
  apply_seed(cfg, cfg.seed);
  return cfg;
}

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg = default_run_config();
  expect_keys(doc, "config",
              {"version", "paths", "seed", "jobs", "desk_scale", "log_level",
               "camera", "models", "training", "plan", "evaluation"});
  if (doc.contains("version")) {
    int v = 0;
    read_field(doc, "version", v, "config");
    if (v != 1) fail("unsupported config version " + std::to_string(v));
  }
  if (doc.contains("paths")) {
    const json& p = doc.at("paths");
    expect_keys(p, "paths", {"workspace", "severity_table"});
    read_path(p, "workspace", cfg.workspace, "paths");
    read_path(p, "severity_table", cfg.severity_table, "paths");
    if (cfg.severity_table.empty())
      fail("'severity_table' must not be empty in paths");
  }
  read_field(doc, "seed", cfg.seed, "config");
  read_field(doc, "jobs", cfg.jobs, "config");
  read_field(doc, "desk_scale", cfg.desk_scale, "config");
  read_field(doc, "log_level", cfg.log_level, "config");
  if (cfg.jobs < 1) fail("'jobs' must be >= 1");
  if (cfg.log_level != "quiet" && cfg.log_level != "info" &&
      cfg.log_level != "debug")
    fail("'log_level' must be one of quiet, info, debug");
  if (doc.contains("camera")) {
    const json& c = doc.at("camera");
    expect_keys(c, "camera", {"height", "width"});
    read_field(c, "height", cfg.models.cam_h, "camera");
    read_field(c, "width", cfg.models.cam_w, "camera");
    if (cfg.models.cam_h < 16 || cfg.models.cam_w < 16)
      fail("camera dimensions must be at least 16x16");
  }
  if (doc.contains("models")) {
    const json& m = doc.at("models");
    expect_keys(m, "models", {"sae_hidden", "sae_down"});
    read_field(m, "sae_hidden", cfg.models.sae_hidden, "models");
    read_field(m, "sae_down", cfg.models.sae_down, "models");
    if (cfg.models.sae_hidden < 1) fail("'sae_hidden' must be >= 1 in models");
    if (cfg.models.sae_down < 1) fail("'sae_down' must be >= 1 in models");
  }
  if (doc.contains("training")) {
    const json& t = doc.at("training");
    expect_keys(t, "training", {"dataset", "controller", "sae", "ensemble"});
    if (t.contains("dataset")) parse_dataset(t.at("dataset"), cfg.training.dataset);
    if (t.contains("controller"))
      parse_train_config(t.at("controller"), "training.controller",
                         cfg.training.controller);
    if (t.contains("sae"))
      parse_train_config(t.at("sae"), "training.sae", cfg.training.sae.train);
    if (t.contains("ensemble")) {
      const json& e = t.at("ensemble");
      expect_keys(e, "training.ensemble",
                  {"members", "train_fraction", "epochs", "lr", "batch"});
      read_field(e, "members", cfg.training.ensemble.members,
                 "training.ensemble");
      read_field(e, "train_fraction", cfg.training.ensemble.train_fraction,
                 "training.ensemble");
      read_field(e, "epochs", cfg.training.ensemble.train.epochs,
                 "training.ensemble");
      read_field(e, "lr", cfg.training.ensemble.train.lr, "training.ensemble");
      read_field(e, "batch", cfg.training.ensemble.train.batch,
                 "training.ensemble");
      if (cfg.training.ensemble.members < 2)
        fail("'members' must be >= 2 in training.ensemble");
      if (!(cfg.training.ensemble.train_fraction > 0.0 &&
            cfg.training.ensemble.train_fraction <= 1.0))
        fail("'train_fraction' must be in (0, 1] in training.ensemble");
      if (cfg.training.ensemble.train.epochs < 1 ||
          cfg.training.ensemble.train.batch < 1 ||
          !(cfg.training.ensemble.train.lr > 0.0))
        fail("bad epochs/lr/batch in training.ensemble");
    }
  }
  if (doc.contains("plan")) parse_plan(doc.at("plan"), cfg.plan);
  if (doc.contains("evaluation")) {
    const json& e = doc.at("evaluation");
    expect_keys(e, "evaluation",
                {"strict_post_onset", "frame_level", "markdown"});
    read_field(e, "strict_post_onset", cfg.evaluation.strict_post_onset,
               "evaluation");
    read_field(e, "frame_level", cfg.evaluation.frame_level, "evaluation");
    read_field(e, "markdown", cfg.evaluation.markdown, "evaluation");
  }

  // The camera feeds both the dataset renderer and the reconstruction
  // monitor, so their dimensions always track the model config.
  cfg.training.dataset.cam_h = cfg.models.cam_h;
  cfg.training.dataset.cam_w = cfg.models.cam_w;
  cfg.training.sae.down = cfg.models.sae_down;
  cfg.training.sae.hidden = cfg.models.sae_hidden;

  apply_seed(cfg, cfg.seed);
  eval::validate_plan(cfg.plan);
  return cfg;
}

RunConfig load_run_config(const fs::path& file) {
  json doc;
  try {
    doc = json::parse(read_text_file(file));
  } catch (const json::exception& e) {
    fail("cannot parse " + file.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    fail(std::string(e.what()));
  }
  return parse_run_config(doc);
}

json run_config_json(const RunConfig& cfg) {
  json anomalies = json::array();
  for (const auto& a : cfg.plan.anomalies)
    anomalies.push_back({{"kind", a.kind},
                         {"severities", a.severities},
                         {"repeats", a.repeats}});
  json mutants = json::array();
  for (const auto& m : cfg.plan.mutants)
    mutants.push_back({{"op", m.op},
                       {"param", m.param},
                       {"models", m.models},
                       {"repeats", m.repeats}});
  return json{
      {"version", 1},
      {"paths",
       {{"workspace", cfg.workspace.generic_string()},
        {"severity_table", cfg.severity_table.generic_string()}}},
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"desk_scale", cfg.desk_scale},
      {"log_level", cfg.log_level},
      {"camera", {{"height", cfg.models.cam_h}, {"width", cfg.models.cam_w}}},
      {"models",
       {{"sae_hidden", cfg.models.sae_hidden},
        {"sae_down", cfg.models.sae_down}}},
      {"training",
       {{"dataset",
         {{"tracks", cfg.training.dataset.tracks},
          {"episodes_per_track", cfg.training.dataset.episodes_per_track},
          {"max_frames", cfg.training.dataset.max_frames},
          {"stride", cfg.training.dataset.stride},
          {"drive_noise", cfg.training.dataset.drive_noise},
          {"start_lateral_jitter", cfg.training.dataset.start_lateral_jitter},
          {"start_heading_jitter",
           cfg.training.dataset.start_heading_jitter}}},
        {"controller",
         {{"epochs", cfg.training.controller.epochs},
          {"lr", cfg.training.controller.lr},
          {"batch", cfg.training.controller.batch}}},
        {"sae",
         {{"epochs", cfg.training.sae.train.epochs},
          {"lr", cfg.training.sae.train.lr},
          {"batch", cfg.training.sae.train.batch}}},
        {"ensemble",
         {{"members", cfg.training.ensemble.members},
          {"train_fraction", cfg.training.ensemble.train_fraction},
          {"epochs", cfg.training.ensemble.train.epochs},
          {"lr", cfg.training.ensemble.train.lr},
          {"batch", cfg.training.ensemble.train.batch}}}}},
      {"plan",
       {{"circuits", cfg.plan.circuits},
        {"calibration_laps", cfg.plan.calibration_laps},
        {"eval_laps", cfg.plan.eval_laps},
        {"lap_frames", cfg.plan.lap_frames},
        {"run_frames", cfg.plan.run_frames},
        {"anomaly_onset", cfg.plan.anomaly_onset},
        {"anomalies", anomalies},
        {"mutants", mutants},
        {"reaction_offsets", cfg.plan.reaction_offsets}}},
      {"evaluation",
       {{"strict_post_onset", cfg.evaluation.strict_post_onset},
        {"frame_level", cfg.evaluation.frame_level},
        {"markdown", cfg.evaluation.markdown}}}};
}

std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a64(run_config_json(cfg).dump());
}

std::string config_hash_hex(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return std::string(buf);
}

void record_manifest(const eval::WorkspacePaths& ws, const std::string& command,
                     const RunConfig& cfg) {
  json doc = json::object();
  if (fs::exists(ws.manifest_file())) {
    try {
      doc = json::parse(read_text_file(ws.manifest_file()));
      if (!doc.is_object()) doc = json::object();
    } catch (const std::exception&) {
      doc = json::object();
    }
  }
  doc["version"] = kVersion;
  if (!doc.contains("commands") || !doc["commands"].is_object())
    doc["commands"] = json::object();
  doc["commands"][command] = {{"tool_version", kVersion},
                              {"config_hash", config_hash_hex(cfg)},
                              {"seed", cfg.seed}};
  fs::create_directories(ws.root);
  write_file_atomic(ws.manifest_file(), doc.dump(2) + "\n");
}

}  // namespace lanemon::cli
