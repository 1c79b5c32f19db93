// lanemon — metamorphic runtime monitoring for a simulated lane keeper.
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
// Subcommands: train, record, calibrate, evaluate, demo (full pipeline on a
// small seeded plan), and corrupt (standalone image-corruption tool).
// Exit codes: 0 success, 1 configuration error, 2 missing prerequisite
// (the message names the command to run first), 3 runtime failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "lanemon/common.hpp"
#include "lanemon/config.hpp"
#include "lanemon/corrupt.hpp"
#include "lanemon/experiment.hpp"
#include "lanemon/image.hpp"

namespace {

namespace fs = std::filesystem;
using namespace lanemon;

int log_rank(const std::string& level) {
  if (level == "quiet") return 0;
  if (level == "debug") return 2;
  return 1;  // info
}

struct Logger {
  int rank = 1;
  void info(const std::string& msg) const {
    if (rank >= 1) std::cerr << msg << "\n";
  }
};

// Flags shared by every workspace-driven subcommand. Flag values override
// the corresponding config fields; the config file is the single source for
// everything else.
struct CommonFlags {
  std::string config;
  std::string workspace;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int jobs = 0;
  bool force = false;
  std::string log_level;

  void attach(CLI::App* sub, bool with_force) {
    sub->add_option("--config", config, "run configuration (JSON)")
        ->required();
    sub->add_option("--workspace", workspace,
                    "workspace directory (overrides paths.workspace)");
    sub->add_option("--seed", seed, "master seed (overrides config)")
        ->each([this](const std::string&) { has_seed = true; });
    sub->add_option("--jobs", jobs, "worker threads (overrides config)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--log-level", log_level, "quiet | info | debug")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));
    if (with_force)
      sub->add_flag("--force", force, "recompute artifacts that already exist");
  }

  cli::RunConfig load() const {
    cli::RunConfig cfg = cli::load_run_config(config);
    if (!workspace.empty()) cfg.workspace = workspace;
    if (has_seed) cli::apply_seed(cfg, seed);
    if (jobs > 0) cfg.jobs = jobs;
    if (!log_level.empty()) cfg.log_level = log_level;
    if (cfg.workspace.empty())
      throw std::invalid_argument(
          "config: no workspace; set paths.workspace or pass --workspace");
    return cfg;
  }
};

eval::EvalOptions eval_options(const cli::RunConfig& cfg) {
  eval::EvalOptions o = cfg.evaluation;
  o.jobs = cfg.jobs;
  return o;
}

void remove_planned_outputs(const eval::WorkspacePaths& ws,
                            const eval::ExperimentPlan& plan, bool recordings,
                            bool traces) {
  for (const auto& job : eval::plan_recordings(plan)) {
    if (recordings) fs::remove_all(ws.recording_dir(job.id));
    if (traces) fs::remove(ws.trace_file(job.id));
  }
}

void cmd_train(const CommonFlags& flags) {
  cli::RunConfig cfg = flags.load();
  Logger log{log_rank(cfg.log_level)};
  eval::WorkspacePaths ws{cfg.workspace};
  eval::TrainOptions opt = cfg.training;
  opt.force = flags.force;
  eval::StageOutcome out = eval::run_training(ws, cfg.plan, cfg.models, opt);
  cli::record_manifest(ws, "train", cfg);
  log.info("train: " + std::to_string(out.computed) + " trained, " +
           std::to_string(out.reused) + " reused");
}

void cmd_record(const CommonFlags& flags) {
  cli::RunConfig cfg = flags.load();
  Logger log{log_rank(cfg.log_level)};
  eval::WorkspacePaths ws{cfg.workspace};
  if (flags.force) remove_planned_outputs(ws, cfg.plan, true, true);
  corrupt::SeverityTable table = corrupt::SeverityTable::load(cfg.severity_table);
  eval::StageOutcome out =
      eval::run_recordings(ws, cfg.plan, cfg.models, table, cfg.jobs);
  cli::record_manifest(ws, "record", cfg);
  log.info("record: " + std::to_string(out.computed) + " recorded, " +
           std::to_string(out.reused) + " reused");
}

void cmd_calibrate(const CommonFlags& flags) {
  cli::RunConfig cfg = flags.load();
  Logger log{log_rank(cfg.log_level)};
  eval::WorkspacePaths ws{cfg.workspace};
  if (flags.force) remove_planned_outputs(ws, cfg.plan, false, true);
  monitor::ThresholdSet ts =
      eval::run_calibration(ws, cfg.plan, cfg.models, cfg.jobs);
  cli::record_manifest(ws, "calibrate", cfg);
  log.info("calibrate: " + std::to_string(ts.entries.size()) +
           " thresholds from " + std::to_string(ts.provenance.size()) +
           " calibration recordings");
  for (const auto& [oracle, entry] : ts.entries) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", entry.value);
    log.info("  " + oracle + ": " + buf +
             (entry.degenerate ? " (degenerate)" : ""));
  }
}

void cmd_evaluate(const CommonFlags& flags, bool strict, bool frames) {
  cli::RunConfig cfg = flags.load();
  if (strict) cfg.evaluation.strict_post_onset = true;
  if (frames) cfg.evaluation.frame_level = true;
  Logger log{log_rank(cfg.log_level)};
  eval::WorkspacePaths ws{cfg.workspace};
  if (flags.force) remove_planned_outputs(ws, cfg.plan, false, true);
  eval::MetricsReport report =
      eval::run_evaluation(ws, cfg.plan, cfg.models, eval_options(cfg));
  cli::record_manifest(ws, "evaluate", cfg);
  for (const auto& w : report.warnings) log.info("warning: " + w);
  log.info("evaluate: " + std::to_string(report.rows.size()) + " rows -> " +
           ws.report_file().string());
}

void cmd_demo(const CommonFlags& flags) {
  cli::RunConfig cfg = flags.load();
  Logger log{log_rank(cfg.log_level)};
  eval::WorkspacePaths ws{cfg.workspace};
  corrupt::SeverityTable table = corrupt::SeverityTable::load(cfg.severity_table);

  eval::TrainOptions topt = cfg.training;
  topt.force = flags.force;
  log.info("demo: training models");
  eval::StageOutcome trained =
      eval::run_training(ws, cfg.plan, cfg.models, topt);
  cli::record_manifest(ws, "train", cfg);
  log.info("demo: trained " + std::to_string(trained.computed) + ", reused " +
           std::to_string(trained.reused));

  if (flags.force) remove_planned_outputs(ws, cfg.plan, true, true);
  eval::EvalOptions opt = eval_options(cfg);
  opt.markdown = true;  // the demo's product is the summary table
  log.info("demo: recording, calibrating, evaluating");
  eval::MetricsReport report =
      eval::run_experiment(ws, cfg.plan, cfg.models, table, opt);
  cli::record_manifest(ws, "record", cfg);
  cli::record_manifest(ws, "calibrate", cfg);
  cli::record_manifest(ws, "evaluate", cfg);
  cli::record_manifest(ws, "demo", cfg);
  for (const auto& w : report.warnings) log.info("warning: " + w);

  // The summary table is the demo's stdout payload, independent of log level.
  std::cout << read_text_file(ws.summary_file());
  std::cout.flush();
}

struct CorruptFlags {
  std::string input, output, kind, table = "data/severity.json";
  int severity = 3;
  int frame = 0;
  std::uint64_t seed = 1;
};

void cmd_corrupt(const CorruptFlags& f) {
  img::Image in = img::read_ppm(f.input);
  corrupt::SeverityTable table = corrupt::SeverityTable::load(f.table);
  corrupt::CorruptionSpec spec;
  spec.kind = corrupt::kind_from_string(f.kind);
  spec.severity = f.severity;
  spec.onset_frame = 0;
  spec.seed = f.seed;
  auto stream = corrupt::corruption_stream(table, spec);
  img::write_ppm(stream(in, f.frame), f.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metamorphic runtime monitoring for a lane-keeping simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kVersion);

  CommonFlags train_f, record_f, calibrate_f, evaluate_f, demo_f;
  bool eval_strict = false, eval_frames = false;
  CorruptFlags corrupt_f;

  CLI::App* train = app.add_subcommand(
      "train", "train the controller, comparison monitors, and mutant pool");
  train_f.attach(train, true);

  CLI::App* record = app.add_subcommand(
      "record", "drive every planned episode and persist the recordings");
  record_f.attach(record, true);

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "set alarm thresholds from the calibration laps");
  calibrate_f.attach(calibrate, true);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score the evaluation recordings and write the report");
  evaluate_f.attach(evaluate, true);
  evaluate->add_flag("--strict-post-onset", eval_strict,
                     "ignore pre-onset alarms on corrupted runs");
  evaluate->add_flag("--frame-level", eval_frames,
                     "also write the frame-level report");

  CLI::App* demo = app.add_subcommand(
      "demo", "end-to-end seeded run: train, record, calibrate, evaluate");
  demo_f.attach(demo, true);

  CLI::App* corrupt_cmd =
      app.add_subcommand("corrupt", "apply one corruption to a PPM image");
  corrupt_cmd->add_option("--in", corrupt_f.input, "input PPM")
      ->required()
      ->check(CLI::ExistingFile);
  corrupt_cmd->add_option("--out", corrupt_f.output, "output PPM")->required();
  corrupt_cmd->add_option("--kind", corrupt_f.kind, "corruption kind")
      ->required();
  corrupt_cmd->add_option("--severity", corrupt_f.severity, "severity 1..5")
      ->check(CLI::Range(1, 5));
  corrupt_cmd->add_option("--frame", corrupt_f.frame,
                          "frame index fed to the corruption stream");
  corrupt_cmd->add_option("--seed", corrupt_f.seed, "noise seed");
  corrupt_cmd->add_option("--table", corrupt_f.table, "severity table (JSON)")
      ->check(CLI::ExistingFile);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);  // prints the diagnostic
      return 1;     // any command-line problem is a configuration error
    }

    if (train->parsed()) cmd_train(train_f);
    if (record->parsed()) cmd_record(record_f);
    if (calibrate->parsed()) cmd_calibrate(calibrate_f);
    if (evaluate->parsed()) cmd_evaluate(evaluate_f, eval_strict, eval_frames);
    if (demo->parsed()) cmd_demo(demo_f);
    if (corrupt_cmd->parsed()) cmd_corrupt(corrupt_f);
    return 0;
  } catch (const eval::MissingPrerequisite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
