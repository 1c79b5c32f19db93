// lanemon/experiment.hpp
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
// The experiment harness. A plan expands to a deterministic list of
// recording jobs (calibration laps, held-out nominal laps, corrupted runs,
// runs driven by fault-trained controllers); stages generate the recordings,
// score them with every monitor, calibrate thresholds on the calibration
// laps of the first circuit, and roll everything up into the metrics
// report. Every stage persists its outputs under the workspace and reuses
// them on rerun, and all outputs are deterministic functions of the plan.

#ifndef LANEMON_EXPERIMENT_HPP_
#define LANEMON_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lanemon/baselines.hpp"
#include "lanemon/corrupt.hpp"
#include "lanemon/dataset.hpp"
#include "lanemon/eval.hpp"
#include "lanemon/mutate.hpp"
#include "lanemon/nn.hpp"
#include "lanemon/recording.hpp"

namespace lanemon::eval {

// ---------------------------------------------------------------------------
// Plans.

struct AnomalyPlanEntry {
  std::string kind;                 // corruption kind name
  std::vector<int> severities{3};   // 1..5
  int repeats = 1;
};

struct MutantPlanEntry {
  std::string op;      // "HLR" | "TAN" | "TCL"
  double param = 0.0;
  int models = 2;      // trained pool members to drive
  int repeats = 1;
};

struct ExperimentPlan {
  std::vector<std::string> circuits{"circuit-1", "circuit-2"};
  int calibration_laps = 7;  // recorded on the first circuit only
  int eval_laps = 10;        // held-out laps per circuit
  int lap_frames = 400;      // frame cap per nominal lap
  int run_frames = 450;      // frame cap per corrupted/fault-driven run
  int anomaly_onset = 200;   // corruption start frame
  std::vector<AnomalyPlanEntry> anomalies;
  std::vector<MutantPlanEntry> mutants;
  std::vector<int> reaction_offsets{0, -10, -20, -30, -40};
  std::uint64_t seed = 1;
};

// Rejects structurally invalid plans (no circuits, non-positive lap counts,
// severities outside 1..5, positive reaction offsets, unknown kinds/ops).
void validate_plan(const ExperimentPlan& plan);

struct RecordingJob {
  std::string id;
  std::string circuit;
  sim::RecordingCondition condition;
  std::uint64_t seed = 0;     // derived from (plan seed, id): stable per id
  bool calibration = false;
  int max_frames = 0;
};

// The plan's full job list, deterministic and duplicate-free; calibration
// ids never collide with evaluation ids.
std::vector<RecordingJob> plan_recordings(const ExperimentPlan& plan);

// ---------------------------------------------------------------------------
// Workspace layout.

struct WorkspacePaths {
  std::filesystem::path root;

  std::filesystem::path weights_dir() const { return root / "weights"; }
  std::filesystem::path controller_file() const {
    return weights_dir() / "controller.lmw";
  }
  std::filesystem::path sae_file() const { return weights_dir() / "sae.lmw"; }
  std::filesystem::path ensemble_dir() const {
    return weights_dir() / "ensemble";
  }
  std::filesystem::path mutants_dir() const {
    return weights_dir() / "mutants";
  }
  std::filesystem::path recordings_dir() const { return root / "recordings"; }
  std::filesystem::path recording_dir(const std::string& id) const {
    return recordings_dir() / id;
  }
  std::filesystem::path traces_dir() const { return root / "traces"; }
  std::filesystem::path trace_file(const std::string& id) const {
    return traces_dir() / (id + ".csv");
  }
  std::filesystem::path thresholds_file() const {
    return root / "thresholds.json";
  }
  std::filesystem::path reports_dir() const { return root / "reports"; }
  std::filesystem::path report_file() const {
    return reports_dir() / "report.csv";
  }
  std::filesystem::path frame_report_file() const {
    return reports_dir() / "report-frame-level.csv";
  }
  std::filesystem::path summary_file() const {
    return reports_dir() / "summary.md";
  }
  std::filesystem::path alarms_file() const {
    return reports_dir() / "alarms.jsonl";
  }
  std::filesystem::path manifest_file() const { return root / "manifest.json"; }
};

// Thrown when a stage needs an artifact that an earlier stage produces;
// `command` names the stage to run first (train, record, calibrate).
struct MissingPrerequisite : std::runtime_error {
  std::string command;
  MissingPrerequisite(std::string cmd, const std::string& detail)
      : std::runtime_error(detail + " — run '" + cmd + "' first"),
        command(std::move(cmd)) {}
};

// ---------------------------------------------------------------------------
// Trained artifacts.

struct ModelConfig {
  int cam_h = 120, cam_w = 160;
  int sae_hidden = 64, sae_down = 4;
  nn::NetSpec controller_spec() const {
    return nn::NetSpec::lane_controller(cam_h, cam_w);
  }
};

struct Artifacts {
  std::shared_ptr<nn::Net<float>> controller;
  std::shared_ptr<baselines::SaeModel> sae;
  std::shared_ptr<baselines::Ensemble> ensemble;
  mutate::MutantPool pool;  // empty when no fault-trained models exist
};

// Loads everything the stages replay with; missing weight files raise
// MissingPrerequisite("train"). The pool is optional unless need_mutants.
Artifacts load_artifacts(const WorkspacePaths& ws, const ModelConfig& mc,
                         bool need_mutants);

// Wraps a net as a closed-loop controller.
monitor::Controller make_net_controller(
    std::shared_ptr<const nn::Net<float>> net);

// The fixed scoring-backend order used in traces and reports.
const std::vector<std::string>& canonical_oracles();

// ---------------------------------------------------------------------------
// Stages. Each reuses whatever the workspace already holds.

struct StageOutcome {
  int computed = 0;
  int reused = 0;
};

struct TrainOptions {
  sim::CollectConfig dataset;          // behavioral-cloning frames
  nn::TrainConfig controller;          // also the mutant pool's base config
  baselines::SaeConfig sae;
  baselines::EnsembleConfig ensemble;
  bool force = false;                  // retrain even if weights exist
};

// Trains (or reuses) the controller, both comparison monitors, and — when
// the plan drives fault-trained models — the mutant pool. The pool gets the
// plan's operators/parameters, at least two models per spec so the spread
// monitor always has a pool to disagree in.
StageOutcome run_training(const WorkspacePaths& ws, const ExperimentPlan& plan,
                          const ModelConfig& mc, const TrainOptions& opt);

// Generates every planned recording that is not already on disk.
StageOutcome run_recordings(const WorkspacePaths& ws,
                            const ExperimentPlan& plan, const ModelConfig& mc,
                            const corrupt::SeverityTable& table, int jobs = 1);

// Ensures a trace file (all oracles) exists for each given job's recording.
StageOutcome ensure_traces(const WorkspacePaths& ws,
                           const std::vector<RecordingJob>& jobs,
                           const ModelConfig& mc, int n_jobs = 1);

// Calibrates thresholds from the calibration laps' traces and persists them.
monitor::ThresholdSet run_calibration(const WorkspacePaths& ws,
                                      const ExperimentPlan& plan,
                                      const ModelConfig& mc, int jobs = 1);

struct EvalOptions {
  bool strict_post_onset = false;
  bool frame_level = false;  // additionally emit the frame-level report
  bool markdown = false;     // additionally emit the summary tables
  int jobs = 1;
};

// Replays thresholds over the evaluation recordings and writes the report
// (plus alarms, and the optional extra outputs). Requires recordings and
// thresholds; computes missing traces on the fly.
MetricsReport run_evaluation(const WorkspacePaths& ws,
                             const ExperimentPlan& plan, const ModelConfig& mc,
                             const EvalOptions& opt = {});

// record -> calibrate -> evaluate, end to end.
MetricsReport run_experiment(const WorkspacePaths& ws,
                             const ExperimentPlan& plan, const ModelConfig& mc,
                             const corrupt::SeverityTable& table,
                             const EvalOptions& opt = {});

}  // namespace lanemon::eval

#endif  // LANEMON_EXPERIMENT_HPP_
