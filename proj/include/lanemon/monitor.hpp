// lanemon/monitor.hpp
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
// Runtime consistency monitoring for an image-driven steering controller.
//
// Each check pairs an image transform with an expected output relation: the
// controller answers the original frame, then each transformed copy
// (follow-up), and the deviation between the related outputs becomes a
// per-frame raw score. Only the original frame's output is ever actuated.
// Raw scores pass through a short weighted-history filter to suppress
// single-frame spikes; an alarm fires when the filtered score exceeds a
// threshold calibrated as 1.1x the largest filtered score seen over clean
// calibration runs.

#ifndef LANEMON_MONITOR_HPP_
#define LANEMON_MONITOR_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lanemon/driver.hpp"
#include "lanemon/image.hpp"
#include "lanemon/recording.hpp"

namespace lanemon::monitor {

using sim::Controls;

// A controller answers one frame with normalized steering and throttle.
using Controller = std::function<Controls(const img::Image&)>;

// One consistency check: how to transform the frame, and what the transformed
// frame's steering answer should look like relative to the original.
struct MRDef {
  std::string id;  // "MR1".."MR5"
  // Builds the follow-up frame; the seed only matters for stochastic
  // transforms (fresh noise per frame keeps replays deterministic).
  std::function<img::Image(const img::Image&, std::uint64_t)> transform;
  bool negate_steering = false;  // expected follow-up steering = -source
  bool stochastic = false;
};

// The five built-in checks:
//   MR1 darkens every channel by 77 (saturating),
//   MR2 rescales saturation to byte level 50,
//   MR3 adds per-pixel relative noise up to +-20% (stochastic),
//   MR4 applies a 1x5 horizontal mean blur,
//   MR5 mirrors the frame left-right and expects negated steering.
const std::vector<MRDef>& builtin_mrs();

// |expected follow-up steering - actual follow-up steering|, where the
// expectation is the source steering (negated for mirror checks).
double mr_uncertainty(const MRDef& mr, const Controls& source,
                      const Controls& followup);

struct MonitorStepResult {
  Controls control;                // the source output; the one to actuate
  std::vector<double> raw_scores;  // parallel to the checks
};

// Scores one frame: invokes the controller once on the source frame and once
// per check on its follow-up — exactly 1 + mrs.size() invocations. The
// returned control is bit-identical to calling the controller directly, so
// monitoring never perturbs the vehicle.
MonitorStepResult monitor_step(const std::vector<MRDef>& mrs,
                               const Controller& controller,
                               const img::Image& frame,
                               std::uint64_t frame_seed);

// Weighted history filter: out[t] = sum_{i=1..min(k,t)} raw[t-i] / i, so the
// previous frame weighs 1, the one before 1/2, and so on; out[0] = 0. The
// current frame's raw score is deliberately excluded. Linear in the input.
std::vector<double> ar_smooth(const std::vector<double>& raw, int k = 10);

// Experimental feedback variant (not used by the default pipeline): each
// output mixes the newest raw value with the filter's own history, with the
// harmonic weights renormalized to a total feedback gain of 1/2 so the
// recursion stays stable. Kept behind this separate entry point for
// side-by-side comparisons.
std::vector<double> ar_smooth_recursive(const std::vector<double>& raw,
                                        int k = 10);

struct SmoothingConfig {
  int k = 10;
  bool recursive = false;  // opt into ar_smooth_recursive
};

std::vector<double> smooth(const std::vector<double>& raw,
                           const SmoothingConfig& cfg);

// One oracle's score sequence over one recording.
struct OracleTrace {
  std::string oracle_id;
  std::vector<double> raw;
  std::vector<double> smoothed;
};

// All traces gathered over one recording.
struct RecordingTraces {
  std::string recording_id;
  std::vector<OracleTrace> oracles;
};

struct ThresholdEntry {
  double value = 0.0;
  bool degenerate = false;  // calibration scores were all zero
};

struct ThresholdSet {
  std::map<std::string, ThresholdEntry> entries;
  std::vector<std::string> provenance;  // calibration recording ids

  const ThresholdEntry& at(const std::string& oracle_id) const;
};

// Per oracle: 1.1 x the largest smoothed score seen anywhere in the
// calibration traces. An oracle whose calibration scores are all zero gets a
// zero threshold flagged degenerate (any positive score will alarm).
ThresholdSet calibrate_thresholds(const std::vector<RecordingTraces>& calib);

void save_thresholds(const ThresholdSet& ts, const std::filesystem::path& path);
ThresholdSet load_thresholds(const std::filesystem::path& path);

struct AlarmEvent {
  std::string recording_id;
  std::string oracle_id;
  int frame = -1;
  double smoothed = 0.0;  // score at the alarm frame (> threshold)
};

// First frame whose smoothed score strictly exceeds the threshold.
std::optional<AlarmEvent> first_alarm(const std::string& recording_id,
                                      const OracleTrace& trace,
                                      const ThresholdEntry& threshold);

// A scoring backend that can be replayed over recorded frames. The frame
// seed feeds any stochastic transform inside the oracle.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual const std::string& id() const = 0;
  virtual double raw_score(const img::Image& frame,
                           std::uint64_t frame_seed) = 0;
};

// A single consistency check as an oracle, namespaced "mr/<id>". Costs one
// source plus one follow-up controller call per frame.
class MrOracle : public Oracle {
 public:
  MrOracle(MRDef mr, Controller controller);
  const std::string& id() const override { return id_; }
  double raw_score(const img::Image& frame, std::uint64_t frame_seed) override;

 private:
  std::string id_;
  MRDef mr_;
  Controller controller_;
};

// Replays one oracle over a recording: scores every frame, smooths, and
// reports the first alarm, if any. Frame seeds derive from (run_seed, frame
// index), so a rerun reproduces the trace bit for bit.
struct ReplayResult {
  OracleTrace trace;
  std::optional<AlarmEvent> alarm;
};

ReplayResult replay_monitor(const sim::Recording& rec, Oracle& oracle,
                            const ThresholdSet& thresholds,
                            std::uint64_t run_seed,
                            const SmoothingConfig& smoothing = {});

// Trace-only replay (no thresholds involved): scores and smoothing alone.
// Used when traces are gathered before any threshold exists, e.g. to feed
// calibration.
OracleTrace replay_trace(const sim::Recording& rec, Oracle& oracle,
                         std::uint64_t run_seed,
                         const SmoothingConfig& smoothing = {});

// Scores every built-in check over a recording in one pass, sharing the
// per-frame source invocation: 1 + #checks controller calls per frame. The
// traces are identical to replaying each check's oracle separately.
std::vector<OracleTrace> replay_mr_traces(const sim::Recording& rec,
                                          const Controller& controller,
                                          const std::vector<MRDef>& mrs,
                                          std::uint64_t run_seed,
                                          const SmoothingConfig& smoothing = {});

// Trace persistence: CSV with header frame,oracle,raw,smoothed (%.17g), one
// block per oracle in the given order.
void save_traces(const std::vector<OracleTrace>& traces,
                 const std::filesystem::path& path);
std::vector<OracleTrace> load_traces(const std::filesystem::path& path);

// Alarm persistence: one JSON object per line.
void save_alarms(const std::vector<AlarmEvent>& alarms,
                 const std::filesystem::path& path);
std::vector<AlarmEvent> load_alarms(const std::filesystem::path& path);

}  // namespace lanemon::monitor

#endif  // LANEMON_MONITOR_HPP_
