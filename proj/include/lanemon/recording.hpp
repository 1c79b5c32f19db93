// lanemon/recording.hpp
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
// On-disk episode recordings. A recording is a directory holding
//   manifest.json          run metadata and the driving condition
//   controls.csv           index, steering, throttle, label_steering,
//                          label_throttle (doubles printed with %.17g, so
//                          reloading reproduces the exact values)
//   frames/NNNNNN.ppm      the frame images the controller saw
// Writers are deterministic: the same episode saves to byte-identical files.

#ifndef LANEMON_RECORDING_HPP_
#define LANEMON_RECORDING_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lanemon/episode.hpp"

namespace lanemon::sim {

// What was done to the run: plain driving, a frame corruption switched on at
// onset_frame, or a deliberately mistrained controller.
struct RecordingCondition {
  enum Kind { kNominal, kAnomaly, kMutant };
  Kind kind = kNominal;

  // Anomaly runs.
  std::string corruption;  // corruption kind name, e.g. "fog"
  int severity = 0;        // 1..5
  int onset_frame = -1;

  // Mutant runs.
  std::string mutant_op = "";  // "HLR" | "TAN" | "TCL"
  double mutant_param = 0.0;
  int model_index = -1;

  bool positive() const { return kind != kNominal; }
  std::string label() const;  // e.g. "nominal", "anomaly-fog-3", "mutant-tcl-0.2-m01"

  static RecordingCondition nominal();
  static RecordingCondition anomaly(const std::string& corruption, int severity,
                                    int onset_frame);
  static RecordingCondition mutant(const std::string& op, double param,
                                   int model_index);
};

struct RecordingMeta {
  std::string id;          // directory leaf, unique within a dataset
  std::string circuit_id;
  int fps = 10;
  std::uint64_t seed = 0;
  RecordingCondition condition;
  int oob_frame = -1;  // -1 = vehicle never left the lane
  int n_frames = 0;
};

struct Recording {
  RecordingMeta meta;
  std::vector<img::Image> frames;  // what the controller saw
  std::vector<Controls> controls;  // executed commands
  std::vector<Controls> labels;    // clean reference commands
};

// Packages an episode result under the given identity. The out-of-bounds
// frame, when present, must be the episode's last frame (the runner stops
// there).
Recording make_recording(std::string id, std::string circuit_id,
                         std::uint64_t seed, RecordingCondition condition,
                         const EpisodeResult& ep);

void save_recording(const Recording& rec, const std::filesystem::path& dir);

// Loads a full recording; any missing or inconsistent piece (frame files,
// control rows) is an error.
Recording load_recording(const std::filesystem::path& dir);

// Loads just the manifest (cheap existence/summary queries).
RecordingMeta load_recording_meta(const std::filesystem::path& dir);

}  // namespace lanemon::sim

#endif  // LANEMON_RECORDING_HPP_
