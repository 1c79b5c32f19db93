// lanemon/dataset.hpp
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
// Behavioral-cloning data collection: rendered camera frames labeled with
// the reference driver's clean commands. Episodes start at staggered points
// around each lap and carry exploration noise on the executed steering, so
// the collected frames include recovery situations while the labels stay
// clean.

#ifndef LANEMON_DATASET_HPP_
#define LANEMON_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lanemon/nn.hpp"

namespace lanemon::sim {

struct CollectConfig {
  std::vector<std::string> tracks = {"circuit-1", "circuit-2", "train-1",
                                     "train-2"};
  int cam_h = 120, cam_w = 160;  // rendered frame size
  int episodes_per_track = 2;
  int max_frames = 300;  // per episode
  int stride = 1;        // keep every stride-th frame
  double drive_noise = 0.1;
  double start_lateral_jitter = 0.05;
  double start_heading_jitter = 0.08;
  std::uint64_t seed = 1;
};

// Deterministic under cfg.seed. Episode e on track t starts at lap fraction
// (e + 0.5) / episodes_per_track with seeded jitter, so the frames cover the
// whole course.
nn::ImageDataset collect_dataset(const CollectConfig& cfg);

}  // namespace lanemon::sim

#endif  // LANEMON_DATASET_HPP_
