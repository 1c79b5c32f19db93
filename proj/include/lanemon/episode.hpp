// lanemon/episode.hpp
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
// Closed-loop episode runner: render -> (optional input transform) ->
// controller -> vehicle step, with out-of-bounds and lap bookkeeping.

#ifndef LANEMON_EPISODE_HPP_
#define LANEMON_EPISODE_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "lanemon/driver.hpp"
#include "lanemon/render.hpp"

namespace lanemon::sim {

struct EpisodeOptions {
  int max_frames = 500;
  bool stop_on_lap = false;  // stop once forward progress covers one lap
  bool stop_on_oob = false;  // stop on the first out-of-bounds frame
  std::uint64_t seed = 0;    // drives start jitter and exploration noise

  // Start pose: arclength fraction of the lap plus jitter amplitudes.
  double start_frac = 0.0;
  double start_lateral_jitter = 0.0;   // uniform in +-value, meters
  double start_heading_jitter = 0.0;   // uniform in +-value, radians

  // Reference-driver exploration: a uniform steering offset in +-value,
  // redrawn every noise_hold frames. Executed controls get the offset; the
  // recorded labels stay clean.
  double drive_noise = 0.0;
  int noise_hold = 8;
};

struct FrameRecord {
  img::Image image;  // what the controller saw (after any transform)
  Controls executed;
  Controls label;  // clean reference command; equals executed for net drivers
  VehicleState state;
  double signed_dist = 0.0;
};

struct EpisodeResult {
  std::vector<FrameRecord> frames;
  int oob_frame = -1;
  bool lap_done = false;
  double progress = 0.0;  // forward arclength covered, meters
};

// Controller: image (+ frame index) -> controls.
using ControlFn = std::function<Controls(const img::Image&, int)>;
// Optional per-frame image transform (corruption hook).
using TransformFn = std::function<img::Image(img::Image&&, int)>;

// Runs the scripted reference driver. The controller input image is rendered
// and recorded but steering comes from pure pursuit on the true state.
EpisodeResult run_reference_episode(const RenderContext& ctx,
                                    const DriverParams& dp,
                                    const MotionParams& mp,
                                    const EpisodeOptions& opt);

// Runs an image controller (a trained net), optionally with an input
// transform applied before the controller sees the frame.
EpisodeResult run_controlled_episode(const RenderContext& ctx, ControlFn act,
                                     TransformFn transform,
                                     const MotionParams& mp,
                                     const EpisodeOptions& opt);

}  // namespace lanemon::sim

#endif  // LANEMON_EPISODE_HPP_
