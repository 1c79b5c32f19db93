// src/episode.cpp
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

#include "lanemon/episode.hpp"

#include <cmath>

#include "lanemon/rng.hpp"

namespace lanemon::sim {

namespace {

// Shared episode loop; `label_fn` computes the clean reference command when
// the reference driver paces the episode, null otherwise.
EpisodeResult run_loop(const RenderContext& ctx, const EpisodeOptions& opt,
                       const MotionParams& mp, TransformFn transform,
                       std::function<Controls(const VehicleState&)> label_fn,
                       ControlFn act) {
  const PolylineIndex& index = ctx.index();
  SplitMix64 start_rng(derive_seed(opt.seed, "start"));
  double lat = opt.start_lateral_jitter == 0.0
                   ? 0.0
                   : start_rng.uniform(-opt.start_lateral_jitter,
                                       opt.start_lateral_jitter);
  double dh = opt.start_heading_jitter == 0.0
                  ? 0.0
                  : start_rng.uniform(-opt.start_heading_jitter,
                                      opt.start_heading_jitter);
  VehicleState st =
      start_pose(index, opt.start_frac * index.total_length(), lat, dh);

  SplitMix64 noise_rng(derive_seed(opt.seed, "noise"));
  double noise_offset = 0.0;

  EpisodeResult res;
  res.frames.reserve(static_cast<size_t>(opt.max_frames));

  PolylineIndex::Hit hit = index.nearest({st.x, st.y});
  double prev_arc = index.arclength_at(hit);
  double lap_len = index.total_length();

  for (int f = 0; f < opt.max_frames; ++f) {
    img::Image frame = ctx.render(st);
    if (transform) frame = transform(std::move(frame), f);

    FrameRecord rec;
    rec.state = st;
    rec.signed_dist = index.signed_distance({st.x, st.y});

    if (label_fn) {
      rec.label = label_fn(st);
      if (opt.drive_noise > 0.0) {
        if (f % std::max(1, opt.noise_hold) == 0)
          noise_offset = noise_rng.uniform(-opt.drive_noise, opt.drive_noise);
        rec.executed.steering =
            std::clamp(rec.label.steering + noise_offset, -1.0, 1.0);
        rec.executed.throttle = rec.label.throttle;
      } else {
        rec.executed = rec.label;
      }
    } else {
      rec.executed = act(frame, f);
      rec.label = rec.executed;
    }
    rec.image = std::move(frame);

    bool oob = std::fabs(rec.signed_dist) > ctx.track().lane_half_width;
    if (oob && res.oob_frame < 0) res.oob_frame = f;

    res.frames.push_back(std::move(rec));

    if (oob && opt.stop_on_oob) break;

    st = step_vehicle(st, res.frames.back().executed, mp);

    // Forward progress for lap completion, wrap-aware.
    hit = index.nearest({st.x, st.y});
    double arc = index.arclength_at(hit);
    double d = arc - prev_arc;
    if (d > lap_len / 2) d -= lap_len;
    if (d < -lap_len / 2) d += lap_len;
    res.progress += d;
    prev_arc = arc;
    if (opt.stop_on_lap && res.progress >= lap_len) {
      res.lap_done = true;
      break;
    }
  }
  return res;
}

}  // namespace

EpisodeResult run_reference_episode(const RenderContext& ctx,
                                    const DriverParams& dp,
                                    const MotionParams& mp,
                                    const EpisodeOptions& opt) {
  const PolylineIndex& index = ctx.index();
  auto label_fn = [&](const VehicleState& st) {
    return pure_pursuit(index, st, dp, mp);
  };
  return run_loop(ctx, opt, mp, nullptr, label_fn, nullptr);
}

EpisodeResult run_controlled_episode(const RenderContext& ctx, ControlFn act,
                                     TransformFn transform,
                                     const MotionParams& mp,
                                     const EpisodeOptions& opt) {
  return run_loop(ctx, opt, mp, std::move(transform), nullptr, std::move(act));
}

}  // namespace lanemon::sim
