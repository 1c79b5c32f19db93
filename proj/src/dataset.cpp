// lanemon/dataset.cpp
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

#include "lanemon/dataset.hpp"

#include "lanemon/common.hpp"
#include "lanemon/episode.hpp"
#include "lanemon/rng.hpp"
#include "lanemon/track.hpp"

namespace lanemon::sim {

nn::ImageDataset collect_dataset(const CollectConfig& cfg) {
  LANEMON_CHECK(!cfg.tracks.empty(), "no tracks to collect from");
  LANEMON_CHECK(cfg.episodes_per_track > 0 && cfg.max_frames > 0 &&
                    cfg.stride > 0,
                "collection sizes must be positive");

  CameraParams cam;
  cam.width = cfg.cam_w;
  cam.height = cfg.cam_h;

  nn::ImageDataset ds;
  for (const std::string& track_id : cfg.tracks) {
    const RenderContext ctx(build_track(track_id), cam);
    for (int e = 0; e < cfg.episodes_per_track; ++e) {
      EpisodeOptions opt;
      opt.max_frames = cfg.max_frames;
      opt.seed = derive_seed(cfg.seed, track_id, static_cast<std::uint64_t>(e));
      opt.start_frac = (e + 0.5) / cfg.episodes_per_track;
      opt.start_lateral_jitter = cfg.start_lateral_jitter;
      opt.start_heading_jitter = cfg.start_heading_jitter;
      opt.drive_noise = cfg.drive_noise;
      EpisodeResult ep =
          run_reference_episode(ctx, DriverParams{}, MotionParams{}, opt);
      for (size_t i = 0; i < ep.frames.size(); i += cfg.stride) {
        FrameRecord& f = ep.frames[i];
        if (ds.images.empty()) {
          ds.in_ch = f.image.channels;
          ds.in_h = f.image.height;
          ds.in_w = f.image.width;
        }
        ds.targets.push_back({static_cast<float>(f.label.steering),
                              static_cast<float>(f.label.throttle)});
        ds.images.push_back(std::move(f.image));
      }
    }
  }
  LANEMON_CHECK(!ds.images.empty(), "collection produced no frames");
  return ds;
}

}  // namespace lanemon::sim
