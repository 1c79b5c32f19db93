// src/render.cpp
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

#include "lanemon/render.hpp"

#include <cmath>

namespace lanemon::sim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RenderContext::RenderContext(Track track, CameraParams cam, RenderStyle style)
    : track_(std::move(track)), index_(track_.center), cam_(cam), style_(style) {
  fx_ = (cam_.width / 2.0) / std::tan(cam_.hfov_deg * kPi / 360.0);
  double phi = cam_.pitch_deg * kPi / 180.0;
  cphi_ = std::cos(phi);
  sphi_ = std::sin(phi);
  paint_reach_ = track_.lane_half_width + track_.tape_half_width;
}

img::Image RenderContext::render(const VehicleState& s) const {
  img::Image im(cam_.width, cam_.height, 3);

  double ca, sa;
  sym_cos_sin(s.heading, &ca, &sa);

  // Orthonormal camera basis in world coordinates; y stays untouched by the
  // pitch so each component is either even or odd in the heading sign.
  double fxw = ca * cphi_, fyw = sa * cphi_, fzw = -sphi_;
  double rxw = sa, ryw = -ca, rzw = 0.0;
  double dxw = fyw * rzw - fzw * ryw;
  double dyw = fzw * rxw - fxw * rzw;
  double dzw = fxw * ryw - fyw * rxw;

  double camx = s.x + cam_.forward_m * ca;
  double camy = s.y + cam_.forward_m * sa;
  double camz = cam_.height_m;

  double cu = (cam_.width - 1) / 2.0;
  double cv = (cam_.height - 1) / 2.0;
  double dash_period = track_.dash_len + track_.gap_len;

  std::uint8_t* px = im.data.data();
  for (int v = 0; v < cam_.height; ++v) {
    double yn = (v - cv) / fx_;
    double bx = fxw + yn * dxw;
    double by = fyw + yn * dyw;
    double bz = fzw + yn * dzw;
    for (int u = 0; u < cam_.width; ++u, px += 3) {
      double xn = (u - cu) / fx_;
      double dirx = bx + xn * rxw;
      double diry = by + xn * ryw;
      double dirz = bz + xn * rzw;
      const std::uint8_t* color = style_.floor.data();
      if (dirz >= 0.0) {
        color = style_.sky.data();
      } else {
        double t = -camz / dirz;
        if (t <= cam_.range_m) {
          Eigen::Vector2d g(camx + t * dirx, camy + t * diry);
          PolylineIndex::Hit hit = index_.nearest_within(g, paint_reach_);
          if (hit.segment >= 0) {
            double sd = index_.signed_distance_at(g, hit);
            double ad = std::fabs(sd);
            bool on_boundary =
                std::fabs(ad - track_.lane_half_width) <= track_.tape_half_width;
            if (on_boundary && track_.dashed) {
              double arc = index_.arclength_at(hit);
              on_boundary = std::fmod(arc, dash_period) < track_.dash_len;
            }
            bool on_inner =
                track_.inner_offset != 0.0 &&
                std::fabs(sd - track_.inner_offset) <= track_.tape_half_width;
            if (on_boundary || on_inner) color = style_.tape.data();
          }
        }
      }
      px[0] = color[0];
      px[1] = color[1];
      px[2] = color[2];
    }
  }
  return im;
}

}  // namespace lanemon::sim
