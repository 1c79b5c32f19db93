// lanemon/render.hpp
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
// Forward-facing pinhole camera over a flat floor. Each pixel ray is
// intersected with the ground plane and colored from the track's painted
// lines; no anti-aliasing, no lighting. Rendering a mirrored track from the
// mirrored pose gives exactly the horizontally flipped image: all per-pixel
// arithmetic is sign-symmetric in world y, trig of the vehicle heading is
// forced even/odd via fabs+copysign, and the nearest-segment search is exact.

#ifndef LANEMON_RENDER_HPP_
#define LANEMON_RENDER_HPP_

#include <array>
#include <cmath>
#include <cstdint>

#include "lanemon/image.hpp"
#include "lanemon/track.hpp"

namespace lanemon::sim {

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, 0 = +x, counterclockwise positive
  double speed = 0.0;    // m/s
};

struct CameraParams {
  int width = 160;
  int height = 120;
  double hfov_deg = 60.0;
  double height_m = 0.2;
  double pitch_deg = 25.0;  // downward
  double forward_m = 0.09;  // camera ahead of the vehicle reference point
  double range_m = 12.0;    // ground beyond this renders as bare floor
};

struct RenderStyle {
  std::array<std::uint8_t, 3> floor{205, 205, 208};
  std::array<std::uint8_t, 3> tape{25, 60, 180};
  std::array<std::uint8_t, 3> sky{186, 214, 239};
};

// Owns the track copy and its spatial index. Not safe for concurrent use;
// give each worker thread its own context.
class RenderContext {
 public:
  explicit RenderContext(Track track, CameraParams cam = {},
                         RenderStyle style = {});

  img::Image render(const VehicleState& s) const;

  const Track& track() const { return track_; }
  const PolylineIndex& index() const { return index_; }
  const CameraParams& camera() const { return cam_; }

 private:
  Track track_;
  PolylineIndex index_;
  CameraParams cam_;
  RenderStyle style_;
  double fx_;           // focal length in pixels
  double cphi_, sphi_;  // pitch terms
  double paint_reach_;  // centerline distance beyond which nothing is painted
};

// cos/sin of an angle computed so that cos(-a) and sin(-a) are bitwise the
// even/odd images of cos(a)/sin(a), independent of libm internals. The sign
// convention (sin carries the sign of the angle) matches the true sine only
// for angles in [-pi, pi]; keep headings wrapped with wrap_angle.
inline void sym_cos_sin(double a, double* c, double* s) {
  double m = std::fabs(a);
  *c = std::cos(m);
  *s = std::copysign(std::sin(m), a);
}

// Wraps an angle no farther than one turn outside (-pi, pi] back into range.
// Exactly odd: wrap_angle(-a) == -wrap_angle(a) bit for bit, because IEEE
// rounding commutes with negation.
inline double wrap_angle(double a) {
  constexpr double kPi = 3.14159265358979323846;
  if (a > kPi) return a - 2.0 * kPi;
  if (a < -kPi) return a + 2.0 * kPi;
  return a;
}

}  // namespace lanemon::sim

#endif  // LANEMON_RENDER_HPP_
