// src/driver.cpp
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

#include "lanemon/driver.hpp"

#include <algorithm>
#include <cmath>

namespace lanemon::sim {

VehicleState step_vehicle(const VehicleState& s, const Controls& c,
                          const MotionParams& mp) {
  VehicleState n = s;
  double steering = std::clamp(c.steering, -1.0, 1.0);
  double throttle = std::clamp(c.throttle, 0.0, 1.0);
  n.speed = throttle * mp.speed_gain;
  n.heading = wrap_angle(s.heading + steering * mp.steer_rate * mp.dt);
  double ca, sa;
  sym_cos_sin(n.heading, &ca, &sa);
  n.x = s.x + n.speed * ca * mp.dt;
  n.y = s.y + n.speed * sa * mp.dt;
  return n;
}

Controls pure_pursuit(const PolylineIndex& index, const VehicleState& s,
                      const DriverParams& dp, const MotionParams& mp) {
  PolylineIndex::Hit hit = index.nearest({s.x, s.y});
  double s0 = index.arclength_at(hit);
  Eigen::Vector2d target = index.point_at_arclength(s0 + dp.lookahead);

  double ca, sa;
  sym_cos_sin(s.heading, &ca, &sa);
  double dx = target.x() - s.x;
  double dy = target.y() - s.y;
  double tx = ca * dx + sa * dy;   // target in vehicle frame
  double ty = -sa * dx + ca * dy;
  double alpha = std::atan2(ty, tx);
  double kappa = 2.0 * std::sin(alpha) / dp.lookahead;

  Controls c;
  c.throttle =
      std::clamp(1.0 - dp.curve_slowdown * std::fabs(kappa), dp.min_throttle, 1.0);
  double v = c.throttle * mp.speed_gain;
  c.steering = std::clamp(v * kappa / mp.steer_rate, -1.0, 1.0);
  return c;
}

VehicleState start_pose(const PolylineIndex& index, double s0, double lateral,
                        double heading_offset) {
  Eigen::Vector2d p = index.point_at_arclength(s0);
  // Heading from a short chord around s0.
  Eigen::Vector2d q = index.point_at_arclength(s0 + 0.05);
  double h = std::atan2(q.y() - p.y(), q.x() - p.x());
  VehicleState st;
  // Lateral offset along the left normal.
  st.x = p.x() - lateral * std::sin(h);
  st.y = p.y() + lateral * std::cos(h);
  st.heading = wrap_angle(h + heading_offset);
  st.speed = 0.0;
  return st;
}

}  // namespace lanemon::sim
