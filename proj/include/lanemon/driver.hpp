// lanemon/driver.hpp
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
// Vehicle motion model and the scripted pure-pursuit driver used to label
// training data and to pace calibration laps.

#ifndef LANEMON_DRIVER_HPP_
#define LANEMON_DRIVER_HPP_

#include "lanemon/render.hpp"
#include "lanemon/track.hpp"

namespace lanemon::sim {

// Normalized actuation: steering in [-1, 1] (positive turns left),
// throttle in [0, 1].
struct Controls {
  double steering = 0.0;
  double throttle = 0.0;
};

struct MotionParams {
  double dt = 0.1;          // 10 Hz control loop
  double speed_gain = 0.4;  // m/s at full throttle
  double steer_rate = 1.5;  // rad/s at full steering deflection
};

// Differential-drive update: speed follows throttle within one tick, heading
// integrates the steering rate, and position integrates with the updated
// heading (semi-implicit Euler).
VehicleState step_vehicle(const VehicleState& s, const Controls& c,
                          const MotionParams& mp = {});

struct DriverParams {
  double lookahead = 0.5;       // m along the centerline
  double curve_slowdown = 0.12; // throttle drop per unit curvature
  double min_throttle = 0.5;
};

// Pure pursuit toward a fixed-arclength lookahead point on the centerline.
Controls pure_pursuit(const PolylineIndex& index, const VehicleState& s,
                      const DriverParams& dp = {},
                      const MotionParams& mp = {});

// Pose on the centerline at arclength s0, nudged laterally/rotationally.
VehicleState start_pose(const PolylineIndex& index, double s0,
                        double lateral = 0.0, double heading_offset = 0.0);

}  // namespace lanemon::sim

#endif  // LANEMON_DRIVER_HPP_
