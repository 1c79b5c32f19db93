// lanemon/track.hpp
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
// Closed-loop tape tracks on a flat floor. A track is a sampled centerline
// polyline plus lane styling; boundary tape sits at +-lane_half_width from
// the centerline and an optional guide line at a signed inner offset.

#ifndef LANEMON_TRACK_HPP_
#define LANEMON_TRACK_HPP_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lanemon::sim {

struct Track {
  std::string id;
  // Closed loop; segment i runs center[i] -> center[(i+1) % n].
  std::vector<Eigen::Vector2d> center;
  double lane_half_width = 0.3;
  double tape_half_width = 0.025;
  bool dashed = false;          // boundary tape style
  double dash_len = 0.15;
  double gap_len = 0.15;
  // Signed offset of an extra solid guide line from the centerline
  // (positive = left of travel). 0 disables it.
  double inner_offset = 0.0;
};

// Incremental path builder. Headings in radians, 0 = +x, left turns positive.
class Turtle {
 public:
  Turtle(Eigen::Vector2d start, double heading, double spacing = 0.15)
      : pos_(start), heading_(heading), spacing_(spacing) {
    pts_.push_back(pos_);
  }
  void straight(double len);
  // angle > 0 turns left. The arc is sampled at roughly `spacing_` steps.
  void arc(double radius, double angle);

  const std::vector<Eigen::Vector2d>& points() const { return pts_; }
  Eigen::Vector2d position() const { return pos_; }
  double heading() const { return heading_; }

  // Drops the final point (expected to coincide with the start) and verifies
  // the loop actually closed.
  std::vector<Eigen::Vector2d> finish_loop(double tol = 1e-6) const;

 private:
  Eigen::Vector2d pos_;
  double heading_;
  double spacing_;
  std::vector<Eigen::Vector2d> pts_;
};

// Built-in layouts. Lap lengths are all in the 8..9 m range so a recording
// at walking-pace speeds stays a few hundred frames.
Track build_track(const std::string& id);
std::vector<std::string> builtin_track_ids();

// World mirror across the x axis: waypoint y negated (same order), signed
// inner offset negated, everything else kept.
Track mirror_track(const Track& t);

std::string track_to_json(const Track& t);
Track track_from_json(const std::string& text);

// Exact nearest-segment queries over a closed polyline, grid-accelerated.
// The grid only prefilters candidates: rings of cells are scanned outward
// until their lower distance bound exceeds the best hit, so the answer is
// always the true nearest segment (ties break toward the lower index).
class PolylineIndex {
 public:
  explicit PolylineIndex(const std::vector<Eigen::Vector2d>& loop,
                         double cell = 0.25);

  struct Hit {
    int segment = -1;
    double t = 0.0;      // clamped parameter along the segment
    double dist2 = 0.0;  // squared distance
  };

  Hit nearest(const Eigen::Vector2d& p) const;
  Hit nearest_brute(const Eigen::Vector2d& p) const;

  // Nearest hit, but gives up early once the distance provably exceeds
  // `cutoff`; returns segment -1 in that case. Saves work for pixels far
  // from any painted line.
  Hit nearest_within(const Eigen::Vector2d& p, double cutoff) const;

  // Positive when p lies left of the travel direction of its nearest segment.
  double signed_distance(const Eigen::Vector2d& p, Hit* hit = nullptr) const;

  // Same sign convention, for a hit already computed.
  double signed_distance_at(const Eigen::Vector2d& p, const Hit& h) const;

  double arclength_at(const Hit& h) const;
  double total_length() const { return total_len_; }
  Eigen::Vector2d point_at_arclength(double s) const;  // wraps
  int segment_count() const { return static_cast<int>(a_.size()); }

 private:
  double seg_dist2(int i, const Eigen::Vector2d& p, double* t_out) const;

  std::vector<Eigen::Vector2d> a_, ab_;  // segment start, start->end
  std::vector<double> len2_, len_, cum_;  // per segment; cum_[i] = length before i
  double total_len_ = 0.0;

  double cell_;
  double gx0_ = 0.0, gy0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<int>> cells_;
  mutable std::vector<std::uint32_t> stamp_;
  mutable std::uint32_t stamp_now_ = 0;
};

}  // namespace lanemon::sim

#endif  // LANEMON_TRACK_HPP_
