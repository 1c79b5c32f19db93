// src/track.cpp
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

#include "lanemon/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lanemon/common.hpp"

namespace lanemon::sim {

using json = nlohmann::json;

void Turtle::straight(double len) {
  LANEMON_CHECK(len > 0, "straight length must be positive");
  int n = std::max(1, static_cast<int>(std::ceil(len / spacing_)));
  Eigen::Vector2d dir(std::cos(heading_), std::sin(heading_));
  for (int i = 1; i <= n; ++i)
    pts_.push_back(pos_ + dir * (len * i / n));
  pos_ = pts_.back();
}

void Turtle::arc(double radius, double angle) {
  LANEMON_CHECK(radius > 0 && angle != 0, "bad arc");
  double s = angle > 0 ? 1.0 : -1.0;
  Eigen::Vector2d center =
      pos_ + radius * s * Eigen::Vector2d(-std::sin(heading_), std::cos(heading_));
  int n = std::max(2, static_cast<int>(std::ceil(radius * std::fabs(angle) / spacing_)));
  for (int i = 1; i <= n; ++i) {
    double h = heading_ + angle * i / n;
    pts_.push_back(center + radius * s * Eigen::Vector2d(std::sin(h), -std::cos(h)));
  }
  pos_ = pts_.back();
  heading_ += angle;
}

std::vector<Eigen::Vector2d> Turtle::finish_loop(double tol) const {
  LANEMON_CHECK(pts_.size() >= 4, "degenerate loop");
  LANEMON_CHECK((pts_.back() - pts_.front()).norm() <= tol,
                "loop failed to close");
  std::vector<Eigen::Vector2d> out(pts_.begin(), pts_.end() - 1);
  return out;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Rectangular loop with an S-bend (right then left) in the middle of the two
// long legs, so the lap contains curves in both directions. Leg lengths are
// chosen so the lateral S-bend shifts cancel and the loop closes.
Track curvy_loop(const std::string& id, double a, double c, double rc,
                 double rs) {
  Track t;
  t.id = id;
  Turtle u({0, 0}, 0.0);
  auto leg = [&](double first) {
    u.straight(a);
    u.arc(rs, first * 2 * kPi / 6 * -1);  // 60 degrees toward first side
    u.arc(rs, first * 2 * kPi / 6);
    u.straight(a);
    u.arc(rc, kPi / 2);
  };
  // Bottom leg dips right, top leg (driving -x) dips right as well, which in
  // world coordinates cancels the bottom shift.
  leg(1.0);
  u.straight(c);
  u.arc(rc, kPi / 2);
  leg(1.0);
  u.straight(c);
  u.arc(rc, kPi / 2);
  t.center = u.finish_loop();
  return t;
}

Track rounded_rect(const std::string& id, double lx, double ly, double r) {
  Track t;
  t.id = id;
  Turtle u({0, 0}, 0.0);
  for (int i = 0; i < 2; ++i) {
    u.straight(i == 0 ? lx : lx);
    u.arc(r, kPi / 2);
    u.straight(ly);
    u.arc(r, kPi / 2);
  }
  t.center = u.finish_loop();
  return t;
}

}  // namespace

Track build_track(const std::string& id) {
  if (id == "circuit-1") {
    Track t = curvy_loop(id, 0.55, 0.9, 0.45, 0.45);
    return t;
  }
  if (id == "circuit-2") {
    Track t = rounded_rect(id, 1.6, 0.9, 0.55);
    t.dashed = true;
    t.dash_len = 0.15;
    t.gap_len = 0.15;
    t.inner_offset = 0.12;
    return t;
  }
  if (id == "train-1") {
    return curvy_loop(id, 0.5, 1.0, 0.5, 0.4);
  }
  if (id == "train-2") {
    Track t = rounded_rect(id, 1.3, 1.0, 0.6);
    t.dashed = true;
    t.dash_len = 0.18;
    t.gap_len = 0.12;
    t.inner_offset = 0.12;
    return t;
  }
  throw std::runtime_error("unknown track id: " + id);
}

std::vector<std::string> builtin_track_ids() {
  return {"circuit-1", "circuit-2", "train-1", "train-2"};
}

Track mirror_track(const Track& t) {
  Track m = t;
  m.id = t.id + "-mirror";
  for (auto& p : m.center) p.y() = -p.y();
  m.inner_offset = -t.inner_offset;
  return m;
}

std::string track_to_json(const Track& t) {
  json j;
  j["id"] = t.id;
  j["lane_half_width"] = t.lane_half_width;
  j["tape_half_width"] = t.tape_half_width;
  j["dashed"] = t.dashed;
  j["dash_len"] = t.dash_len;
  j["gap_len"] = t.gap_len;
  j["inner_offset"] = t.inner_offset;
  json pts = json::array();
  for (const auto& p : t.center) pts.push_back({p.x(), p.y()});
  j["center"] = pts;
  return j.dump(2) + "\n";
}

Track track_from_json(const std::string& text) {
  json j = json::parse(text);
  Track t;
  t.id = j.at("id").get<std::string>();
  t.lane_half_width = j.at("lane_half_width").get<double>();
  t.tape_half_width = j.at("tape_half_width").get<double>();
  t.dashed = j.at("dashed").get<bool>();
  t.dash_len = j.at("dash_len").get<double>();
  t.gap_len = j.at("gap_len").get<double>();
  t.inner_offset = j.at("inner_offset").get<double>();
  for (const auto& p : j.at("center"))
    t.center.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  LANEMON_CHECK(t.center.size() >= 4, "track too short");
  return t;
}

PolylineIndex::PolylineIndex(const std::vector<Eigen::Vector2d>& loop,
                             double cell)
    : cell_(cell) {
  size_t n = loop.size();
  LANEMON_CHECK(n >= 3, "polyline needs at least 3 points");
  a_.resize(n);
  ab_.resize(n);
  len2_.resize(n);
  len_.resize(n);
  cum_.resize(n);
  double acc = 0.0;
  double xmin = loop[0].x(), xmax = xmin, ymin = loop[0].y(), ymax = ymin;
  for (size_t i = 0; i < n; ++i) {
    a_[i] = loop[i];
    ab_[i] = loop[(i + 1) % n] - loop[i];
    len2_[i] = ab_[i].squaredNorm();
    LANEMON_CHECK(len2_[i] > 0, "zero-length segment");
    len_[i] = std::sqrt(len2_[i]);
    cum_[i] = acc;
    acc += len_[i];
    xmin = std::min(xmin, loop[i].x());
    xmax = std::max(xmax, loop[i].x());
    ymin = std::min(ymin, loop[i].y());
    ymax = std::max(ymax, loop[i].y());
  }
  total_len_ = acc;

  gx0_ = xmin - cell_;
  gy0_ = ymin - cell_;
  nx_ = static_cast<int>((xmax - gx0_) / cell_) + 2;
  ny_ = static_cast<int>((ymax - gy0_) / cell_) + 2;
  cells_.assign(static_cast<size_t>(nx_) * ny_, {});
  for (size_t i = 0; i < n; ++i) {
    Eigen::Vector2d b = a_[i] + ab_[i];
    int cx0 = static_cast<int>((std::min(a_[i].x(), b.x()) - gx0_) / cell_);
    int cx1 = static_cast<int>((std::max(a_[i].x(), b.x()) - gx0_) / cell_);
    int cy0 = static_cast<int>((std::min(a_[i].y(), b.y()) - gy0_) / cell_);
    int cy1 = static_cast<int>((std::max(a_[i].y(), b.y()) - gy0_) / cell_);
    for (int cy = std::max(0, cy0); cy <= std::min(ny_ - 1, cy1); ++cy)
      for (int cx = std::max(0, cx0); cx <= std::min(nx_ - 1, cx1); ++cx)
        cells_[static_cast<size_t>(cy) * nx_ + cx].push_back(static_cast<int>(i));
  }
  stamp_.assign(n, 0);
}

double PolylineIndex::seg_dist2(int i, const Eigen::Vector2d& p,
                                double* t_out) const {
  // All arithmetic here is sign-symmetric in y: mirrored inputs produce
  // bit-identical distances and parameters.
  double dx = p.x() - a_[i].x();
  double dy = p.y() - a_[i].y();
  double t = (dx * ab_[i].x() + dy * ab_[i].y()) / len2_[i];
  t = std::clamp(t, 0.0, 1.0);
  double ex = dx - t * ab_[i].x();
  double ey = dy - t * ab_[i].y();
  *t_out = t;
  return ex * ex + ey * ey;
}

PolylineIndex::Hit PolylineIndex::nearest_brute(const Eigen::Vector2d& p) const {
  Hit best;
  best.dist2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < segment_count(); ++i) {
    double t;
    double d2 = seg_dist2(i, p, &t);
    if (d2 < best.dist2) {
      best = {i, t, d2};
    }
  }
  return best;
}

PolylineIndex::Hit PolylineIndex::nearest_within(const Eigen::Vector2d& p,
                                                 double cutoff) const {
  Hit best;
  best.dist2 = std::numeric_limits<double>::infinity();
  double cutoff2 =
      cutoff == std::numeric_limits<double>::infinity() ? cutoff : cutoff * cutoff;

  if (++stamp_now_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    stamp_now_ = 1;
  }
  int px = std::clamp(static_cast<int>((p.x() - gx0_) / cell_), 0, nx_ - 1);
  int py = std::clamp(static_cast<int>((p.y() - gy0_) / cell_), 0, ny_ - 1);
  int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Any segment in a ring-r cell is at least (r-1) cells away; once that
    // bound beats both the best hit and the cutoff there is nothing left.
    double lb = (ring - 1) * cell_;
    if (ring >= 2) {
      double lb2 = lb * lb;
      if (lb2 > best.dist2) break;
      if (lb2 > cutoff2) break;
    }
    int x0 = px - ring, x1 = px + ring, y0 = py - ring, y1 = py + ring;
    auto scan_cell = [&](int cx, int cy) {
      if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) return;
      for (int si : cells_[static_cast<size_t>(cy) * nx_ + cx]) {
        if (stamp_[si] == stamp_now_) continue;
        stamp_[si] = stamp_now_;
        double t;
        double d2 = seg_dist2(si, p, &t);
        if (d2 < best.dist2 || (d2 == best.dist2 && si < best.segment)) {
          best = {si, t, d2};
        }
      }
    };
    if (ring == 0) {
      scan_cell(px, py);
    } else {
      for (int cx = x0; cx <= x1; ++cx) {
        scan_cell(cx, y0);
        scan_cell(cx, y1);
      }
      for (int cy = y0 + 1; cy <= y1 - 1; ++cy) {
        scan_cell(x0, cy);
        scan_cell(x1, cy);
      }
    }
  }
  if (best.segment >= 0 && cutoff2 != std::numeric_limits<double>::infinity() &&
      best.dist2 > cutoff2) {
    best.segment = -1;  // nothing within the cutoff
  }
  return best;
}

PolylineIndex::Hit PolylineIndex::nearest(const Eigen::Vector2d& p) const {
  return nearest_within(p, std::numeric_limits<double>::infinity());
}

double PolylineIndex::signed_distance_at(const Eigen::Vector2d& p,
                                         const Hit& h) const {
  double d = std::sqrt(h.dist2);
  // Left of travel is positive. cross(ab, ap) flips sign exactly under a
  // world mirror, so the sign convention mirrors too.
  double apx = p.x() - a_[h.segment].x();
  double apy = p.y() - a_[h.segment].y();
  double cross = ab_[h.segment].x() * apy - ab_[h.segment].y() * apx;
  return cross >= 0 ? d : -d;
}

double PolylineIndex::signed_distance(const Eigen::Vector2d& p, Hit* hit) const {
  Hit h = nearest(p);
  if (hit) *hit = h;
  return signed_distance_at(p, h);
}

double PolylineIndex::arclength_at(const Hit& h) const {
  return cum_[h.segment] + h.t * len_[h.segment];
}

Eigen::Vector2d PolylineIndex::point_at_arclength(double s) const {
  s = std::fmod(s, total_len_);
  if (s < 0) s += total_len_;
  // cum_ is sorted; find the segment containing s.
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  int i = static_cast<int>(it - cum_.begin()) - 1;
  if (i < 0) i = 0;
  double u = (s - cum_[i]) / len_[i];
  return a_[i] + u * ab_[i];
}

}  // namespace lanemon::sim
