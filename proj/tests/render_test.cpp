// tests/render_test.cpp
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

#include <doctest.h>

#include <cmath>

#include "lanemon/driver.hpp"
#include "lanemon/episode.hpp"
#include "lanemon/imgops.hpp"
#include "lanemon/render.hpp"
#include "lanemon/rng.hpp"

using namespace lanemon::sim;
using lanemon::SplitMix64;

TEST_SUITE("render") {

TEST_CASE("sym_cos_sin is exactly even/odd") {
  SplitMix64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    double a = rng.uniform(-30.0, 30.0);
    double c1, s1, c2, s2;
    sym_cos_sin(a, &c1, &s1);
    sym_cos_sin(-a, &c2, &s2);
    CHECK(c1 == c2);
    CHECK(s1 == -s2);
  }
}

TEST_CASE("render shows floor and tape with the horizon above the frame") {
  RenderContext ctx(build_track("circuit-1"));
  VehicleState s = start_pose(ctx.index(), 0.1);
  lanemon::img::Image im = ctx.render(s);
  REQUIRE(im.width == 160);
  REQUIRE(im.height == 120);
  RenderStyle style;
  int sky = 0, floor = 0, tape = 0;
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width; ++x) {
      std::uint8_t r = im.at(y, x, 0);
      if (r == style.sky[0]) ++sky;
      else if (r == style.floor[0]) ++floor;
      else if (r == style.tape[0]) ++tape;
    }
  CHECK(sky + floor + tape == im.width * im.height);
  // The camera is pitched down 25 degrees and the half vertical FOV is
  // atan(59.5 / fx) ~= 23.25 degrees, so even the top row looks below the
  // horizon: a level camera over a flat floor never images sky.
  CHECK(sky == 0);
  CHECK(floor > 4000);
  CHECK(tape > 300);
  // Tape appears ahead of the vehicle: both boundary lines cross the last row.
  int last_row_tape = 0;
  for (int x = 0; x < im.width; ++x)
    if (im.at(im.height - 1, x, 0) == style.tape[0]) ++last_row_tape;
  CHECK(last_row_tape == 0);  // boundaries are 0.3 m out, beyond the last row
  int mid_row_tape = 0;
  for (int x = 0; x < im.width; ++x)
    if (im.at(im.height / 3, x, 0) == style.tape[0]) ++mid_row_tape;
  CHECK(mid_row_tape > 0);
}

TEST_CASE("mirrored world renders as the flipped image, bit for bit") {
  for (const char* id : {"circuit-1", "circuit-2", "train-2"}) {
    CAPTURE(id);
    Track t = build_track(id);
    RenderContext ctx(t);
    RenderContext mctx(mirror_track(t));
    SplitMix64 rng(lanemon::fnv1a64(id) ^ 0x5eed);
    for (int k = 0; k < 12; ++k) {
      double frac = rng.uniform();
      VehicleState s = start_pose(ctx.index(), frac * ctx.index().total_length(),
                                  rng.uniform(-0.2, 0.2), rng.uniform(-0.5, 0.5));
      VehicleState ms{s.x, -s.y, -s.heading, s.speed};
      lanemon::img::Image a = lanemon::img::flip_horizontal(ctx.render(s));
      lanemon::img::Image b = mctx.render(ms);
      CHECK(a == b);
    }
  }
}

TEST_CASE("dashed boundaries paint strictly less tape than solid ones") {
  // Same geometry twice: once with the dash pattern, once forced solid, and
  // no inner line in either, so the dashed image paints a strict subset.
  Track dashed = build_track("circuit-2");
  dashed.inner_offset = 0.0;
  Track solid = dashed;
  solid.dashed = false;
  RenderContext cd(dashed), cs(solid);
  RenderStyle style;
  auto tape_count = [&](const RenderContext& ctx) {
    VehicleState s = start_pose(ctx.index(), 0.2);
    lanemon::img::Image im = ctx.render(s);
    int n = 0;
    for (int y = 0; y < im.height; ++y)
      for (int x = 0; x < im.width; ++x)
        if (im.at(y, x, 2) == style.tape[2]) ++n;
    return n;
  };
  int ns = tape_count(cs);
  int nd = tape_count(cd);
  CHECK(ns > 0);
  CHECK(nd > 0);
  CHECK(nd < ns);
}

TEST_CASE("inner guide line appears on tracks that define one") {
  Track t = build_track("circuit-2");
  RenderContext with(t);
  Track bare = t;
  bare.inner_offset = 0.0;
  RenderContext without(bare);
  RenderStyle style;
  VehicleState s = start_pose(with.index(), 0.15);
  auto count_tape = [&](const lanemon::img::Image& im) {
    int n = 0;
    for (int y = 0; y < im.height; ++y)
      for (int x = 0; x < im.width; ++x)
        if (im.at(y, x, 2) == style.tape[2]) ++n;
    return n;
  };
  CHECK(count_tape(with.render(s)) > count_tape(without.render(s)));
}

TEST_CASE("vehicle step integrates heading before position") {
  VehicleState s;
  MotionParams mp;
  Controls c{1.0, 1.0};
  VehicleState n = step_vehicle(s, c, mp);
  CHECK(n.speed == doctest::Approx(0.4));
  CHECK(n.heading == doctest::Approx(0.15));
  CHECK(n.x == doctest::Approx(0.4 * std::cos(0.15) * 0.1));
  CHECK(n.y == doctest::Approx(0.4 * std::sin(0.15) * 0.1));
}

TEST_CASE("pure pursuit keeps the reference driver in lane for a lap") {
  for (const auto& id : builtin_track_ids()) {
    CAPTURE(id);
    RenderContext ctx(build_track(id));
    EpisodeOptions opt;
    opt.max_frames = 700;
    opt.stop_on_lap = true;
    opt.seed = 3;
    EpisodeResult res = run_reference_episode(ctx, {}, {}, opt);
    CHECK(res.lap_done);
    CHECK(res.oob_frame == -1);
    double worst = 0;
    for (const auto& f : res.frames)
      worst = std::max(worst, std::fabs(f.signed_dist));
    CHECK(worst < 0.15);
  }
}

TEST_CASE("reference episode with exploration noise stays in lane") {
  RenderContext ctx(build_track("train-1"));
  EpisodeOptions opt;
  opt.max_frames = 700;
  opt.stop_on_lap = true;
  opt.seed = 9;
  opt.drive_noise = 0.3;
  opt.start_lateral_jitter = 0.05;
  opt.start_heading_jitter = 0.15;
  EpisodeResult res = run_reference_episode(ctx, {}, {}, opt);
  CHECK(res.lap_done);
  CHECK(res.oob_frame == -1);
  // Noise must actually move the executed steering away from the label.
  int differs = 0;
  for (const auto& f : res.frames)
    if (f.executed.steering != f.label.steering) ++differs;
  CHECK(differs > static_cast<int>(res.frames.size()) / 2);
}

TEST_CASE("stop_on_oob halts an episode that drives straight off") {
  RenderContext ctx(build_track("circuit-1"));
  EpisodeOptions opt;
  opt.max_frames = 200;
  opt.stop_on_oob = true;
  auto act = [](const lanemon::img::Image&, int) {
    return Controls{0.0, 1.0};  // full throttle, no steering
  };
  EpisodeResult res = run_controlled_episode(ctx, act, nullptr, {}, opt);
  CHECK(res.oob_frame >= 0);
  CHECK(static_cast<int>(res.frames.size()) == res.oob_frame + 1);
}

}  // TEST_SUITE
