// tests/monitor_test.cpp
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

#include "lanemon/monitor.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "lanemon/imgops.hpp"
#include "lanemon/rng.hpp"

namespace fs = std::filesystem;
using namespace lanemon;
using namespace lanemon::monitor;

namespace {

img::Image textured_image(int w, int h, std::uint64_t seed) {
  img::Image im(w, h, 3);
  SplitMix64 rng(seed);
  for (std::uint8_t& b : im.data)
    b = static_cast<std::uint8_t>(rng.below(256));
  return im;
}

// Steering from the left/right brightness imbalance; mirroring the image
// negates the output exactly, so this controller is mirror-equivariant.
Controls imbalance_controller(const img::Image& im) {
  double left = 0.0, right = 0.0;
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width / 2; ++x)
      for (int c = 0; c < 3; ++c) {
        left += im.at(y, x, c);
        right += im.at(y, im.width - 1 - x, c);
      }
  const double span =
      255.0 * 3.0 * im.height * (im.width / 2);
  return {(left - right) / span, 0.5};
}

const MRDef& mr_by_id(const std::string& id) {
  for (const MRDef& mr : builtin_mrs())
    if (mr.id == id) return mr;
  REQUIRE(false);
  throw std::logic_error("unreachable");
}

sim::Recording tiny_recording(int frames, std::uint64_t seed) {
  sim::Recording rec;
  rec.meta.id = "tiny";
  rec.meta.circuit_id = "circuit-1";
  rec.meta.seed = seed;
  rec.meta.n_frames = frames;
  for (int i = 0; i < frames; ++i) {
    rec.frames.push_back(textured_image(24, 18, derive_seed(seed, "f", i)));
    rec.controls.push_back({0.0, 0.5});
    rec.labels.push_back({0.0, 0.5});
  }
  return rec;
}

}  // namespace

TEST_SUITE("monitor") {

TEST_CASE("the built-in check table is exactly the advertised five") {
  const auto& mrs = builtin_mrs();
  REQUIRE(mrs.size() == 5);
  std::set<std::string> ids;
  for (const MRDef& mr : mrs) ids.insert(mr.id);
  CHECK(ids == std::set<std::string>{"MR1", "MR2", "MR3", "MR4", "MR5"});
  for (const MRDef& mr : mrs) {
    CHECK(mr.stochastic == (mr.id == "MR3"));
    CHECK(mr.negate_steering == (mr.id == "MR5"));
  }
}

TEST_CASE("transforms delegate to the image operations") {
  img::Image im = textured_image(30, 22, 404);
  CHECK(mr_by_id("MR1").transform(im, 0) == img::reduce_brightness(im, 77));
  CHECK(mr_by_id("MR2").transform(im, 0) == img::set_saturation(im, 50));
  CHECK(mr_by_id("MR3").transform(im, 9) == img::add_uniform_noise(im, 0.2, 9));
  CHECK(mr_by_id("MR3").transform(im, 9) != mr_by_id("MR3").transform(im, 10));
  CHECK(mr_by_id("MR4").transform(im, 0) == img::box_blur(im, 5, 1));
  CHECK(mr_by_id("MR5").transform(im, 0) == img::flip_horizontal(im));
}

TEST_CASE("uncertainty is the gap to the expected follow-up steering") {
  CHECK(mr_uncertainty(mr_by_id("MR1"), {0.3, 1.0}, {0.3, 0.2}) == 0.0);
  CHECK(mr_uncertainty(mr_by_id("MR1"), {0.3, 1.0}, {0.1, 1.0}) ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(mr_uncertainty(mr_by_id("MR5"), {0.4, 1.0}, {-0.4, 1.0}) == 0.0);
  CHECK(mr_uncertainty(mr_by_id("MR5"), {0.4, 1.0}, {0.1, 1.0}) == 0.5);
  // Throttle never enters the score.
  CHECK(mr_uncertainty(mr_by_id("MR2"), {0.0, 1.0}, {0.0, 0.0}) == 0.0);
}

TEST_CASE("one step costs one source call plus one per check") {
  img::Image im = textured_image(26, 20, 7);
  int calls = 0;
  Controller counting = [&calls](const img::Image& frame) {
    ++calls;
    return imbalance_controller(frame);
  };

  MonitorStepResult res = monitor_step(builtin_mrs(), counting, im, 11);
  CHECK(calls == 6);
  REQUIRE(res.raw_scores.size() == 5);

  SUBCASE("a shorter check list costs proportionally less") {
    calls = 0;
    std::vector<MRDef> two = {mr_by_id("MR1"), mr_by_id("MR5")};
    monitor_step(two, counting, im, 11);
    CHECK(calls == 3);
    calls = 0;
    monitor_step({}, counting, im, 11);
    CHECK(calls == 1);
  }
  SUBCASE("the actuated control is the untouched source answer") {
    Controls direct = imbalance_controller(im);
    CHECK(res.control.steering == direct.steering);
    CHECK(res.control.throttle == direct.throttle);
  }
  SUBCASE("fixed seed reproduces every score; the noise check follows it") {
    MonitorStepResult again = monitor_step(builtin_mrs(), counting, im, 11);
    CHECK(again.raw_scores == res.raw_scores);
    MonitorStepResult other = monitor_step(builtin_mrs(), counting, im, 12);
    for (size_t m = 0; m < 5; ++m) {
      if (builtin_mrs()[m].stochastic)
        CHECK(other.raw_scores[m] != res.raw_scores[m]);
      else
        CHECK(other.raw_scores[m] == res.raw_scores[m]);
    }
  }
}

TEST_CASE("constant controllers score zero except against the mirror check") {
  img::Image im = textured_image(26, 20, 8);
  Controller constant = [](const img::Image&) { return Controls{0.37, 0.9}; };
  MonitorStepResult res = monitor_step(builtin_mrs(), constant, im, 3);
  for (size_t m = 0; m < 5; ++m) {
    if (builtin_mrs()[m].id == "MR5")
      CHECK(res.raw_scores[m] == 0.74);
    else
      CHECK(res.raw_scores[m] == 0.0);
  }
}

TEST_CASE("a mirror-equivariant controller passes the mirror check on a symmetric frame") {
  // Symmetric frame: pixel value depends on the distance to the middle.
  img::Image im(32, 16, 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c)
        im.at(y, x, c) =
            static_cast<std::uint8_t>((std::min(x, 31 - x) * 13 + y + 40 * c) %
                                      256);
  CHECK(im == img::flip_horizontal(im));
  std::vector<MRDef> just_mirror = {mr_by_id("MR5")};
  MonitorStepResult res =
      monitor_step(just_mirror, imbalance_controller, im, 0);
  CHECK(res.raw_scores[0] == 0.0);
}

TEST_CASE("history filter matches the hand-computed weighted sums") {
  SUBCASE("zeros map to zeros") {
    std::vector<double> z(40, 0.0);
    auto s = ar_smooth(z, 10);
    REQUIRE(s.size() == 40);
    for (double v : s) CHECK(v == 0.0);
  }
  SUBCASE("constant input saturates at the harmonic sum") {
    std::vector<double> ones(25, 1.0);
    auto s = ar_smooth(ones, 10);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 1.0);
    CHECK(s[2] == 1.5);
    for (int t = 10; t < 25; ++t)
      CHECK(s[t] == doctest::Approx(2.9289682539682538).epsilon(1e-12));
  }
  SUBCASE("a single spike decays as its reciprocal distance") {
    std::vector<double> raw = {2.0, 0.0, 0.0, 0.0};
    auto s = ar_smooth(raw, 10);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 2.0);
    CHECK(s[2] == 1.0);
    CHECK(s[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("history length one is a one-frame delay") {
    std::vector<double> raw = {0.3, 0.7, 0.1, 0.9};
    auto s = ar_smooth(raw, 1);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.3);
    CHECK(s[2] == 0.7);
    CHECK(s[3] == 0.1);
  }
  SUBCASE("the filter is linear") {
    SplitMix64 rng(606);
    std::vector<double> x(60), y(60), mix(60);
    const double a = 1.7, b = -0.4;
    for (int i = 0; i < 60; ++i) {
      x[i] = rng.uniform(0.0, 2.0);
      y[i] = rng.uniform(0.0, 2.0);
      mix[i] = a * x[i] + b * y[i];
    }
    auto sx = ar_smooth(x, 10), sy = ar_smooth(y, 10), sm = ar_smooth(mix, 10);
    for (int i = 0; i < 60; ++i)
      CHECK(sm[i] == doctest::Approx(a * sx[i] + b * sy[i]).epsilon(1e-12));
  }
  SUBCASE("zero history length is rejected") {
    CHECK_THROWS_AS(ar_smooth({1.0}, 0), std::logic_error);
  }
}

TEST_CASE("feedback filter variant stays bounded and distinct") {
  SplitMix64 rng(17);
  std::vector<double> raw(500);
  for (double& v : raw) v = rng.uniform(0.0, 1.0);
  auto s = ar_smooth_recursive(raw, 10);
  REQUIRE(s.size() == raw.size());
  CHECK(s[0] == 0.0);
  for (double v : s) {
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);  // feedback gain 1/2 bounds the output at twice the input
  }
  auto lit = ar_smooth(raw, 10);
  CHECK(s != lit);
  CHECK(ar_smooth_recursive(raw, 10) == s);

  SmoothingConfig cfg;
  cfg.recursive = true;
  CHECK(smooth(raw, cfg) == s);
  cfg.recursive = false;
  CHECK(smooth(raw, cfg) == lit);
}

TEST_CASE("threshold calibration takes 1.1x the global smoothed peak") {
  auto traces_with_max = [](const std::string& rec_id, double m) {
    RecordingTraces rt;
    rt.recording_id = rec_id;
    OracleTrace tr;
    tr.oracle_id = "mr/MR1";
    tr.raw = {0.0, m, m / 2};
    tr.smoothed = {0.0, m / 4, m};  // peak is m
    rt.oracles.push_back(tr);
    return rt;
  };

  SUBCASE("max over recordings, scaled") {
    auto ts = calibrate_thresholds({traces_with_max("a", 0.2),
                                    traces_with_max("b", 0.5),
                                    traces_with_max("c", 0.3)});
    CHECK(ts.at("mr/MR1").value == doctest::Approx(0.55).epsilon(1e-12));
    CHECK_FALSE(ts.at("mr/MR1").degenerate);
    CHECK(ts.provenance == std::vector<std::string>{"a", "b", "c"});
  }
  SUBCASE("a single recording works") {
    auto ts = calibrate_thresholds({traces_with_max("solo", 1.0)});
    CHECK(ts.at("mr/MR1").value == doctest::Approx(1.1).epsilon(1e-12));
  }
  SUBCASE("an empty calibration set is an error") {
    CHECK_THROWS_AS(calibrate_thresholds({}), std::invalid_argument);
  }
  SUBCASE("all-zero scores yield a degenerate zero threshold") {
    auto ts = calibrate_thresholds({traces_with_max("z", 0.0)});
    CHECK(ts.at("mr/MR1").value == 0.0);
    CHECK(ts.at("mr/MR1").degenerate);
  }
  SUBCASE("oracles calibrate independently") {
    RecordingTraces rt;
    rt.recording_id = "multi";
    rt.oracles.push_back({"mr/MR1", {0, 1}, {0.0, 0.4}});
    rt.oracles.push_back({"mr/MR5", {0, 1}, {0.0, 0.8}});
    auto ts = calibrate_thresholds({rt});
    CHECK(ts.at("mr/MR1").value == doctest::Approx(0.44).epsilon(1e-12));
    CHECK(ts.at("mr/MR5").value == doctest::Approx(0.88).epsilon(1e-12));
    CHECK_THROWS_AS(ts.at("ensemble"), std::runtime_error);
  }
}

TEST_CASE("alarms fire at the first strict exceedance") {
  OracleTrace tr;
  tr.oracle_id = "mr/MR2";
  tr.raw = {0, 0, 0, 0, 0};
  tr.smoothed = {0.0, 0.2, 0.6, 0.1, 0.9};

  SUBCASE("first crossing wins") {
    auto ev = first_alarm("rec", tr, {0.5, false});
    REQUIRE(ev.has_value());
    CHECK(ev->frame == 2);
    CHECK(ev->smoothed == 0.6);
    CHECK(ev->recording_id == "rec");
    CHECK(ev->oracle_id == "mr/MR2");
  }
  SUBCASE("nothing above threshold, no alarm") {
    CHECK_FALSE(first_alarm("rec", tr, {0.95, false}).has_value());
  }
  SUBCASE("equality is not an exceedance") {
    CHECK(first_alarm("rec", tr, {0.6, false})->frame == 4);
  }
  SUBCASE("a degenerate zero threshold alarms at the first nonzero score") {
    OracleTrace flat;
    flat.oracle_id = "x";
    flat.raw = {0, 0, 0, 1};
    flat.smoothed = {0.0, 0.0, 0.3, 0.5};
    CHECK(first_alarm("rec", flat, {0.0, true})->frame == 2);
  }
  SUBCASE("spike response crosses through the hand-computed filter") {
    double th = 0.4;
    std::vector<double> raw(12, 0.0);
    raw[3] = 10 * th;  // one-frame spike
    OracleTrace spike;
    spike.oracle_id = "s";
    spike.raw = raw;
    spike.smoothed = ar_smooth(raw, 10);
    // Filtered response: 4.0 at t=4, 2.0 at t=5, ... 4/i at t=3+i.
    auto ev = first_alarm("rec", spike, {th, false});
    REQUIRE(ev.has_value());
    CHECK(ev->frame == 4);
    CHECK(ev->smoothed == doctest::Approx(4.0).epsilon(1e-12));
    // A spike smaller than the threshold never alarms despite the pile-up.
    std::vector<double> small(12, 0.0);
    small[3] = th * 0.9;
    OracleTrace weak;
    weak.oracle_id = "w";
    weak.raw = small;
    weak.smoothed = ar_smooth(small, 10);
    CHECK_FALSE(first_alarm("rec", weak, {th, false}).has_value());
  }
}

TEST_CASE("scaling raw scores scales thresholds without moving alarms") {
  SplitMix64 rng(99);
  std::vector<double> raw(80);
  for (double& v : raw) v = rng.uniform(0.0, 1.0);
  const double c = 3.7;
  std::vector<double> scaled = raw;
  for (double& v : scaled) v *= c;

  auto s1 = ar_smooth(raw, 10), s2 = ar_smooth(scaled, 10);
  for (size_t i = 0; i < raw.size(); ++i)
    CHECK(s2[i] == doctest::Approx(c * s1[i]).epsilon(1e-12));

  OracleTrace t1{"o", raw, s1}, t2{"o", scaled, s2};
  // Calibrate on the first half of the trace, alarm on the rest.
  RecordingTraces calib1{"calib", {OracleTrace{
      "o", std::vector<double>(raw.begin(), raw.begin() + 40),
      std::vector<double>(s1.begin(), s1.begin() + 40)}}};
  RecordingTraces calib2{"calib", {OracleTrace{
      "o", std::vector<double>(scaled.begin(), scaled.begin() + 40),
      std::vector<double>(s2.begin(), s2.begin() + 40)}}};
  auto ts1 = calibrate_thresholds({calib1});
  auto ts2 = calibrate_thresholds({calib2});
  CHECK(ts2.at("o").value ==
        doctest::Approx(c * ts1.at("o").value).epsilon(1e-12));

  auto a1 = first_alarm("r", t1, ts1.at("o"));
  auto a2 = first_alarm("r", t2, ts2.at("o"));
  REQUIRE(a1.has_value() == a2.has_value());
  if (a1) CHECK(a1->frame == a2->frame);
}

TEST_CASE("replaying one oracle equals its column from the shared pass") {
  sim::Recording rec = tiny_recording(7, 1234);
  Controller ctl = imbalance_controller;

  auto bank = replay_mr_traces(rec, ctl, builtin_mrs(), 555);
  REQUIRE(bank.size() == 5);

  ThresholdSet loose;
  for (const auto& tr : bank) loose.entries[tr.oracle_id] = {1e9, false};

  for (size_t m = 0; m < 5; ++m) {
    MrOracle solo(builtin_mrs()[m], ctl);
    ReplayResult rr = replay_monitor(rec, solo, loose, 555);
    CHECK(rr.trace.oracle_id == bank[m].oracle_id);
    CHECK(rr.trace.raw == bank[m].raw);
    CHECK(rr.trace.smoothed == bank[m].smoothed);
    CHECK_FALSE(rr.alarm.has_value());
  }

  SUBCASE("every trace starts smoothed at zero and covers every frame") {
    for (const auto& tr : bank) {
      REQUIRE(tr.raw.size() == 7);
      REQUIRE(tr.smoothed.size() == 7);
      CHECK(tr.smoothed[0] == 0.0);
    }
  }
  SUBCASE("same run seed reproduces the stochastic check bit for bit") {
    auto again = replay_mr_traces(rec, ctl, builtin_mrs(), 555);
    for (size_t m = 0; m < 5; ++m) CHECK(again[m].raw == bank[m].raw);
    auto other = replay_mr_traces(rec, ctl, builtin_mrs(), 556);
    CHECK(other[2].raw != bank[2].raw);  // MR3 follows the run seed
    CHECK(other[0].raw == bank[0].raw);  // deterministic checks do not
  }
  SUBCASE("a zero threshold turns the first positive frame into an alarm") {
    ThresholdSet zero;
    zero.entries["mr/MR3"] = {0.0, true};
    MrOracle noisy(builtin_mrs()[2], ctl);
    ReplayResult rr = replay_monitor(rec, noisy, zero, 555);
    REQUIRE(rr.alarm.has_value());
    CHECK(rr.alarm->frame >= 1);  // smoothing delays the score one frame
  }
}

TEST_CASE("trace, threshold, and alarm files round trip") {
  fs::path dir = fs::temp_directory_path() / "lanemon-monitor-io";
  fs::create_directories(dir);

  SUBCASE("traces") {
    std::vector<OracleTrace> traces;
    SplitMix64 rng(3);
    for (const char* id : {"mr/MR1", "selforacle/sae", "ensemble"}) {
      OracleTrace tr;
      tr.oracle_id = id;
      for (int i = 0; i < 6; ++i) tr.raw.push_back(rng.uniform(0.0, 1.0));
      tr.smoothed = ar_smooth(tr.raw, 10);
      traces.push_back(std::move(tr));
    }
    save_traces(traces, dir / "traces.csv");
    auto back = load_traces(dir / "traces.csv");
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
      CHECK(back[i].oracle_id == traces[i].oracle_id);
      CHECK(back[i].raw == traces[i].raw);
      CHECK(back[i].smoothed == traces[i].smoothed);
    }
  }
  SUBCASE("thresholds") {
    ThresholdSet ts;
    ts.entries["mr/MR5"] = {0.123456789012345678, false};
    ts.entries["ensemble"] = {0.0, true};
    ts.provenance = {"calib-0", "calib-1"};
    save_thresholds(ts, dir / "thresholds.json");
    ThresholdSet back = load_thresholds(dir / "thresholds.json");
    CHECK(back.at("mr/MR5").value == ts.at("mr/MR5").value);
    CHECK_FALSE(back.at("mr/MR5").degenerate);
    CHECK(back.at("ensemble").degenerate);
    CHECK(back.provenance == ts.provenance);
  }
  SUBCASE("alarms") {
    std::vector<AlarmEvent> alarms = {{"rec-1", "mr/MR5", 42, 0.9},
                                      {"rec-2", "ensemble", 7, 1.25}};
    save_alarms(alarms, dir / "alarms.jsonl");
    auto back = load_alarms(dir / "alarms.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].recording_id == "rec-1");
    CHECK(back[0].oracle_id == "mr/MR5");
    CHECK(back[0].frame == 42);
    CHECK(back[0].smoothed == 0.9);
    CHECK(back[1].frame == 7);
    save_alarms({}, dir / "empty.jsonl");
    CHECK(load_alarms(dir / "empty.jsonl").empty());
  }
}

}  // TEST_SUITE
