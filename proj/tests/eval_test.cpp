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

#include "lanemon/eval.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "lanemon/common.hpp"
#include "lanemon/rng.hpp"

namespace fs = std::filesystem;
using namespace lanemon;
using namespace lanemon::eval;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

sim::RecordingMeta meta_nominal(int n_frames) {
  sim::RecordingMeta m;
  m.id = "nom";
  m.circuit_id = "circuit-1";
  m.condition = sim::RecordingCondition::nominal();
  m.n_frames = n_frames;
  return m;
}

sim::RecordingMeta meta_mutant(int n_frames, int oob) {
  sim::RecordingMeta m;
  m.id = "mut";
  m.circuit_id = "circuit-1";
  m.condition = sim::RecordingCondition::mutant("TCL", 0.2, 0);
  m.n_frames = n_frames;
  m.oob_frame = oob;
  return m;
}

sim::RecordingMeta meta_anomaly(int n_frames, int oob, int onset) {
  sim::RecordingMeta m;
  m.id = "anom";
  m.circuit_id = "circuit-1";
  m.condition = sim::RecordingCondition::anomaly("fog", 3, onset);
  m.n_frames = n_frames;
  m.oob_frame = oob;
  return m;
}

monitor::OracleTrace trace_from(std::vector<double> smoothed) {
  monitor::OracleTrace tr;
  tr.oracle_id = "mr/MR5";
  tr.raw = smoothed;  // raw values are irrelevant to scoring
  tr.smoothed = std::move(smoothed);
  return tr;
}

// Constant-zero trace with a sustained level after `from`.
monitor::OracleTrace step_trace(int n, int from, double level) {
  std::vector<double> s(n, 0.0);
  for (int t = from; t < n; ++t) s[t] = level;
  return trace_from(std::move(s));
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("lanemon-eval-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("classification follows the alarm and deadline rules") {
  monitor::ThresholdEntry thr{0.5, false};

  // A plain lap: any alarm is false, silence is a true negative.
  {
    sim::RecordingMeta m = meta_nominal(200);
    OracleVerdict loud = make_verdict(m, step_trace(200, 50, 0.9), thr);
    CHECK(loud.alarmed);
    CHECK(classify(loud, m) == Outcome::kFP);

    OracleVerdict quiet = make_verdict(m, step_trace(200, 50, 0.2), thr);
    CHECK_FALSE(quiet.alarmed);
    CHECK(classify(quiet, m) == Outcome::kTN);
  }

  // Fault-driven run: first alarm at 100, off-lane at 130.
  {
    sim::RecordingMeta m = meta_mutant(131, 130);
    OracleVerdict v = make_verdict(m, step_trace(131, 100, 0.9), thr);
    CHECK(v.alarmed);
    REQUIRE(v.first_alarm_frame.has_value());
    CHECK(*v.first_alarm_frame == 100);
    CHECK(classify(v, m, 0) == Outcome::kTP);
    CHECK(classify(v, m, 20) == Outcome::kTP);   // 100 <= 130 - 20
    CHECK(classify(v, m, 40) == Outcome::kFN);   // 100 >  130 - 40
    OracleVerdict silent = make_verdict(m, step_trace(131, 100, 0.1), thr);
    CHECK(classify(silent, m, 0) == Outcome::kFN);
  }

  // Failure-labeled run that never left the lane: unclassifiable.
  {
    sim::RecordingMeta m = meta_mutant(131, -1);
    OracleVerdict v = make_verdict(m, step_trace(131, 100, 0.9), thr);
    CHECK_FALSE(classify(v, m, 0).has_value());
  }

  // Mismatched ids or negative deadlines are caller bugs.
  {
    sim::RecordingMeta m = meta_nominal(10);
    OracleVerdict v = make_verdict(m, step_trace(10, 3, 0.9), thr);
    sim::RecordingMeta other = m;
    other.id = "someone-else";
    CHECK_THROWS_AS((void)classify(v, other), std::logic_error);
    CHECK_THROWS_AS((void)classify(v, m, -1), std::logic_error);
  }
}

TEST_CASE("confusion counts accumulate and expose class sizes") {
  ConfusionCounts c;
  c.add(Outcome::kTP);
  c.add(Outcome::kTP);
  c.add(Outcome::kFN);
  c.add(Outcome::kFP);
  c.add(Outcome::kTN);
  c.add(Outcome::kTN);
  c.add(Outcome::kTN);
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 3);
  CHECK(c.positives() == 3);
  CHECK(c.negatives() == 4);
}

TEST_CASE("rates match their formulas and flag degenerate denominators") {
  {
    ConfusionCounts c;
    c.tp = 30;
    MetricsValues v = metrics(c);
    CHECK(v.tpr == 1.0);
    CHECK(v.precision == 1.0);
    CHECK(v.f1 == 1.0);
    CHECK_FALSE(v.fpr_defined);  // no plain laps at all
    CHECK(v.fpr == 0.0);
  }
  {
    ConfusionCounts c;
    c.fp = 3;
    c.tn = 27;
    MetricsValues v = metrics(c);
    CHECK(v.fpr == 0.10);
    CHECK_FALSE(v.tpr_defined);
    CHECK(v.f1 == 0.0);
  }
  {
    ConfusionCounts c;
    c.tp = 18;
    c.fn = 34;
    MetricsValues v = metrics(c);
    double tpr = 18.0 / 52.0;
    CHECK(v.tpr == doctest::Approx(tpr).epsilon(1e-12));
    CHECK(v.precision == 1.0);
    CHECK(v.f1 == doctest::Approx(2.0 * tpr / (1.0 + tpr)).epsilon(1e-12));
  }
  {
    MetricsValues v = metrics(ConfusionCounts{});
    CHECK_FALSE(v.fpr_defined);
    CHECK_FALSE(v.precision_defined);
    CHECK_FALSE(v.tpr_defined);
    CHECK(v.fpr == 0.0);
    CHECK(v.precision == 0.0);
    CHECK(v.tpr == 0.0);
    CHECK(v.f1 == 0.0);
  }
  // Every rate stays inside [0, 1] across a grid of counts.
  for (long tp : {0L, 1L, 3L})
    for (long fp : {0L, 2L})
      for (long tn : {0L, 5L})
        for (long fn : {0L, 4L}) {
          ConfusionCounts c;
          c.tp = tp;
          c.fp = fp;
          c.tn = tn;
          c.fn = fn;
          MetricsValues v = metrics(c);
          CHECK(v.fpr >= 0.0);
          CHECK(v.fpr <= 1.0);
          CHECK(v.precision >= 0.0);
          CHECK(v.precision <= 1.0);
          CHECK(v.tpr >= 0.0);
          CHECK(v.tpr <= 1.0);
          CHECK(v.f1 >= 0.0);
          CHECK(v.f1 <= 1.0);
        }
}

TEST_CASE("separation and chance produce the textbook areas") {
  {
    AucResult a = auc({0.9, 0.8}, {0.1, 0.2});
    CHECK(a.roc == 1.0);
    CHECK(a.prc == 1.0);
  }
  {
    AucResult a = auc({0.5, 0.5}, {0.5, 0.5});
    CHECK(a.roc == 0.5);
    CHECK(a.prc == 0.5);  // equal class sizes
  }
  {
    // Perfectly inverted scores.
    AucResult a = auc({0.1, 0.2}, {0.8, 0.9});
    CHECK(a.roc == 0.0);
  }
  // Infinite scores order like any other value.
  {
    std::vector<double> pos{-kInf, 5.0};
    std::vector<double> neg{0.0, 1.0};
    AucResult a = auc(pos, neg);
    CHECK(a.roc == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.roc == doctest::Approx(auc_roc_pairwise(pos, neg)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(auc({}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(auc({0.1}, {}), std::invalid_argument);
  CHECK_THROWS_AS(auc({std::nan("")}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(auc({0.1}, {std::nan("")}), std::invalid_argument);
}

TEST_CASE("sweep area equals the pairwise comparison on random instances") {
  SplitMix64 rng(20260819);
  for (int it = 0; it < 60; ++it) {
    int np = 1 + static_cast<int>(rng.below(25));
    int nn = 1 + static_cast<int>(rng.below(25));
    bool discrete = (it % 2) == 0;  // force heavy ties on half the instances
    auto draw = [&]() {
      return discrete ? static_cast<double>(rng.below(4)) * 0.25
                      : rng.uniform();
    };
    std::vector<double> pos, neg;
    for (int i = 0; i < np; ++i) pos.push_back(draw());
    for (int i = 0; i < nn; ++i) neg.push_back(draw());
    AucResult a = auc(pos, neg);
    double ref = auc_roc_pairwise(pos, neg);
    CHECK(std::fabs(a.roc - ref) < 1e-12);
    CHECK(a.prc >= 0.0);
    CHECK(a.prc <= 1.0);
  }
}

TEST_CASE("deadline windows truncate failing recordings only") {
  // Ramp: smoothed score grows linearly, so the window's top frame is the max.
  std::vector<double> ramp(300);
  for (int t = 0; t < 300; ++t) ramp[t] = t / 1000.0;

  sim::RecordingMeta anom = meta_anomaly(300, 299, 150);
  CHECK(recording_score(anom, trace_from(ramp)) == 299 / 1000.0);
  {
    ScoreOptions so;
    so.reaction_offset = -40;
    CHECK(recording_score(anom, trace_from(ramp), so) == 259 / 1000.0);
  }

  // An early spike sits inside every window that reaches it.
  {
    std::vector<double> spiked = ramp;
    spiked[50] = 9.9;
    ScoreOptions so;
    so.reaction_offset = -40;
    CHECK(recording_score(anom, trace_from(spiked), so) == 9.9);
    // Strict mode starts scoring at the corruption onset, dropping the spike.
    so.strict_post_onset = true;
    CHECK(recording_score(anom, trace_from(spiked), so) == 259 / 1000.0);
  }

  // Strict mode does not apply to fault-driven runs (no onset exists).
  {
    sim::RecordingMeta mut = meta_mutant(300, 299);
    std::vector<double> spiked(300, 0.0);
    spiked[10] = 7.0;
    ScoreOptions so;
    so.strict_post_onset = true;
    CHECK(recording_score(mut, trace_from(spiked), so) == 7.0);
  }

  // A deadline before the first frame leaves nothing to score.
  {
    sim::RecordingMeta early = meta_mutant(11, 10);
    ScoreOptions so;
    so.reaction_offset = -40;
    CHECK(recording_score(early, trace_from(std::vector<double>(11, 1.0)), so) ==
          -kInf);
  }

  // Non-failing recordings always keep the full trace.
  {
    sim::RecordingMeta nom = meta_nominal(300);
    ScoreOptions so;
    so.reaction_offset = -40;
    CHECK(recording_score(nom, trace_from(ramp), so) == 299 / 1000.0);
  }

  // Caller bugs: positive offsets and too-short traces.
  {
    ScoreOptions so;
    so.reaction_offset = 5;
    CHECK_THROWS_AS(recording_score(anom, trace_from(ramp), so),
                    std::logic_error);
    CHECK_THROWS_AS(
        recording_score(anom, trace_from(std::vector<double>(100, 0.0))),
        std::logic_error);
  }
}

TEST_CASE("alarm flag always matches the windowed score") {
  SplitMix64 rng(99);
  for (int it = 0; it < 50; ++it) {
    int n = 20 + static_cast<int>(rng.below(60));
    int oob = n - 1;
    sim::RecordingMeta m = meta_mutant(n, oob);
    std::vector<double> s(n);
    for (double& v : s) v = rng.uniform();
    monitor::ThresholdEntry thr{rng.uniform(), false};
    ScoreOptions so;
    so.reaction_offset = -static_cast<int>(rng.below(30));

    OracleVerdict v = make_verdict(m, trace_from(s), thr, so);
    double score = recording_score(m, trace_from(s), so);
    CHECK(v.score == score);
    CHECK(v.alarmed == (score > thr.value));
    CHECK(v.first_alarm_frame.has_value() == v.alarmed);
    if (v.first_alarm_frame) {
      int f = *v.first_alarm_frame;
      CHECK(f <= oob + so.reaction_offset);
      CHECK(s[f] > thr.value);
      for (int t = 0; t < f; ++t) CHECK(s[t] <= thr.value);
    }
  }
}

TEST_CASE("report table round-trips and keeps its exact header") {
  MetricsReport report;
  {
    ReportRow r;
    r.oracle_id = "mr/MR5";
    r.dataset = "mutant";
    r.circuit = "circuit-1";
    r.reaction_offset = -20;
    r.counts.tp = 18;
    r.counts.fn = 34;
    r.counts.fp = 3;
    r.counts.tn = 27;
    r.values = metrics(r.counts);
    r.areas = auc({0.9, 0.8}, {0.1, 0.2});
    report.rows.push_back(r);
  }
  {
    ReportRow r;
    r.oracle_id = "selforacle/sae";
    r.dataset = "anomaly";
    r.circuit = "circuit-2";
    r.reaction_offset = 0;
    r.counts.tn = 10;
    r.values = metrics(r.counts);
    r.auc_defined = false;
    report.rows.push_back(r);
  }
  report.warnings.push_back("excluded x: no out-of-bounds event");

  std::string csv = report_csv(report);
  CHECK(csv.rfind("oracle,dataset,circuit,reaction_offset,TP,FP,TN,FN,FPR,"
                  "precision,TPR,F1,auc_roc,auc_prc\n",
                  0) == 0);
  CHECK(csv.find("mr/MR5,mutant,circuit-1,-20,18,3,27,34,") !=
        std::string::npos);

  fs::path dir = fresh_dir("report");
  save_report_csv(report, dir / "report.csv");
  std::vector<ReportRow> back = load_report_csv(dir / "report.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].oracle_id == "mr/MR5");
  CHECK(back[0].dataset == "mutant");
  CHECK(back[0].circuit == "circuit-1");
  CHECK(back[0].reaction_offset == -20);
  CHECK(back[0].counts.tp == 18);
  CHECK(back[0].counts.fp == 3);
  CHECK(back[0].counts.tn == 27);
  CHECK(back[0].counts.fn == 34);
  CHECK(std::fabs(back[0].values.tpr - report.rows[0].values.tpr) < 1e-6);
  CHECK(std::fabs(back[0].values.f1 - report.rows[0].values.f1) < 1e-6);
  CHECK(back[0].areas.roc == 1.0);
  CHECK(back[1].oracle_id == "selforacle/sae");
  CHECK(back[1].counts.tn == 10);

  std::string md = report_markdown(report);
  CHECK(md.find("mr/MR5") != std::string::npos);
  CHECK(md.find("recording") != std::string::npos);
  CHECK(md.find("excluded x") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
