// lanemon/eval.hpp
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
// Recording-level scoring and metrics. A monitored recording reduces to one
// verdict per oracle: its peak smoothed score inside the scoring window and
// whether that peak cleared the threshold. Verdicts roll up to confusion
// counts, rate metrics, and threshold-free ROC/PRC areas.

#ifndef LANEMON_EVAL_HPP_
#define LANEMON_EVAL_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lanemon/monitor.hpp"
#include "lanemon/recording.hpp"

namespace lanemon::eval {

// ---------------------------------------------------------------------------
// Recording-level verdicts.

struct ScoreOptions {
  // <= 0. A failing recording is scored only on frames the monitor had
  // available by the detection deadline, i.e. frames <= oob_frame + offset.
  // Non-failing recordings always use the whole trace.
  int reaction_offset = 0;
  // Score failing corruption recordings only on frames at or after the
  // corruption onset (off by default: an early alarm still counts).
  bool strict_post_onset = false;
};

// Peak smoothed score in the scoring window. An empty window (deadline
// before the first frame) yields -infinity: the monitor never had a chance.
double recording_score(const sim::RecordingMeta& meta,
                       const monitor::OracleTrace& trace,
                       const ScoreOptions& opt = {});

struct OracleVerdict {
  std::string recording_id;
  std::string oracle_id;
  double score = 0.0;  // recording_score under the same options
  bool alarmed = false;
  std::optional<int> first_alarm_frame;  // within the scoring window
};

OracleVerdict make_verdict(const sim::RecordingMeta& meta,
                           const monitor::OracleTrace& trace,
                           const monitor::ThresholdEntry& threshold,
                           const ScoreOptions& opt = {});

// ---------------------------------------------------------------------------
// Classification.

enum class Outcome { kTP, kFP, kTN, kFN };

// Non-failure-labeled recordings: alarm -> FP, silence -> TN. Failure-labeled
// ones: TP only if the first alarm came at least reaction_frames frames
// before the out-of-bounds event, else FN. A failure-labeled recording with
// no out-of-bounds event cannot be classified and yields nullopt (the caller
// counts it as excluded and warns).
std::optional<Outcome> classify(const OracleVerdict& verdict,
                                const sim::RecordingMeta& meta,
                                int reaction_frames = 0);

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long excluded = 0;  // failure-labeled recordings without an OOB event

  void add(Outcome o);
  long positives() const { return tp + fn; }
  long negatives() const { return fp + tn; }
};

struct MetricsValues {
  double fpr = 0.0, precision = 0.0, tpr = 0.0, f1 = 0.0;
  // A zero denominator makes the rate undefined; it is reported as 0 with
  // the matching flag cleared.
  bool fpr_defined = true, precision_defined = true, tpr_defined = true;
};

// FPR = FP/(FP+TN); precision = TP/(TP+FP); TPR = TP/(TP+FN);
// F1 = 2*precision*TPR/(precision+TPR), 0 whenever TP = 0.
MetricsValues metrics(const ConfusionCounts& counts);

// ---------------------------------------------------------------------------
// Threshold-free areas.

struct AucResult {
  double roc = 0.0;
  double prc = 0.0;
};

// Sweeps every distinct score as a threshold (ties grouped into one step)
// and integrates both curves trapezoidally. The PRC is anchored at
// (recall 0, precision of the highest-score group). Either class empty, or
// any NaN score, is an error.
AucResult auc(const std::vector<double>& pos_scores,
              const std::vector<double>& neg_scores);

// Independent reference implementation: P(pos > neg) + 0.5 * P(pos == neg)
// over all pos x neg pairs. The sweep's ROC area equals this exactly (up to
// rounding); kept as the equivalence oracle.
double auc_roc_pairwise(const std::vector<double>& pos_scores,
                        const std::vector<double>& neg_scores);

// ---------------------------------------------------------------------------
// Report.

struct ReportRow {
  std::string oracle_id;
  std::string dataset;  // "anomaly" | "mutant"
  std::string circuit;
  int reaction_offset = 0;
  ConfusionCounts counts;
  MetricsValues values;
  AucResult areas;
  bool auc_defined = true;  // false: a class was empty, areas reported as 0
};

struct MetricsReport {
  std::vector<ReportRow> rows;
  std::string granularity = "recording";  // or "frame"
  std::vector<std::string> warnings;
};

// CSV with the fixed header
// oracle,dataset,circuit,reaction_offset,TP,FP,TN,FN,FPR,precision,TPR,F1,auc_roc,auc_prc
// Rates and areas print with six decimals; rows in the report's order.
std::string report_csv(const MetricsReport& report);
void save_report_csv(const MetricsReport& report,
                     const std::filesystem::path& path);
std::vector<ReportRow> load_report_csv(const std::filesystem::path& path);

// Markdown tables (one block per dataset/circuit at each offset) for humans;
// mentions the granularity and any warnings.
std::string report_markdown(const MetricsReport& report);

}  // namespace lanemon::eval

#endif  // LANEMON_EVAL_HPP_
