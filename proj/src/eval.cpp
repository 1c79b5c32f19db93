// lanemon/eval.cpp
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

#include "lanemon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lanemon/common.hpp"

namespace lanemon::eval {

double recording_score(const sim::RecordingMeta& meta,
                       const monitor::OracleTrace& trace,
                       const ScoreOptions& opt) {
  LANEMON_CHECK(opt.reaction_offset <= 0,
                "a detection deadline cannot lie after the failure");
  const int n = static_cast<int>(trace.smoothed.size());
  LANEMON_CHECK(n == meta.n_frames, "trace does not cover the recording");

  int lo = 0, hi = n - 1;
  if (meta.condition.positive() && meta.oob_frame >= 0) {
    hi = std::min(hi, meta.oob_frame + opt.reaction_offset);
    if (opt.strict_post_onset &&
        meta.condition.kind == sim::RecordingCondition::kAnomaly)
      lo = std::max(lo, meta.condition.onset_frame);
  }
  if (hi < lo) return -std::numeric_limits<double>::infinity();

  double m = trace.smoothed[lo];
  for (int t = lo + 1; t <= hi; ++t) m = std::max(m, trace.smoothed[t]);
  return m;
}

OracleVerdict make_verdict(const sim::RecordingMeta& meta,
                           const monitor::OracleTrace& trace,
                           const monitor::ThresholdEntry& threshold,
                           const ScoreOptions& opt) {
  OracleVerdict v;
  v.recording_id = meta.id;
  v.oracle_id = trace.oracle_id;
  v.score = recording_score(meta, trace, opt);
  v.alarmed = v.score > threshold.value;
  if (v.alarmed) {
    int lo = 0;
    if (opt.strict_post_onset && meta.condition.positive() &&
        meta.condition.kind == sim::RecordingCondition::kAnomaly)
      lo = std::max(lo, meta.condition.onset_frame);
    for (size_t t = lo; t < trace.smoothed.size(); ++t) {
      if (trace.smoothed[t] > threshold.value) {
        v.first_alarm_frame = static_cast<int>(t);
        break;
      }
    }
  }
  return v;
}

std::optional<Outcome> classify(const OracleVerdict& verdict,
                                const sim::RecordingMeta& meta,
                                int reaction_frames) {
  LANEMON_CHECK(verdict.recording_id == meta.id,
                "verdict belongs to a different recording");
  LANEMON_CHECK(reaction_frames >= 0, "reaction window cannot be negative");
  if (!meta.condition.positive())
    return verdict.alarmed ? Outcome::kFP : Outcome::kTN;
  if (meta.oob_frame < 0) return std::nullopt;  // no failure to predict
  const bool in_time = verdict.first_alarm_frame.has_value() &&
                       *verdict.first_alarm_frame <=
                           meta.oob_frame - reaction_frames;
  return in_time ? Outcome::kTP : Outcome::kFN;
}

void ConfusionCounts::add(Outcome o) {
  switch (o) {
    case Outcome::kTP: ++tp; break;
    case Outcome::kFP: ++fp; break;
    case Outcome::kTN: ++tn; break;
    case Outcome::kFN: ++fn; break;
  }
}

MetricsValues metrics(const ConfusionCounts& c) {
  MetricsValues m;
  if (c.fp + c.tn > 0)
    m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  else
    m.fpr_defined = false;
  if (c.tp + c.fp > 0)
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else
    m.precision_defined = false;
  if (c.tp + c.fn > 0)
    m.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else
    m.tpr_defined = false;
  if (c.tp > 0) m.f1 = 2.0 * m.precision * m.tpr / (m.precision + m.tpr);
  return m;
}

namespace {

void check_scores(const std::vector<double>& scores, const char* which) {
  if (scores.empty())
    throw std::invalid_argument(
        strfmt("cannot compute areas with no %s scores", which));
  for (double s : scores)
    if (std::isnan(s))
      throw std::invalid_argument(strfmt("NaN among the %s scores", which));
}

}  // namespace

AucResult auc(const std::vector<double>& pos_scores,
              const std::vector<double>& neg_scores) {
  check_scores(pos_scores, "failure");
  check_scores(neg_scores, "non-failure");

  // Merge, sort by score descending, then walk distinct-score groups.
  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> all;
  all.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) all.push_back({s, true});
  for (double s : neg_scores) all.push_back({s, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  const double np = static_cast<double>(pos_scores.size());
  const double nn = static_cast<double>(neg_scores.size());

  AucResult out;
  double tp = 0, fp = 0;
  double prev_tpr = 0, prev_fpr = 0;
  double prev_recall = 0, prev_precision = 0;
  bool first_group = true;
  for (size_t i = 0; i < all.size();) {
    size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) {
      if (all[j].positive)
        tp += 1;
      else
        fp += 1;
      ++j;
    }
    i = j;

    const double tpr = tp / np;
    const double fpr = fp / nn;
    out.roc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_tpr = tpr;
    prev_fpr = fpr;

    const double recall = tpr;
    const double precision = tp / (tp + fp);
    if (first_group) {
      prev_precision = precision;  // anchor the curve at (0, p_first)
      first_group = false;
    }
    out.prc += (recall - prev_recall) * (precision + prev_precision) / 2.0;
    prev_recall = recall;
    prev_precision = precision;
  }
  return out;
}

double auc_roc_pairwise(const std::vector<double>& pos_scores,
                        const std::vector<double>& neg_scores) {
  check_scores(pos_scores, "failure");
  check_scores(neg_scores, "non-failure");
  double acc = 0.0;
  for (double p : pos_scores)
    for (double n : neg_scores) {
      if (p > n)
        acc += 1.0;
      else if (p == n)
        acc += 0.5;
    }
  return acc / (static_cast<double>(pos_scores.size()) *
                static_cast<double>(neg_scores.size()));
}

std::string report_csv(const MetricsReport& report) {
  std::string csv =
      "oracle,dataset,circuit,reaction_offset,TP,FP,TN,FN,FPR,precision,TPR,"
      "F1,auc_roc,auc_prc\n";
  for (const ReportRow& r : report.rows) {
    csv += strfmt("%s,%s,%s,%d,%ld,%ld,%ld,%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.oracle_id.c_str(), r.dataset.c_str(), r.circuit.c_str(),
                  r.reaction_offset, r.counts.tp, r.counts.fp, r.counts.tn,
                  r.counts.fn, r.values.fpr, r.values.precision, r.values.tpr,
                  r.values.f1, r.areas.roc, r.areas.prc);
  }
  return csv;
}

void save_report_csv(const MetricsReport& report,
                     const std::filesystem::path& path) {
  write_file_atomic(path, report_csv(report));
}

std::vector<ReportRow> load_report_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<ReportRow> rows;
  size_t pos = text.find('\n');
  if (pos == std::string::npos)
    throw std::runtime_error("report has no header: " + path.string());

  for (size_t start = pos + 1; start < text.size();) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;

    std::vector<std::string> f;
    size_t cell = 0;
    while (cell <= line.size()) {
      size_t comma = line.find(',', cell);
      if (comma == std::string::npos) comma = line.size();
      f.push_back(line.substr(cell, comma - cell));
      cell = comma + 1;
    }
    if (f.size() != 14)
      throw std::runtime_error("bad report row: " + line);

    ReportRow r;
    r.oracle_id = f[0];
    r.dataset = f[1];
    r.circuit = f[2];
    r.reaction_offset = std::stoi(f[3]);
    r.counts.tp = std::stol(f[4]);
    r.counts.fp = std::stol(f[5]);
    r.counts.tn = std::stol(f[6]);
    r.counts.fn = std::stol(f[7]);
    r.values.fpr = std::stod(f[8]);
    r.values.precision = std::stod(f[9]);
    r.values.tpr = std::stod(f[10]);
    r.values.f1 = std::stod(f[11]);
    r.areas.roc = std::stod(f[12]);
    r.areas.prc = std::stod(f[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string report_markdown(const MetricsReport& report) {
  std::string md = "# Monitoring report\n\n";
  md += "Scores aggregated at " + report.granularity + " level.\n";
  for (const std::string& w : report.warnings) md += "\n> " + w + "\n";

  // One table per (dataset, circuit, offset), rows = oracles.
  std::string current;
  for (const ReportRow& r : report.rows) {
    const std::string key = r.dataset + " / " + r.circuit + " / offset " +
                            std::to_string(r.reaction_offset);
    if (key != current) {
      current = key;
      md += "\n## " + key + "\n\n";
      md += "| oracle | TP | FP | TN | FN | FPR | precision | TPR | F1 | "
            "AUC-ROC | AUC-PRC |\n";
      md += "|---|---|---|---|---|---|---|---|---|---|---|\n";
    }
    md += strfmt("| %s | %ld | %ld | %ld | %ld | %.3f | %.3f | %.3f | %.3f | "
                 "%.3f | %.3f |\n",
                 r.oracle_id.c_str(), r.counts.tp, r.counts.fp, r.counts.tn,
                 r.counts.fn, r.values.fpr, r.values.precision, r.values.tpr,
                 r.values.f1, r.areas.roc, r.areas.prc);
  }
  return md;
}

}  // namespace lanemon::eval
