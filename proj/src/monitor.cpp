// lanemon/monitor.cpp
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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lanemon/common.hpp"
#include "lanemon/imgops.hpp"
#include "lanemon/rng.hpp"

namespace lanemon::monitor {

using json = nlohmann::json;

const std::vector<MRDef>& builtin_mrs() {
  static const std::vector<MRDef> mrs = [] {
    std::vector<MRDef> v;
    v.push_back({"MR1",
                 [](const img::Image& im, std::uint64_t) {
                   return img::reduce_brightness(im, 77);
                 },
                 false, false});
    v.push_back({"MR2",
                 [](const img::Image& im, std::uint64_t) {
                   return img::set_saturation(im, 50);
                 },
                 false, false});
    v.push_back({"MR3",
                 [](const img::Image& im, std::uint64_t seed) {
                   return img::add_uniform_noise(im, 0.2, seed);
                 },
                 false, true});
    v.push_back({"MR4",
                 [](const img::Image& im, std::uint64_t) {
                   return img::box_blur(im, 5, 1);
                 },
                 false, false});
    v.push_back({"MR5",
                 [](const img::Image& im, std::uint64_t) {
                   return img::flip_horizontal(im);
                 },
                 true, false});
    return v;
  }();
  return mrs;
}

double mr_uncertainty(const MRDef& mr, const Controls& source,
                      const Controls& followup) {
  const double expected =
      mr.negate_steering ? -source.steering : source.steering;
  return std::abs(expected - followup.steering);
}

MonitorStepResult monitor_step(const std::vector<MRDef>& mrs,
                               const Controller& controller,
                               const img::Image& frame,
                               std::uint64_t frame_seed) {
  MonitorStepResult res;
  res.control = controller(frame);
  res.raw_scores.reserve(mrs.size());
  for (const MRDef& mr : mrs) {
    const std::uint64_t mr_seed =
        mr.stochastic ? derive_seed(frame_seed, mr.id) : 0;
    img::Image followup_frame = mr.transform(frame, mr_seed);
    Controls followup = controller(followup_frame);
    res.raw_scores.push_back(mr_uncertainty(mr, res.control, followup));
  }
  return res;
}

std::vector<double> ar_smooth(const std::vector<double>& raw, int k) {
  LANEMON_CHECK(k >= 1, "history length must be at least 1");
  std::vector<double> out(raw.size(), 0.0);
  for (size_t t = 1; t < raw.size(); ++t) {
    const int reach = static_cast<int>(std::min<size_t>(k, t));
    double acc = 0.0;
    for (int i = 1; i <= reach; ++i) acc += raw[t - i] / static_cast<double>(i);
    out[t] = acc;
  }
  return out;
}

std::vector<double> ar_smooth_recursive(const std::vector<double>& raw, int k) {
  LANEMON_CHECK(k >= 1, "history length must be at least 1");
  double harmonic = 0.0;
  for (int i = 1; i <= k; ++i) harmonic += 1.0 / i;
  const double gain = 0.5 / harmonic;  // total feedback weight 1/2
  std::vector<double> out(raw.size(), 0.0);
  for (size_t t = 1; t < raw.size(); ++t) {
    const int reach = static_cast<int>(std::min<size_t>(k, t));
    double acc = raw[t - 1];
    for (int i = 1; i <= reach; ++i)
      acc += gain * out[t - i] / static_cast<double>(i);
    out[t] = acc;
  }
  return out;
}

std::vector<double> smooth(const std::vector<double>& raw,
                           const SmoothingConfig& cfg) {
  return cfg.recursive ? ar_smooth_recursive(raw, cfg.k)
                       : ar_smooth(raw, cfg.k);
}

const ThresholdEntry& ThresholdSet::at(const std::string& oracle_id) const {
  auto it = entries.find(oracle_id);
  if (it == entries.end())
    throw std::runtime_error("no calibrated threshold for oracle " +
                             oracle_id);
  return it->second;
}

ThresholdSet calibrate_thresholds(const std::vector<RecordingTraces>& calib) {
  if (calib.empty())
    throw std::invalid_argument(
        "threshold calibration needs at least one recording");
  ThresholdSet ts;
  std::map<std::string, double> peak;
  for (const RecordingTraces& rec : calib) {
    ts.provenance.push_back(rec.recording_id);
    for (const OracleTrace& tr : rec.oracles) {
      double m = 0.0;
      for (double v : tr.smoothed) m = std::max(m, v);
      auto [it, fresh] = peak.emplace(tr.oracle_id, m);
      if (!fresh) it->second = std::max(it->second, m);
    }
  }
  for (const auto& [oracle_id, m] : peak) {
    ThresholdEntry e;
    e.value = 1.1 * m;
    e.degenerate = m == 0.0;
    ts.entries[oracle_id] = e;
  }
  return ts;
}

void save_thresholds(const ThresholdSet& ts,
                     const std::filesystem::path& path) {
  json entries = json::object();
  for (const auto& [oracle_id, e] : ts.entries)
    entries[oracle_id] = {{"value", e.value}, {"degenerate", e.degenerate}};
  json doc = {{"version", 1},
              {"thresholds", entries},
              {"provenance", ts.provenance}};
  write_file_atomic(path, doc.dump(2) + "\n");
}

ThresholdSet load_thresholds(const std::filesystem::path& path) {
  json doc = json::parse(read_text_file(path));
  ThresholdSet ts;
  for (const auto& [oracle_id, e] : doc.at("thresholds").items())
    ts.entries[oracle_id] = {e.at("value").get<double>(),
                             e.at("degenerate").get<bool>()};
  ts.provenance =
      doc.at("provenance").get<std::vector<std::string>>();
  return ts;
}

std::optional<AlarmEvent> first_alarm(const std::string& recording_id,
                                      const OracleTrace& trace,
                                      const ThresholdEntry& threshold) {
  for (size_t t = 0; t < trace.smoothed.size(); ++t) {
    if (trace.smoothed[t] > threshold.value) {
      AlarmEvent ev;
      ev.recording_id = recording_id;
      ev.oracle_id = trace.oracle_id;
      ev.frame = static_cast<int>(t);
      ev.smoothed = trace.smoothed[t];
      return ev;
    }
  }
  return std::nullopt;
}

MrOracle::MrOracle(MRDef mr, Controller controller)
    : id_("mr/" + mr.id), mr_(std::move(mr)),
      controller_(std::move(controller)) {}

double MrOracle::raw_score(const img::Image& frame, std::uint64_t frame_seed) {
  Controls source = controller_(frame);
  const std::uint64_t mr_seed =
      mr_.stochastic ? derive_seed(frame_seed, mr_.id) : 0;
  img::Image followup_frame = mr_.transform(frame, mr_seed);
  Controls followup = controller_(followup_frame);
  return mr_uncertainty(mr_, source, followup);
}

namespace {

std::uint64_t frame_seed_for(std::uint64_t run_seed, int frame) {
  return derive_seed(run_seed, "frame", static_cast<std::uint64_t>(frame));
}

}  // namespace

OracleTrace replay_trace(const sim::Recording& rec, Oracle& oracle,
                         std::uint64_t run_seed,
                         const SmoothingConfig& smoothing) {
  LANEMON_CHECK(static_cast<int>(rec.frames.size()) == rec.meta.n_frames,
                "recording frames incomplete");
  OracleTrace trace;
  trace.oracle_id = oracle.id();
  trace.raw.reserve(rec.frames.size());
  for (size_t t = 0; t < rec.frames.size(); ++t)
    trace.raw.push_back(
        oracle.raw_score(rec.frames[t], frame_seed_for(run_seed,
                                                       static_cast<int>(t))));
  trace.smoothed = smooth(trace.raw, smoothing);
  return trace;
}

ReplayResult replay_monitor(const sim::Recording& rec, Oracle& oracle,
                            const ThresholdSet& thresholds,
                            std::uint64_t run_seed,
                            const SmoothingConfig& smoothing) {
  ReplayResult out;
  out.trace = replay_trace(rec, oracle, run_seed, smoothing);
  out.alarm = first_alarm(rec.meta.id, out.trace, thresholds.at(oracle.id()));
  return out;
}

std::vector<OracleTrace> replay_mr_traces(const sim::Recording& rec,
                                          const Controller& controller,
                                          const std::vector<MRDef>& mrs,
                                          std::uint64_t run_seed,
                                          const SmoothingConfig& smoothing) {
  LANEMON_CHECK(static_cast<int>(rec.frames.size()) == rec.meta.n_frames,
                "recording frames incomplete");
  std::vector<OracleTrace> traces(mrs.size());
  for (size_t m = 0; m < mrs.size(); ++m) {
    traces[m].oracle_id = "mr/" + mrs[m].id;
    traces[m].raw.reserve(rec.frames.size());
  }
  for (size_t t = 0; t < rec.frames.size(); ++t) {
    MonitorStepResult step =
        monitor_step(mrs, controller, rec.frames[t],
                     frame_seed_for(run_seed, static_cast<int>(t)));
    for (size_t m = 0; m < mrs.size(); ++m)
      traces[m].raw.push_back(step.raw_scores[m]);
  }
  for (OracleTrace& tr : traces) tr.smoothed = smooth(tr.raw, smoothing);
  return traces;
}

void save_traces(const std::vector<OracleTrace>& traces,
                 const std::filesystem::path& path) {
  std::string csv = "frame,oracle,raw,smoothed\n";
  for (const OracleTrace& tr : traces) {
    LANEMON_CHECK(tr.raw.size() == tr.smoothed.size(),
                  "trace raw/smoothed length mismatch");
    for (size_t t = 0; t < tr.raw.size(); ++t)
      csv += strfmt("%zu,%s,%.17g,%.17g\n", t, tr.oracle_id.c_str(), tr.raw[t],
                    tr.smoothed[t]);
  }
  write_file_atomic(path, csv);
}

std::vector<OracleTrace> load_traces(const std::filesystem::path& path) {
  const std::string csv = read_text_file(path);
  std::vector<OracleTrace> traces;
  size_t pos = csv.find('\n');
  if (pos == std::string::npos)
    throw std::runtime_error("trace file is empty: " + path.string());
  for (size_t start = pos + 1; start < csv.size();) {
    size_t end = csv.find('\n', start);
    if (end == std::string::npos) end = csv.size();
    const std::string line = csv.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    // frame,oracle,raw,smoothed — oracle ids may contain '/'.
    size_t c1 = line.find(',');
    size_t c2 = line.find(',', c1 + 1);
    size_t c3 = line.find(',', c2 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        c3 == std::string::npos)
      throw std::runtime_error("bad trace row: " + line);
    const size_t frame = std::stoull(line.substr(0, c1));
    const std::string oracle_id = line.substr(c1 + 1, c2 - c1 - 1);
    const double raw = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
    const double smoothed = std::stod(line.substr(c3 + 1));
    if (traces.empty() || traces.back().oracle_id != oracle_id) {
      if (frame != 0)
        throw std::runtime_error("trace block must start at frame 0: " + line);
      traces.push_back({oracle_id, {}, {}});
    } else if (frame != traces.back().raw.size()) {
      throw std::runtime_error("trace rows out of order: " + line);
    }
    traces.back().raw.push_back(raw);
    traces.back().smoothed.push_back(smoothed);
  }
  return traces;
}

void save_alarms(const std::vector<AlarmEvent>& alarms,
                 const std::filesystem::path& path) {
  std::string out;
  for (const AlarmEvent& a : alarms) {
    json j = {{"recording_id", a.recording_id},
              {"oracle_id", a.oracle_id},
              {"frame", a.frame},
              {"smoothed", a.smoothed}};
    out += j.dump() + "\n";
  }
  write_file_atomic(path, out);
}

std::vector<AlarmEvent> load_alarms(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<AlarmEvent> alarms;
  for (size_t start = 0; start < text.size();) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    json j = json::parse(line);
    AlarmEvent a;
    a.recording_id = j.at("recording_id").get<std::string>();
    a.oracle_id = j.at("oracle_id").get<std::string>();
    a.frame = j.at("frame").get<int>();
    a.smoothed = j.at("smoothed").get<double>();
    alarms.push_back(std::move(a));
  }
  return alarms;
}

}  // namespace lanemon::monitor
