// lanemon/recording.cpp
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

#include "lanemon/recording.hpp"

#include <cctype>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lanemon/common.hpp"

namespace lanemon::sim {

using json = nlohmann::json;

namespace {

const char* kind_name(RecordingCondition::Kind k) {
  switch (k) {
    case RecordingCondition::kNominal: return "nominal";
    case RecordingCondition::kAnomaly: return "anomaly";
    case RecordingCondition::kMutant: return "mutant";
  }
  throw std::logic_error("bad condition kind");
}

RecordingCondition::Kind kind_from_name(const std::string& s) {
  if (s == "nominal") return RecordingCondition::kNominal;
  if (s == "anomaly") return RecordingCondition::kAnomaly;
  if (s == "mutant") return RecordingCondition::kMutant;
  throw std::invalid_argument("unknown recording condition: " + s);
}

std::filesystem::path frame_path(const std::filesystem::path& dir, int i) {
  return dir / "frames" / strfmt("%06d.ppm", i);
}

}  // namespace

std::string RecordingCondition::label() const {
  switch (kind) {
    case kNominal:
      return "nominal";
    case kAnomaly:
      return strfmt("anomaly-%s-%d", corruption.c_str(), severity);
    case kMutant: {
      std::string op = mutant_op;
      for (char& c : op) c = static_cast<char>(std::tolower(c));
      return strfmt("mutant-%s-%g-m%02d", op.c_str(), mutant_param,
                    model_index);
    }
  }
  throw std::logic_error("bad condition kind");
}

RecordingCondition RecordingCondition::nominal() { return {}; }

RecordingCondition RecordingCondition::anomaly(const std::string& corruption,
                                               int severity, int onset_frame) {
  RecordingCondition c;
  c.kind = kAnomaly;
  c.corruption = corruption;
  c.severity = severity;
  c.onset_frame = onset_frame;
  return c;
}

RecordingCondition RecordingCondition::mutant(const std::string& op,
                                              double param, int model_index) {
  RecordingCondition c;
  c.kind = kMutant;
  c.mutant_op = op;
  c.mutant_param = param;
  c.model_index = model_index;
  return c;
}

Recording make_recording(std::string id, std::string circuit_id,
                         std::uint64_t seed, RecordingCondition condition,
                         const EpisodeResult& ep) {
  Recording rec;
  rec.meta.id = std::move(id);
  rec.meta.circuit_id = std::move(circuit_id);
  rec.meta.seed = seed;
  rec.meta.condition = std::move(condition);
  rec.meta.oob_frame = ep.oob_frame;
  rec.meta.n_frames = static_cast<int>(ep.frames.size());
  LANEMON_CHECK(
      ep.oob_frame == -1 ||
          ep.oob_frame == static_cast<int>(ep.frames.size()) - 1,
      "an out-of-bounds frame must terminate the episode");
  rec.frames.reserve(ep.frames.size());
  rec.controls.reserve(ep.frames.size());
  rec.labels.reserve(ep.frames.size());
  for (const FrameRecord& f : ep.frames) {
    rec.frames.push_back(f.image);
    rec.controls.push_back(f.executed);
    rec.labels.push_back(f.label);
  }
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& dir) {
  const int n = static_cast<int>(rec.frames.size());
  LANEMON_CHECK(rec.meta.n_frames == n, "manifest frame count out of sync");
  LANEMON_CHECK(static_cast<int>(rec.controls.size()) == n &&
                    static_cast<int>(rec.labels.size()) == n,
                "controls and labels must cover every frame");
  std::filesystem::create_directories(dir / "frames");

  const RecordingCondition& c = rec.meta.condition;
  json manifest = {{"version", 1},
                   {"id", rec.meta.id},
                   {"circuit_id", rec.meta.circuit_id},
                   {"fps", rec.meta.fps},
                   {"seed", rec.meta.seed},
                   {"condition",
                    {{"kind", kind_name(c.kind)},
                     {"corruption", c.corruption},
                     {"severity", c.severity},
                     {"onset_frame", c.onset_frame},
                     {"mutant_op", c.mutant_op},
                     {"mutant_param", c.mutant_param},
                     {"model_index", c.model_index}}},
                   {"oob_frame", rec.meta.oob_frame},
                   {"n_frames", rec.meta.n_frames}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

  std::string csv = "index,steering,throttle,label_steering,label_throttle\n";
  for (int i = 0; i < n; ++i)
    csv += strfmt("%d,%.17g,%.17g,%.17g,%.17g\n", i, rec.controls[i].steering,
                  rec.controls[i].throttle, rec.labels[i].steering,
                  rec.labels[i].throttle);
  write_file_atomic(dir / "controls.csv", csv);

  for (int i = 0; i < n; ++i) img::write_ppm(rec.frames[i], frame_path(dir, i));
}

RecordingMeta load_recording_meta(const std::filesystem::path& dir) {
  const auto mpath = dir / "manifest.json";
  if (!std::filesystem::exists(mpath))
    throw std::runtime_error("no recording manifest at " + mpath.string());
  json j = json::parse(read_text_file(mpath));
  RecordingMeta meta;
  meta.id = j.at("id").get<std::string>();
  meta.circuit_id = j.at("circuit_id").get<std::string>();
  meta.fps = j.at("fps").get<int>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  const json& c = j.at("condition");
  meta.condition.kind = kind_from_name(c.at("kind").get<std::string>());
  meta.condition.corruption = c.at("corruption").get<std::string>();
  meta.condition.severity = c.at("severity").get<int>();
  meta.condition.onset_frame = c.at("onset_frame").get<int>();
  meta.condition.mutant_op = c.at("mutant_op").get<std::string>();
  meta.condition.mutant_param = c.at("mutant_param").get<double>();
  meta.condition.model_index = c.at("model_index").get<int>();
  meta.oob_frame = j.at("oob_frame").get<int>();
  meta.n_frames = j.at("n_frames").get<int>();
  return meta;
}

Recording load_recording(const std::filesystem::path& dir) {
  Recording rec;
  rec.meta = load_recording_meta(dir);

  const std::string csv = read_text_file(dir / "controls.csv");
  size_t pos = csv.find('\n');
  if (pos == std::string::npos)
    throw std::runtime_error("controls.csv is empty in " + dir.string());
  int row = 0;
  for (size_t start = pos + 1; start < csv.size();) {
    size_t end = csv.find('\n', start);
    if (end == std::string::npos) end = csv.size();
    const std::string line = csv.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    int idx = 0;
    Controls ctl, lbl;
    if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg,%lg", &idx, &ctl.steering,
                    &ctl.throttle, &lbl.steering, &lbl.throttle) != 5)
      throw std::runtime_error("bad controls row in " + dir.string() + ": " +
                               line);
    if (idx != row)
      throw std::runtime_error(
          strfmt("controls.csv rows out of order at %d in %s", row,
                 dir.string().c_str()));
    rec.controls.push_back(ctl);
    rec.labels.push_back(lbl);
    ++row;
  }
  if (row != rec.meta.n_frames)
    throw std::runtime_error(
        strfmt("controls.csv has %d rows, manifest says %d frames", row,
               rec.meta.n_frames));

  rec.frames.reserve(rec.meta.n_frames);
  for (int i = 0; i < rec.meta.n_frames; ++i) {
    const auto p = frame_path(dir, i);
    if (!std::filesystem::exists(p))
      throw std::runtime_error("missing frame file " + p.string());
    rec.frames.push_back(img::read_ppm(p));
  }
  return rec;
}

}  // namespace lanemon::sim
