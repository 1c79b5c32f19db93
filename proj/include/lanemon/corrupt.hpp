// include/lanemon/corrupt.hpp
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
// Scheduled camera-frame corruptions. Each kind comes in five severities
// whose parameters live in a committed JSON table; severity only ever scales
// an effect, it never reshapes it, so distortion grows monotonically.

#ifndef LANEMON_CORRUPT_HPP_
#define LANEMON_CORRUPT_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lanemon/image.hpp"

namespace lanemon::corrupt {

enum class Kind : int {
  kGaussianNoise = 0,
  kShotNoise,
  kImpulseNoise,
  kDefocusBlur,
  kGlassBlur,
  kFog,
  kBrightness,
  kContrast,
  kPixelate,
  kJpegCompression,
  kSpeckleNoise,
  kGaussianBlur,
  kSpatter,
  kSaturate,
};
inline constexpr int kKindCount = 14;

// The closed list, in enum order; parse errors name the offender.
const std::vector<std::string>& kind_names();
Kind kind_from_string(const std::string& name);
const std::string& kind_to_string(Kind k);

struct CorruptionSpec {
  Kind kind = Kind::kGaussianNoise;
  int severity = 1;  // 1..5
  int onset_frame = 200;
  std::uint64_t seed = 0;
};

// Per-kind, per-severity parameter tuples loaded from a committed JSON file.
// Loading validates the closed kind list, that every parameter column is
// monotone in its declared direction, and that consecutive severity tuples
// actually differ.
class SeverityTable {
 public:
  static SeverityTable load(const std::filesystem::path& path);
  static SeverityTable load_json(const std::string& text);

  // Parameter tuple for a kind at severity 1..5.
  const std::vector<double>& params(Kind k, int severity) const;
  const std::string& formula(Kind k) const;
  int version() const { return version_; }

 private:
  SeverityTable() = default;
  int version_ = 0;
  std::array<std::array<std::vector<double>, 5>, kKindCount> levels_;
  std::array<std::string, kKindCount> formula_;
};

// Applies one corruption to one frame. Stochastic kinds draw from streams
// derived from (spec.seed, frame), never from the severity, so raising the
// severity rescales the same noise instead of redrawing it.
img::Image apply_corruption(const SeverityTable& table,
                            const CorruptionSpec& spec, const img::Image& img,
                            int frame);

// Frame-indexed transformer: identity before spec.onset_frame, corruption at
// and after it. Two streams with equal specs agree bit for bit.
std::function<img::Image(const img::Image&, int)> corruption_stream(
    const SeverityTable& table, const CorruptionSpec& spec);

// Diamond-square plasma in [0,1], used by fog and spatter; exposed for tests.
Eigen::ArrayXXf plasma_field(int height, int width, std::uint64_t seed);

}  // namespace lanemon::corrupt

#endif  // LANEMON_CORRUPT_HPP_
