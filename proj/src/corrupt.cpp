// src/corrupt.cpp
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

#include "lanemon/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lanemon/common.hpp"
#include "lanemon/imgops.hpp"
#include "lanemon/rng.hpp"

namespace lanemon::corrupt {

using img::Image;
using json = nlohmann::json;

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = {
      "gaussian_noise", "shot_noise",    "impulse_noise", "defocus_blur",
      "glass_blur",     "fog",           "brightness",    "contrast",
      "pixelate",       "jpeg_compression", "speckle_noise", "gaussian_blur",
      "spatter",        "saturate"};
  return names;
}

Kind kind_from_string(const std::string& name) {
  const auto& names = kind_names();
  for (int i = 0; i < kKindCount; ++i)
    if (names[static_cast<size_t>(i)] == name) return static_cast<Kind>(i);
  throw std::invalid_argument("unknown corruption kind: " + name);
}

const std::string& kind_to_string(Kind k) {
  return kind_names()[static_cast<size_t>(static_cast<int>(k))];
}

// ---------------------------------------------------------------------------
// Severity table

SeverityTable SeverityTable::load(const std::filesystem::path& path) {
  return load_json(read_text_file(path));
}

SeverityTable SeverityTable::load_json(const std::string& text) {
  json j = json::parse(text);
  SeverityTable t;
  t.version_ = j.at("version").get<int>();
  const json& kinds = j.at("kinds");
  if (kinds.size() != kKindCount)
    throw std::invalid_argument(strfmt("severity table lists %zu kinds, want %d",
                                       kinds.size(), kKindCount));
  for (int ki = 0; ki < kKindCount; ++ki) {
    const std::string& name = kind_names()[static_cast<size_t>(ki)];
    if (!kinds.contains(name))
      throw std::invalid_argument("severity table is missing kind: " + name);
    const json& e = kinds.at(name);
    t.formula_[static_cast<size_t>(ki)] = e.at("formula").get<std::string>();
    auto param_names = e.at("params").get<std::vector<std::string>>();
    auto directions = e.at("direction").get<std::vector<std::string>>();
    if (directions.size() != param_names.size())
      throw std::invalid_argument("direction/params arity mismatch for " + name);
    const json& levels = e.at("levels");
    if (levels.size() != 5)
      throw std::invalid_argument("kind " + name + " must list 5 severities");
    auto& out = t.levels_[static_cast<size_t>(ki)];
    for (int s = 0; s < 5; ++s) {
      out[static_cast<size_t>(s)] =
          levels.at(static_cast<size_t>(s)).get<std::vector<double>>();
      if (out[static_cast<size_t>(s)].size() != param_names.size())
        throw std::invalid_argument("level arity mismatch for " + name);
    }
    for (int s = 1; s < 5; ++s) {
      const auto& lo = out[static_cast<size_t>(s - 1)];
      const auto& hi = out[static_cast<size_t>(s)];
      bool differs = false;
      for (size_t p = 0; p < lo.size(); ++p) {
        bool up = directions[p] == "up";
        if (!up && directions[p] != "down")
          throw std::invalid_argument("direction must be up or down for " + name);
        if ((up && hi[p] < lo[p]) || (!up && hi[p] > lo[p]))
          throw std::invalid_argument(
              strfmt("kind %s parameter %zu is not monotone between severities "
                     "%d and %d",
                     name.c_str(), p, s, s + 1));
        if (hi[p] != lo[p]) differs = true;
      }
      if (!differs)
        throw std::invalid_argument(
            strfmt("kind %s repeats the same parameters at severities %d and %d",
                   name.c_str(), s, s + 1));
    }
  }
  return t;
}

const std::vector<double>& SeverityTable::params(Kind k, int severity) const {
  LANEMON_CHECK(severity >= 1 && severity <= 5, "severity must be 1..5");
  return levels_[static_cast<size_t>(static_cast<int>(k))]
                [static_cast<size_t>(severity - 1)];
}

const std::string& SeverityTable::formula(Kind k) const {
  return formula_[static_cast<size_t>(static_cast<int>(k))];
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

inline std::uint8_t clamp_byte(double v) {
  long r = std::lround(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

// One float plane per channel, replicate-border sampler.
struct Planes {
  int h = 0, w = 0;
  std::vector<float> c[3];
  explicit Planes(const Image& im) : h(im.height), w(im.width) {
    for (int k = 0; k < 3; ++k) c[k].resize(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int k = 0; k < 3; ++k)
          c[k][static_cast<size_t>(y) * w + x] = im.at(y, x, k);
  }
  float at(int k, int y, int x) const {
    y = std::clamp(y, 0, h - 1);
    x = std::clamp(x, 0, w - 1);
    return c[k][static_cast<size_t>(y) * w + x];
  }
  Image to_image() const {
    Image out(w, h, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int k = 0; k < 3; ++k)
          out.at(y, x, k) = clamp_byte(c[k][static_cast<size_t>(y) * w + x]);
    return out;
  }
};

Image gaussian_blur_image(const Image& im, double sigma) {
  int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kern(static_cast<size_t>(2 * radius + 1));
  float sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    float v = std::exp(-0.5f * static_cast<float>(i * i) /
                       static_cast<float>(sigma * sigma));
    kern[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (float& v : kern) v /= sum;

  Planes in(im);
  Planes tmp = in;
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += kern[static_cast<size_t>(i + radius)] * in.at(k, y, x + i);
        tmp.c[k][static_cast<size_t>(y) * in.w + x] = acc;
      }
  Planes out = tmp;
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += kern[static_cast<size_t>(i + radius)] * tmp.at(k, y + i, x);
        out.c[k][static_cast<size_t>(y) * in.w + x] = acc;
      }
  return out.to_image();
}

// ---------------------------------------------------------------------------
// Kinds

Image do_gaussian_noise(const Image& im, double sigma, std::uint64_t fs) {
  SplitMix64 rng(fs);
  Image out = im;
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = clamp_byte(im.data[i] + sigma * rng.normal());
  return out;
}

Image do_shot_noise(const Image& im, double photons, std::uint64_t fs) {
  Image out = im;
  int n = im.width * im.height;
  for (int p = 0; p < n; ++p) {
    SplitMix64 px(derive_seed(fs, "px", static_cast<std::uint64_t>(p)));
    for (int k = 0; k < 3; ++k) {
      double lam = im.data[static_cast<size_t>(p) * 3 + k] / 255.0 * photons;
      double draw = static_cast<double>(px.poisson(lam));
      out.data[static_cast<size_t>(p) * 3 + k] =
          clamp_byte(draw / photons * 255.0);
    }
  }
  return out;
}

Image do_impulse_noise(const Image& im, double fraction, std::uint64_t fs) {
  SplitMix64 rng(fs);
  Image out = im;
  for (size_t i = 0; i < out.data.size(); ++i) {
    double u = rng.uniform();
    double v = rng.uniform();  // always drawn: stream ignores the severity
    if (u < fraction) out.data[i] = v < 0.5 ? 0 : 255;
  }
  return out;
}

Image do_defocus_blur(const Image& im, int radius) {
  std::vector<std::pair<int, int>> taps;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= radius * radius) taps.emplace_back(dy, dx);
  float inv = 1.0f / static_cast<float>(taps.size());
  Planes in(im);
  Planes out = in;
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        float acc = 0;
        for (auto [dy, dx] : taps) acc += in.at(k, y + dy, x + dx);
        out.c[k][static_cast<size_t>(y) * in.w + x] = acc * inv;
      }
  return out.to_image();
}

Image do_glass_blur(const Image& im, int max_shift, int iterations,
                    double blur_sigma, std::uint64_t fs) {
  Image work = im;
  int span = 2 * max_shift + 1;
  for (int it = 0; it < iterations; ++it) {
    SplitMix64 rng(derive_seed(fs, "glass", static_cast<std::uint64_t>(it)));
    for (int y = 0; y < work.height; ++y)
      for (int x = 0; x < work.width; ++x) {
        int dy = static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) -
                 max_shift;
        int dx = static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) -
                 max_shift;
        int sy = std::clamp(y + dy, 0, work.height - 1);
        int sx = std::clamp(x + dx, 0, work.width - 1);
        for (int k = 0; k < 3; ++k)
          std::swap(work.at(y, x, k), work.at(sy, sx, k));
      }
  }
  return gaussian_blur_image(work, blur_sigma);
}

Image do_fog(const Image& im, double density, std::uint64_t fs) {
  Eigen::ArrayXXf p = plasma_field(im.height, im.width, fs);
  const double fogc[3] = {240.0, 240.0, 245.0};
  Image out = im;
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width; ++x) {
      double t = density * p(y, x);
      for (int k = 0; k < 3; ++k)
        out.at(y, x, k) = clamp_byte(im.at(y, x, k) * (1.0 - t) + fogc[k] * t);
    }
  return out;
}

Image do_brightness(const Image& im, double add) {
  Image out = im;
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = clamp_byte(im.data[i] + add);
  return out;
}

Image do_contrast(const Image& im, double scale) {
  Image out = im;
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = clamp_byte((im.data[i] - 128.0) * scale + 128.0);
  return out;
}

Image do_pixelate(const Image& im, int block) {
  Image out = im;
  for (int y = 0; y < im.height; ++y) {
    int ry = std::min(y - y % block + block / 2, im.height - 1);
    for (int x = 0; x < im.width; ++x) {
      int rx = std::min(x - x % block + block / 2, im.width - 1);
      for (int k = 0; k < 3; ++k) out.at(y, x, k) = im.at(ry, rx, k);
    }
  }
  return out;
}

// Orthonormal 8x8 DCT-II basis.
Eigen::Matrix<float, 8, 8> dct_basis() {
  Eigen::Matrix<float, 8, 8> t;
  const double pi = 3.14159265358979323846;
  for (int u = 0; u < 8; ++u) {
    double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
    for (int x = 0; x < 8; ++x)
      t(u, x) = static_cast<float>(a * std::cos((2 * x + 1) * u * pi / 16.0));
  }
  return t;
}

Image do_jpeg(const Image& im, double quality) {
  static const int kLumaQ[64] = {
      16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
      14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
      18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
      49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
  static const int kChromaQ[64] = {
      17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
      24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
      99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
      99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};
  double s = quality < 50 ? 5000.0 / quality : 200.0 - 2.0 * quality;
  Eigen::Matrix<float, 8, 8> qy, qc;
  for (int i = 0; i < 64; ++i) {
    qy(i / 8, i % 8) = static_cast<float>(
        std::clamp(std::floor((kLumaQ[i] * s + 50.0) / 100.0), 1.0, 255.0));
    qc(i / 8, i % 8) = static_cast<float>(
        std::clamp(std::floor((kChromaQ[i] * s + 50.0) / 100.0), 1.0, 255.0));
  }
  static const Eigen::Matrix<float, 8, 8> kT = dct_basis();

  int h = im.height, w = im.width;
  int ph = (h + 7) / 8 * 8, pw = (w + 7) / 8 * 8;
  // YCbCr planes, edge-replicated to block multiples.
  Eigen::ArrayXXf plane[3] = {Eigen::ArrayXXf(ph, pw), Eigen::ArrayXXf(ph, pw),
                              Eigen::ArrayXXf(ph, pw)};
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) {
      int sy = std::min(y, h - 1), sx = std::min(x, w - 1);
      float r = im.at(sy, sx, 0), g = im.at(sy, sx, 1), b = im.at(sy, sx, 2);
      plane[0](y, x) = 0.299f * r + 0.587f * g + 0.114f * b;
      plane[1](y, x) = 128.0f - 0.168736f * r - 0.331264f * g + 0.5f * b;
      plane[2](y, x) = 128.0f + 0.5f * r - 0.418688f * g - 0.081312f * b;
    }
  for (int c = 0; c < 3; ++c) {
    const Eigen::Matrix<float, 8, 8>& q = c == 0 ? qy : qc;
    for (int by = 0; by < ph; by += 8)
      for (int bx = 0; bx < pw; bx += 8) {
        Eigen::Matrix<float, 8, 8> m =
            plane[c].block<8, 8>(by, bx).matrix().array() - 128.0f;
        Eigen::Matrix<float, 8, 8> d = kT * m * kT.transpose();
        Eigen::Matrix<float, 8, 8> dq =
            ((d.array() / q.array()).round() * q.array()).matrix();
        plane[c].block<8, 8>(by, bx) =
            (kT.transpose() * dq * kT).array() + 128.0f;
      }
  }
  Image out = im;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float yy = plane[0](y, x), cb = plane[1](y, x) - 128.0f,
            cr = plane[2](y, x) - 128.0f;
      out.at(y, x, 0) = clamp_byte(yy + 1.402f * cr);
      out.at(y, x, 1) = clamp_byte(yy - 0.344136f * cb - 0.714136f * cr);
      out.at(y, x, 2) = clamp_byte(yy + 1.772f * cb);
    }
  return out;
}

Image do_speckle_noise(const Image& im, double sigma, std::uint64_t fs) {
  SplitMix64 rng(fs);
  Image out = im;
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = clamp_byte(im.data[i] * (1.0 + sigma * rng.normal()));
  return out;
}

Image do_spatter(const Image& im, double threshold, std::uint64_t fs) {
  Eigen::ArrayXXf p = plasma_field(im.height, im.width, fs);
  const std::uint8_t mud[3] = {96, 72, 48};
  Image out = im;
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width; ++x)
      if (p(y, x) > threshold)
        for (int k = 0; k < 3; ++k) out.at(y, x, k) = mud[k];
  return out;
}

Image do_saturate(const Image& im, double scale, double add) {
  Image out = im;
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width; ++x) {
      img::HsvF hsv = img::rgb_to_hsv(im.at(y, x, 0), im.at(y, x, 1),
                                      im.at(y, x, 2));
      hsv.s = std::min(1.0, hsv.s * scale + add);
      std::uint8_t r, g, b;
      img::hsv_to_rgb(hsv, &r, &g, &b);
      out.at(y, x, 0) = r;
      out.at(y, x, 1) = g;
      out.at(y, x, 2) = b;
    }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::ArrayXXf plasma_field(int height, int width, std::uint64_t seed) {
  // Diamond-square on the smallest 2^n+1 grid covering the image.
  int need = std::max(height, width);
  int size = 1;
  while (size + 1 < need) size *= 2;
  size += 1;
  Eigen::ArrayXXf g(size, size);
  SplitMix64 rng(seed);
  g(0, 0) = static_cast<float>(rng.uniform());
  g(0, size - 1) = static_cast<float>(rng.uniform());
  g(size - 1, 0) = static_cast<float>(rng.uniform());
  g(size - 1, size - 1) = static_cast<float>(rng.uniform());
  double amp = 0.5;
  for (int step = size - 1; step > 1; step /= 2, amp *= 0.5) {
    int half = step / 2;
    // Diamond: centers of squares.
    for (int y = half; y < size; y += step)
      for (int x = half; x < size; x += step) {
        float avg = (g(y - half, x - half) + g(y - half, x + half) +
                     g(y + half, x - half) + g(y + half, x + half)) *
                    0.25f;
        g(y, x) = avg + static_cast<float>(rng.uniform(-amp, amp));
      }
    // Square: edge midpoints; average the available axial neighbors.
    for (int y = 0; y < size; y += half)
      for (int x = (y / half) % 2 == 0 ? half : 0; x < size; x += step) {
        float sum = 0;
        int n = 0;
        if (y - half >= 0) { sum += g(y - half, x); ++n; }
        if (y + half < size) { sum += g(y + half, x); ++n; }
        if (x - half >= 0) { sum += g(y, x - half); ++n; }
        if (x + half < size) { sum += g(y, x + half); ++n; }
        g(y, x) = sum / static_cast<float>(n) +
                  static_cast<float>(rng.uniform(-amp, amp));
      }
  }
  Eigen::ArrayXXf crop = g.block(0, 0, height, width);
  float lo = crop.minCoeff(), hi = crop.maxCoeff();
  if (hi > lo) crop = (crop - lo) / (hi - lo);
  return crop;
}

Image apply_corruption(const SeverityTable& table, const CorruptionSpec& spec,
                       const Image& im, int frame) {
  LANEMON_CHECK(im.channels == 3, "corruptions expect RGB images");
  const std::vector<double>& p = table.params(spec.kind, spec.severity);
  std::uint64_t fs =
      derive_seed(spec.seed, "corrupt", static_cast<std::uint64_t>(frame));
  switch (spec.kind) {
    case Kind::kGaussianNoise: return do_gaussian_noise(im, p[0], fs);
    case Kind::kShotNoise: return do_shot_noise(im, p[0], fs);
    case Kind::kImpulseNoise: return do_impulse_noise(im, p[0], fs);
    case Kind::kDefocusBlur: return do_defocus_blur(im, static_cast<int>(p[0]));
    case Kind::kGlassBlur:
      return do_glass_blur(im, static_cast<int>(p[0]), static_cast<int>(p[1]),
                           p[2], fs);
    case Kind::kFog: return do_fog(im, p[0], fs);
    case Kind::kBrightness: return do_brightness(im, p[0]);
    case Kind::kContrast: return do_contrast(im, p[0]);
    case Kind::kPixelate: return do_pixelate(im, static_cast<int>(p[0]));
    case Kind::kJpegCompression: return do_jpeg(im, p[0]);
    case Kind::kSpeckleNoise: return do_speckle_noise(im, p[0], fs);
    case Kind::kGaussianBlur: return gaussian_blur_image(im, p[0]);
    case Kind::kSpatter: return do_spatter(im, p[0], fs);
    case Kind::kSaturate: return do_saturate(im, p[0], p[1]);
  }
  throw std::logic_error("unreachable corruption kind");
}

std::function<img::Image(const img::Image&, int)> corruption_stream(
    const SeverityTable& table, const CorruptionSpec& spec) {
  return [table, spec](const img::Image& im, int frame) {
    if (frame < spec.onset_frame) return im;
    return apply_corruption(table, spec, im, frame);
  };
}

}  // namespace lanemon::corrupt
