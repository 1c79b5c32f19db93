// src/imgops.cpp
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

#include "lanemon/imgops.hpp"

#include <algorithm>
#include <cmath>

#include "lanemon/common.hpp"
#include "lanemon/rng.hpp"

namespace lanemon::img {

Image flip_horizontal(const Image& im) {
  Image out(im.width, im.height, im.channels);
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width; ++x)
      for (int c = 0; c < im.channels; ++c)
        out.at(y, x, c) = im.at(y, im.width - 1 - x, c);
  return out;
}

Image reduce_brightness(const Image& im, int delta) {
  LANEMON_CHECK(delta >= 0, "brightness delta must be non-negative");
  Image out = im;
  for (auto& v : out.data) v = static_cast<std::uint8_t>(std::max(0, v - delta));
  return out;
}

HsvF rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  float fr = r / 255.0f, fg = g / 255.0f, fb = b / 255.0f;
  float mx = std::max({fr, fg, fb});
  float mn = std::min({fr, fg, fb});
  float d = mx - mn;
  HsvF hsv;
  hsv.v = mx;
  hsv.s = mx == 0.0f ? 0.0f : d / mx;
  if (d == 0.0f) {
    hsv.h = 0.0f;
  } else if (mx == fr) {
    hsv.h = 60.0f * ((fg - fb) / d);
  } else if (mx == fg) {
    hsv.h = 60.0f * ((fb - fr) / d + 2.0f);
  } else {
    hsv.h = 60.0f * ((fr - fg) / d + 4.0f);
  }
  if (hsv.h < 0.0f) hsv.h += 360.0f;
  if (hsv.h >= 360.0f) hsv.h -= 360.0f;
  return hsv;
}

void hsv_to_rgb(const HsvF& hsv, std::uint8_t* r, std::uint8_t* g,
                std::uint8_t* b) {
  float c = hsv.v * hsv.s;
  float hp = hsv.h / 60.0f;
  float x = c * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
  float r1 = 0, g1 = 0, b1 = 0;
  int sector = static_cast<int>(hp);
  switch (sector) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  float m = hsv.v - c;
  auto q = [](float f) {
    return static_cast<std::uint8_t>(
        std::clamp(static_cast<long>(std::lround(f * 255.0f)), 0L, 255L));
  };
  *r = q(r1 + m);
  *g = q(g1 + m);
  *b = q(b1 + m);
}

void rgb_to_hsv_bytes(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                      std::uint8_t* h2, std::uint8_t* s, std::uint8_t* v) {
  HsvF f = rgb_to_hsv(r, g, b);
  long h = std::lround(f.h / 2.0f);
  if (h >= 180) h -= 180;
  *h2 = static_cast<std::uint8_t>(h);
  *s = static_cast<std::uint8_t>(std::clamp(std::lround(f.s * 255.0f), 0L, 255L));
  *v = static_cast<std::uint8_t>(std::clamp(std::lround(f.v * 255.0f), 0L, 255L));
}

void hsv_bytes_to_rgb(std::uint8_t h2, std::uint8_t s, std::uint8_t v,
                      std::uint8_t* r, std::uint8_t* g, std::uint8_t* b) {
  HsvF f{2.0f * h2, s / 255.0f, v / 255.0f};
  hsv_to_rgb(f, r, g, b);
}

Image set_saturation(const Image& im, int saturation) {
  LANEMON_CHECK(im.channels == 3, "saturation rewrite needs RGB");
  LANEMON_CHECK(saturation >= 0 && saturation <= 255, "saturation out of range");
  Image out(im.width, im.height, 3);
  float target = saturation / 255.0f;
  for (int y = 0; y < im.height; ++y) {
    for (int x = 0; x < im.width; ++x) {
      HsvF hsv = rgb_to_hsv(im.at(y, x, 0), im.at(y, x, 1), im.at(y, x, 2));
      hsv.s = target;
      hsv_to_rgb(hsv, &out.at(y, x, 0), &out.at(y, x, 1), &out.at(y, x, 2));
    }
  }
  return out;
}

Image add_uniform_noise(const Image& im, double max_rate, std::uint64_t seed) {
  LANEMON_CHECK(max_rate >= 0.0 && max_rate < 1.0, "noise rate out of range");
  SplitMix64 rng(seed);
  Image out(im.width, im.height, im.channels);
  for (int y = 0; y < im.height; ++y) {
    for (int x = 0; x < im.width; ++x) {
      double r = rng.uniform(-max_rate, max_rate);
      for (int c = 0; c < im.channels; ++c) {
        long v = std::lround(im.at(y, x, c) * (1.0 + r));
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
      }
    }
  }
  return out;
}

Image box_blur(const Image& im, int kw, int kh) {
  LANEMON_CHECK(kw >= 1 && kh >= 1, "kernel must be at least 1x1");
  Image out(im.width, im.height, im.channels);
  int n = kw * kh;
  int ox = kw / 2, oy = kh / 2;
  for (int y = 0; y < im.height; ++y) {
    for (int x = 0; x < im.width; ++x) {
      for (int c = 0; c < im.channels; ++c) {
        int sum = 0;
        for (int dy = 0; dy < kh; ++dy) {
          int sy = std::clamp(y + dy - oy, 0, im.height - 1);
          for (int dx = 0; dx < kw; ++dx) {
            int sx = std::clamp(x + dx - ox, 0, im.width - 1);
            sum += im.at(sy, sx, c);
          }
        }
        out.at(y, x, c) = static_cast<std::uint8_t>((2 * sum + n) / (2 * n));
      }
    }
  }
  return out;
}

}  // namespace lanemon::img
