// lanemon/imgops.hpp
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
// Pixel transforms used by the runtime monitor's input relations and by the
// synthetic-camera pipeline. All of them are pure functions of their inputs
// (noise takes an explicit seed), so repeated runs are byte-identical.

#ifndef LANEMON_IMGOPS_HPP_
#define LANEMON_IMGOPS_HPP_

#include <cstdint>

#include "lanemon/image.hpp"

namespace lanemon::img {

// Mirrors columns; channel order within a pixel is preserved.
Image flip_horizontal(const Image& im);

// Saturating subtraction on every channel.
Image reduce_brightness(const Image& im, int delta = 77);

// Float-precision HSV, h in [0,360), s and v in [0,1].
struct HsvF {
  float h, s, v;
};
HsvF rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
void hsv_to_rgb(const HsvF& hsv, std::uint8_t* r, std::uint8_t* g,
                std::uint8_t* b);

// Byte-quantized HSV with hue stored as degrees/2 (0..179), matching the
// common 8-bit convention. Lossier than the float path; provided for
// interoperability, not used by set_saturation.
void rgb_to_hsv_bytes(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                      std::uint8_t* h2, std::uint8_t* s, std::uint8_t* v);
void hsv_bytes_to_rgb(std::uint8_t h2, std::uint8_t s, std::uint8_t v,
                      std::uint8_t* r, std::uint8_t* g, std::uint8_t* b);

// Rewrites every pixel's saturation to saturation/255, keeping hue and value.
// Conversion runs at float precision so an untouched S would round-trip
// within +-1 per channel.
Image set_saturation(const Image& im, int saturation = 50);

// Per-pixel relative noise: one rate r ~ U[-max_rate, +max_rate] is drawn per
// pixel and applied to all of its channels as round(c * (1 + r)), clamped.
// With max_rate 0.2 no channel moves by more than 51.
Image add_uniform_noise(const Image& im, double max_rate, std::uint64_t seed);

// Mean filter with replicate borders. Integer arithmetic, ties round up:
// out = (2*sum + n) / (2*n) with n = kw*kh.
Image box_blur(const Image& im, int kw = 5, int kh = 1);

}  // namespace lanemon::img

#endif  // LANEMON_IMGOPS_HPP_
