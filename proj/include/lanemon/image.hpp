// lanemon/image.hpp
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

#ifndef LANEMON_IMAGE_HPP_
#define LANEMON_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lanemon::img {

// Interleaved byte raster, row major. The camera produces 120x160x3 but
// nothing below assumes those dimensions.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size() const { return data.size(); }

  bool operator==(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels &&
           data == o.data;
  }
};

// Binary PPM (P6, maxval 255). Requires channels == 3.
std::string ppm_bytes(const Image& im);
void write_ppm(const Image& im, const std::filesystem::path& path);

// Accepts comments and arbitrary whitespace in the header; maxval must be 255.
Image parse_ppm(const std::string& bytes);
Image read_ppm(const std::filesystem::path& path);

}  // namespace lanemon::img

#endif  // LANEMON_IMAGE_HPP_
