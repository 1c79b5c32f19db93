// src/image.cpp
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

#include "lanemon/image.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include "lanemon/common.hpp"

namespace lanemon::img {

namespace fs = std::filesystem;

std::string ppm_bytes(const Image& im) {
  LANEMON_CHECK(im.channels == 3, "P6 output needs a 3-channel image");
  LANEMON_CHECK(im.width > 0 && im.height > 0, "empty image");
  std::string out = strfmt("P6\n%d %d\n255\n", im.width, im.height);
  out.append(reinterpret_cast<const char*>(im.data.data()), im.data.size());
  return out;
}

void write_ppm(const Image& im, const fs::path& path) {
  write_file_atomic(path, ppm_bytes(im));
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
size_t next_token(const std::string& s, size_t pos, std::string* tok) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])))
    ++pos;
  *tok = s.substr(start, pos - start);
  return pos;
}

}  // namespace

Image parse_ppm(const std::string& bytes) {
  std::string tok;
  size_t pos = next_token(bytes, 0, &tok);
  if (tok != "P6") throw std::runtime_error("not a P6 image");
  std::string ws, hs, ms;
  pos = next_token(bytes, pos, &ws);
  pos = next_token(bytes, pos, &hs);
  pos = next_token(bytes, pos, &ms);
  int w = std::stoi(ws), h = std::stoi(hs), maxval = std::stoi(ms);
  if (w <= 0 || h <= 0) throw std::runtime_error("bad P6 dimensions");
  if (maxval != 255) throw std::runtime_error("unsupported P6 maxval");
  if (pos >= bytes.size()) throw std::runtime_error("truncated P6 header");
  ++pos;  // single whitespace byte after maxval
  size_t need = static_cast<size_t>(w) * h * 3;
  if (bytes.size() - pos < need) throw std::runtime_error("truncated P6 data");
  Image im(w, h, 3);
  std::copy_n(bytes.begin() + static_cast<long>(pos), need, im.data.begin());
  return im;
}

Image read_ppm(const fs::path& path) { return parse_ppm(read_text_file(path)); }

}  // namespace lanemon::img
