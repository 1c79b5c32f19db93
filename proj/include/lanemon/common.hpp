// lanemon/common.hpp
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

#ifndef LANEMON_COMMON_HPP_
#define LANEMON_COMMON_HPP_

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lanemon {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a, 64 bit. Used for config fingerprints and architecture hashes.
constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// printf-style formatting into a std::string.
inline std::string strfmt(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  va_list ap2;
  va_copy(ap2, ap);
  int n = std::vsnprintf(nullptr, 0, fmt, ap);
  va_end(ap);
  std::string out;
  if (n > 0) {
    out.resize(static_cast<size_t>(n));
    std::vsnprintf(out.data(), out.size() + 1, fmt, ap2);
  }
  va_end(ap2);
  return out;
}

std::string read_text_file(const std::filesystem::path& path);

// Writes via a sibling temp file followed by an atomic rename, so readers
// never observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Internal invariant check; always on.
#define LANEMON_CHECK(cond, msg)                                              \
  do {                                                                        \
    if (!(cond)) throw std::logic_error(std::string("check failed: ") + msg); \
  } while (0)

}  // namespace lanemon

#endif  // LANEMON_COMMON_HPP_
