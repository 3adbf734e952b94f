// Copyright 2026 The MCM Codec Authors. All Rights Reserved.
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

// Binary Netpbm I/O: P6 for color images, P5 for semantic label maps.

#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcm/error.hpp"
#include "mcm/image.hpp"

namespace mcm {

inline std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::kIo, "read failed for " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path,
                       std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

namespace netpbm_detail {

struct Header {
  int width = 0;
  int height = 0;
  size_t payload_offset = 0;
};

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      fail(ErrorKind::kFormat, std::string("missing ") + field + " in header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1 << 20) fail(ErrorKind::kFormat, std::string(field) + " too large");
    }
    return int(value);
  }

  size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  bool at_space() const {
    return pos_ < bytes_.size() && std::isspace(bytes_[pos_]);
  }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

inline Header parse_header(std::span<const uint8_t> bytes, char kind,
                           size_t channels) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != kind) {
    fail(ErrorKind::kFormat, std::string("expected P") + kind);
  }
  HeaderReader reader(bytes.subspan(2));
  Header h;
  h.width = reader.read_int("width");
  h.height = reader.read_int("height");
  const int maxval = reader.read_int("maxval");
  if (maxval != 255) {
    fail(ErrorKind::kFormat, "maxval must be 255, got " + std::to_string(maxval));
  }
  if (h.width <= 0 || h.height <= 0) {
    fail(ErrorKind::kFormat, "dimensions must be positive");
  }
  if (!reader.at_space()) fail(ErrorKind::kFormat, "missing separator before payload");
  reader.advance();
  h.payload_offset = 2 + reader.pos();
  const size_t need = size_t(h.width) * h.height * channels;
  if (bytes.size() - h.payload_offset < need) {
    fail(ErrorKind::kFormat, "truncated pixel payload");
  }
  return h;
}

inline std::vector<uint8_t> header_bytes(char kind, int w, int h) {
  const std::string head = std::string("P") + kind + "\n" + std::to_string(w) +
                           " " + std::to_string(h) + "\n255\n";
  return {head.begin(), head.end()};
}

}  // namespace netpbm_detail

// When `patch_size` is given the dimensions must tile into N x N patches.
inline ImageRGB decode_ppm(std::span<const uint8_t> bytes,
                           std::optional<int> patch_size = std::nullopt) {
  const auto h = netpbm_detail::parse_header(bytes, '6', 3);
  if (patch_size) PatchGrid(h.width, h.height, *patch_size);
  ImageRGB img(h.width, h.height);
  std::copy_n(bytes.begin() + h.payload_offset, img.data.size(), img.data.begin());
  return img;
}

inline ImageRGB load_ppm(const std::filesystem::path& path,
                         std::optional<int> patch_size = std::nullopt) {
  try {
    return decode_ppm(read_file(path), patch_size);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.message());
  }
}

inline std::vector<uint8_t> encode_ppm(const ImageRGB& img) {
  auto out = netpbm_detail::header_bytes('6', img.width, img.height);
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

inline void save_ppm(const ImageRGB& img, const std::filesystem::path& path) {
  write_file(path, encode_ppm(img));
}

inline SemanticMap decode_pgm(std::span<const uint8_t> bytes) {
  const auto h = netpbm_detail::parse_header(bytes, '5', 1);
  SemanticMap map(h.width, h.height);
  std::copy_n(bytes.begin() + h.payload_offset, map.labels.size(),
              map.labels.begin());
  return map;
}

inline SemanticMap load_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path));
}

inline std::vector<uint8_t> encode_pgm(const SemanticMap& map) {
  auto out = netpbm_detail::header_bytes('5', map.width, map.height);
  out.insert(out.end(), map.labels.begin(), map.labels.end());
  return out;
}

inline void save_pgm(const SemanticMap& map, const std::filesystem::path& path) {
  write_file(path, encode_pgm(map));
}

}  // namespace mcm
