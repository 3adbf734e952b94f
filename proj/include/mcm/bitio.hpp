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

// MSB-first bit packing.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mcm/error.hpp"

namespace mcm::entropy {

class BitWriter {
 public:
  void put_bit(bool bit) {
    if (bit_count_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= uint8_t(0x80u >> (bit_count_ % 8));
    ++bit_count_;
  }

  // Writes the low `count` bits of `value`, most significant first.
  void put_bits(uint32_t value, int count) {
    for (int i = count - 1; i >= 0; --i) put_bit((value >> i) & 1u);
  }

  size_t bit_count() const { return bit_count_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
  size_t bit_count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes)
      : bytes_(bytes), limit_(bytes.size() * 8) {}
  BitReader(std::span<const uint8_t> bytes, size_t bit_limit)
      : bytes_(bytes), limit_(bit_limit) {}

  bool get_bit() {
    check_stream(pos_ < limit_, "bit stream truncated");
    const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    ++pos_;
    return bit;
  }

  uint32_t get_bits(int count) {
    uint32_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | uint32_t(get_bit());
    return v;
  }

  size_t position() const { return pos_; }
  size_t remaining() const { return limit_ - pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t limit_;
  size_t pos_ = 0;
};

}  // namespace mcm::entropy
