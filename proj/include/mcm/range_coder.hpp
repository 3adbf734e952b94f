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

// Carry-less 32-bit range coder with adaptive frequency models.
//
// The coder renormalizes a byte at a time whenever the top byte of the
// interval is settled, or when the range falls below 2^16 (in which case the
// range is truncated to the next 2^16 boundary instead of propagating a carry).
// Model totals therefore stay at or below 2^16.

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcm/error.hpp"

namespace mcm::entropy {

inline constexpr uint32_t kRangeTop = 1u << 24;
inline constexpr uint32_t kRangeBottom = 1u << 16;
inline constexpr uint32_t kMaxTotal = kRangeBottom;

// Adaptive counts over a fixed alphabet. Every count starts at 1 and grows by
// `increment` per coded symbol; once the total could overflow 2^16 on the next
// update all counts are halved (never below 1).
class FreqModel {
 public:
  explicit FreqModel(size_t alphabet, uint32_t increment = 24)
      : counts_(alphabet, 1),
        total_(uint32_t(alphabet)),
        increment_(increment),
        limit_(kMaxTotal - std::max<uint32_t>(uint32_t(alphabet), increment)) {
    require(alphabet >= 2 && alphabet <= 4096, "model alphabet must be in [2, 4096]");
    require(increment >= 1 && increment <= 1024, "model increment out of range");
  }

  size_t alphabet() const { return counts_.size(); }
  uint32_t total() const { return total_; }
  uint32_t count(size_t s) const { return counts_[s]; }

  uint32_t cumulative(size_t s) const {
    uint32_t c = 0;
    for (size_t i = 0; i < s; ++i) c += counts_[i];
    return c;
  }

  // Symbol whose cumulative interval contains `target`; sets `low` to its
  // cumulative start.
  size_t find(uint32_t target, uint32_t& low) const {
    uint32_t c = 0;
    for (size_t s = 0; s < counts_.size(); ++s) {
      if (target < c + counts_[s]) {
        low = c;
        return s;
      }
      c += counts_[s];
    }
    fail(ErrorKind::kCorruption, "range decoder target outside model");
  }

  void update(size_t s) {
    counts_[s] += increment_;
    total_ += increment_;
    if (total_ > limit_) rescale();
  }

 private:
  void rescale() {
    total_ = 0;
    for (uint32_t& c : counts_) {
      c = std::max<uint32_t>(c / 2, 1);
      total_ += c;
    }
  }

  std::vector<uint32_t> counts_;
  uint32_t total_;
  uint32_t increment_;
  uint32_t limit_;
};

class RangeEncoder {
 public:
  void encode(uint32_t cum, uint32_t freq, uint32_t total) {
    range_ /= total;
    low_ += cum * range_;
    range_ *= freq;
    normalize();
  }

  void encode(FreqModel& model, size_t symbol) {
    require(symbol < model.alphabet(), "symbol outside model alphabet");
    encode(model.cumulative(symbol), model.count(symbol), model.total());
    model.update(symbol);
  }

  // One equiprobable bit.
  void encode_bit(bool bit) { encode(bit ? 1 : 0, 1, 2); }

  std::vector<uint8_t> finish() {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(uint8_t(low_ >> 24));
      low_ <<= 8;
    }
    return std::move(out_);
  }

 private:
  void normalize() {
    for (;;) {
      if ((low_ ^ (low_ + range_)) >= kRangeTop) {
        if (range_ >= kRangeBottom) break;
        range_ = (0u - low_) & (kRangeBottom - 1);
      }
      out_.push_back(uint8_t(low_ >> 24));
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes) : in_(bytes) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }

  uint32_t peek(uint32_t total) {
    range_ /= total;
    const uint32_t target = (code_ - low_) / range_;
    check_stream(target < total, "range decoder out of sync");
    return target;
  }

  void consume(uint32_t cum, uint32_t freq) {
    low_ += cum * range_;
    range_ *= freq;
    normalize();
  }

  size_t decode(FreqModel& model) {
    const uint32_t target = peek(model.total());
    uint32_t cum = 0;
    const size_t s = model.find(target, cum);
    consume(cum, model.count(s));
    model.update(s);
    return s;
  }

  bool decode_bit() {
    const uint32_t bit = peek(2);
    consume(bit, 1);
    return bit != 0;
  }

  size_t bytes_consumed() const { return pos_; }

 private:
  uint8_t next_byte() {
    check_stream(pos_ < in_.size(), "range coded stream truncated");
    return in_[pos_++];
  }

  void normalize() {
    for (;;) {
      if ((low_ ^ (low_ + range_)) >= kRangeTop) {
        if (range_ >= kRangeBottom) break;
        range_ = (0u - low_) & (kRangeBottom - 1);
      }
      code_ = (code_ << 8) | next_byte();
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Codes a whole symbol sequence with one freshly constructed model.
inline std::vector<uint8_t> range_encode(std::span<const uint32_t> symbols,
                                         const FreqModel& initial) {
  FreqModel model = initial;
  RangeEncoder enc;
  for (uint32_t s : symbols) enc.encode(model, s);
  return enc.finish();
}

inline std::vector<uint32_t> range_decode(std::span<const uint8_t> bytes,
                                          const FreqModel& initial,
                                          size_t count) {
  FreqModel model = initial;
  RangeDecoder dec(bytes);
  std::vector<uint32_t> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(uint32_t(dec.decode(model)));
  return out;
}

}  // namespace mcm::entropy
