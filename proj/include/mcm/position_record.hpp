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

// Position record: the L-bit visibility bitmap sent alongside the latents.
//
// Payload layout (byte 0 selects the mode):
//   0  raw        ceil(L/8) bytes, bit l at byte l/8, MSB first.
//   1  RLE, full  256 4-bit code lengths (128 bytes), then the Huffman-coded
//                 run stream, zero-padded to a byte.
//   2  RLE, sparse  u8 (n-1), n coded run symbols ascending, n 4-bit code
//                 lengths zero-padded to a byte, then the run stream as in 1.
// Runs alternate starting with the run of zeros (possibly empty). A run longer
// than 255 is split as 255, 0, remainder... so every symbol fits a byte.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcm/bitio.hpp"
#include "mcm/error.hpp"
#include "mcm/huffman.hpp"

namespace mcm::entropy {

enum class RecordMode : uint8_t {
  kRaw = 0,
  kRleFullTable = 1,
  kRleSparseTable = 2,
};

inline constexpr size_t kRunAlphabet = 256;

struct PositionRecord {
  std::vector<bool> bits;  // bits[l] == true iff patch l is visible

  static PositionRecord from_visible(std::span<const uint32_t> visible,
                                     size_t patches) {
    PositionRecord rec{std::vector<bool>(patches, false)};
    for (uint32_t l : visible) {
      require(l < patches, "visible index out of range");
      rec.bits[l] = true;
    }
    return rec;
  }

  size_t size() const { return bits.size(); }
  size_t popcount() const { return size_t(std::count(bits.begin(), bits.end(), true)); }

  std::vector<uint32_t> visible_indices() const {
    std::vector<uint32_t> out;
    for (size_t l = 0; l < bits.size(); ++l) {
      if (bits[l]) out.push_back(uint32_t(l));
    }
    return out;
  }

  bool operator==(const PositionRecord&) const = default;
};

inline std::vector<uint16_t> record_runs(const PositionRecord& rec) {
  std::vector<uint16_t> runs;
  bool color = false;
  size_t i = 0;
  while (i < rec.bits.size()) {
    size_t run = 0;
    while (i < rec.bits.size() && rec.bits[i] == color) {
      ++run;
      ++i;
    }
    while (run > 255) {
      runs.push_back(255);
      runs.push_back(0);
      run -= 255;
    }
    runs.push_back(uint16_t(run));
    color = !color;
  }
  return runs;
}

namespace record_detail {

inline size_t bytes_for_bits(size_t bits) { return (bits + 7) / 8; }

inline std::vector<uint8_t> encode_raw(const PositionRecord& rec) {
  std::vector<uint8_t> out(1 + bytes_for_bits(rec.size()), 0);
  out[0] = uint8_t(RecordMode::kRaw);
  for (size_t l = 0; l < rec.size(); ++l) {
    if (rec.bits[l]) out[1 + l / 8] |= uint8_t(0x80u >> (l % 8));
  }
  return out;
}

inline std::vector<uint8_t> encode_rle(std::span<const uint16_t> runs,
                                       const HuffmanTable& table,
                                       RecordMode mode) {
  BitWriter w;
  w.put_bits(uint32_t(mode), 8);
  const auto& lengths = table.lengths();
  if (mode == RecordMode::kRleFullTable) {
    for (uint8_t len : lengths) w.put_bits(len, 4);
  } else {
    std::vector<uint8_t> used;
    for (size_t s = 0; s < lengths.size(); ++s) {
      if (lengths[s]) used.push_back(uint8_t(s));
    }
    w.put_bits(uint32_t(used.size() - 1), 8);
    for (uint8_t s : used) w.put_bits(s, 8);
    for (uint8_t s : used) w.put_bits(lengths[s], 4);
    while (w.bit_count() % 8) w.put_bit(false);
  }
  huffman_encode(runs, table, w);
  return w.take();
}

}  // namespace record_detail

// Emits whichever of the three modes is smallest (ties favour the lower mode).
inline std::vector<uint8_t> encode_position_record(const PositionRecord& rec) {
  require(!rec.bits.empty(), "position record is empty");
  auto best = record_detail::encode_raw(rec);
  const auto runs = record_runs(rec);
  std::vector<uint64_t> freqs(kRunAlphabet, 0);
  for (uint16_t r : runs) ++freqs[r];
  const auto table = huffman_build(freqs);
  for (RecordMode mode : {RecordMode::kRleFullTable, RecordMode::kRleSparseTable}) {
    auto candidate = record_detail::encode_rle(runs, table, mode);
    if (candidate.size() < best.size()) best = std::move(candidate);
  }
  return best;
}

// Rebuilds an L-bit record. The payload must be consumed exactly; when
// `expected_visible` is given the popcount must match it.
inline PositionRecord decode_position_record(
    std::span<const uint8_t> payload, size_t patches,
    std::optional<size_t> expected_visible = std::nullopt) {
  check_stream(!payload.empty(), "position record truncated");
  PositionRecord rec{std::vector<bool>(patches, false)};
  const auto mode = RecordMode(payload[0]);
  if (mode == RecordMode::kRaw) {
    const size_t need = 1 + record_detail::bytes_for_bits(patches);
    check_stream(payload.size() >= need, "position record truncated");
    check_stream(payload.size() == need, "position record has trailing bytes");
    for (size_t l = 0; l < patches; ++l) {
      rec.bits[l] = (payload[1 + l / 8] >> (7 - l % 8)) & 1u;
    }
  } else if (mode == RecordMode::kRleFullTable ||
             mode == RecordMode::kRleSparseTable) {
    BitReader r(payload);
    r.get_bits(8);
    std::vector<uint8_t> lengths(kRunAlphabet, 0);
    if (mode == RecordMode::kRleFullTable) {
      for (auto& len : lengths) len = uint8_t(r.get_bits(4));
    } else {
      const size_t used = r.get_bits(8) + 1;
      std::vector<uint8_t> symbols(used);
      for (auto& s : symbols) s = uint8_t(r.get_bits(8));
      check_stream(std::is_sorted(symbols.begin(), symbols.end()) &&
                       std::adjacent_find(symbols.begin(), symbols.end()) ==
                           symbols.end(),
                   "position record symbol list is not strictly ascending");
      for (uint8_t s : symbols) lengths[s] = uint8_t(r.get_bits(4));
      while (r.position() % 8) r.get_bit();
    }
    HuffmanTable table;
    try {
      table = HuffmanTable::from_lengths(lengths);
    } catch (const Error& e) {
      fail(ErrorKind::kCorruption, "position record table: " + e.message());
    }
    size_t filled = 0;
    bool color = false;
    while (filled < patches) {
      const size_t run = table.decode_symbol(r);
      check_stream(filled + run <= patches, "position record runs overflow L");
      std::fill_n(rec.bits.begin() + std::ptrdiff_t(filled), run, color);
      filled += run;
      color = !color;
    }
    check_stream(record_detail::bytes_for_bits(r.position()) == payload.size(),
                 "position record has trailing bytes");
  } else {
    fail(ErrorKind::kCorruption,
         "unknown position record mode " + std::to_string(payload[0]));
  }
  if (expected_visible && rec.popcount() != *expected_visible) {
    fail(ErrorKind::kCorruption,
         "position record has " + std::to_string(rec.popcount()) +
             " visible patches, header declares " +
             std::to_string(*expected_visible));
  }
  return rec;
}

}  // namespace mcm::entropy
