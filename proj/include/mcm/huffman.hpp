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

// Canonical Huffman codes with lengths limited to 15 bits.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "mcm/bitio.hpp"
#include "mcm/error.hpp"

namespace mcm::entropy {

inline constexpr int kMaxCodeLength = 15;

class HuffmanTable {
 public:
  HuffmanTable() = default;

  // Canonical assignment: symbols sorted by (length, symbol) receive
  // consecutive codes. A zero length means the symbol has no code.
  static HuffmanTable from_lengths(std::vector<uint8_t> lengths) {
    HuffmanTable t;
    t.lengths_ = std::move(lengths);
    t.codes_.assign(t.lengths_.size(), 0);
    t.count_.fill(0);
    uint64_t kraft = 0;  // in units of 2^-kMaxCodeLength
    for (uint8_t len : t.lengths_) {
      require(len <= kMaxCodeLength, "Huffman code length exceeds 15");
      if (len == 0) continue;
      ++t.count_[len];
      kraft += uint64_t(1) << (kMaxCodeLength - len);
    }
    require(kraft <= (uint64_t(1) << kMaxCodeLength),
            "Huffman code lengths violate the Kraft inequality");

    uint32_t code = 0;
    uint32_t index = 0;
    for (int len = 1; len <= kMaxCodeLength; ++len) {
      code = (code + t.count_[len - 1]) << 1;
      t.first_code_[len] = code;
      t.first_index_[len] = index;
      index += t.count_[len];
    }
    t.sorted_.clear();
    for (int len = 1; len <= kMaxCodeLength; ++len) {
      uint32_t next = t.first_code_[len];
      for (size_t s = 0; s < t.lengths_.size(); ++s) {
        if (t.lengths_[s] == len) {
          t.codes_[s] = next++;
          t.sorted_.push_back(uint16_t(s));
        }
      }
    }
    return t;
  }

  const std::vector<uint8_t>& lengths() const { return lengths_; }
  const std::vector<uint32_t>& codes() const { return codes_; }
  size_t alphabet_size() const { return lengths_.size(); }

  // Sum of 2^-len over coded symbols.
  double kraft_sum() const {
    double sum = 0.0;
    for (uint8_t len : lengths_) {
      if (len) sum += std::ldexp(1.0, -len);
    }
    return sum;
  }

  void encode_symbol(uint32_t symbol, BitWriter& out) const {
    require(symbol < lengths_.size() && lengths_[symbol] != 0,
            "symbol " + std::to_string(symbol) + " has no Huffman code");
    out.put_bits(codes_[symbol], lengths_[symbol]);
  }

  uint16_t decode_symbol(BitReader& in) const {
    uint32_t code = 0;
    for (int len = 1; len <= kMaxCodeLength; ++len) {
      code = (code << 1) | uint32_t(in.get_bit());
      const uint32_t offset = code - first_code_[len];
      if (code >= first_code_[len] && offset < count_[len]) {
        return sorted_[first_index_[len] + offset];
      }
    }
    fail(ErrorKind::kCorruption, "invalid Huffman code");
  }

  bool operator==(const HuffmanTable& o) const { return lengths_ == o.lengths_; }

 private:
  std::vector<uint8_t> lengths_;
  std::vector<uint32_t> codes_;
  std::vector<uint16_t> sorted_;
  std::array<uint32_t, kMaxCodeLength + 1> count_{};
  std::array<uint32_t, kMaxCodeLength + 1> first_code_{};
  std::array<uint32_t, kMaxCodeLength + 1> first_index_{};
};

namespace huffman_detail {

// Code lengths of an unrestricted Huffman tree. Ties in the merge queue go to
// the node created first (leaves by symbol, then internal nodes in order).
inline std::vector<int> tree_depths(std::span<const uint64_t> freqs) {
  struct Node {
    uint64_t weight;
    uint32_t id;
  };
  auto heavier = [](const Node& a, const Node& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(heavier)> queue(heavier);
  std::vector<int> parent(freqs.size(), -1);
  for (size_t s = 0; s < freqs.size(); ++s) {
    if (freqs[s]) queue.push({freqs[s], uint32_t(s)});
  }
  uint32_t next_id = uint32_t(freqs.size());
  while (queue.size() > 1) {
    const Node a = queue.top();
    queue.pop();
    const Node b = queue.top();
    queue.pop();
    parent.resize(next_id + 1, -1);
    parent[a.id] = int(next_id);
    parent[b.id] = int(next_id);
    queue.push({a.weight + b.weight, next_id++});
  }
  std::vector<int> depth(freqs.size(), 0);
  for (size_t s = 0; s < freqs.size(); ++s) {
    if (!freqs[s]) continue;
    int d = 0;
    for (int p = parent[s]; p >= 0; p = parent[size_t(p)]) ++d;
    depth[s] = std::max(d, 1);
  }
  return depth;
}

}  // namespace huffman_detail

// Optimal prefix code for `freqs`. If the optimal tree is deeper than 15
// levels the counts are halved (keeping nonzero counts nonzero) until it fits.
inline HuffmanTable huffman_build(std::span<const uint64_t> freqs) {
  require(std::any_of(freqs.begin(), freqs.end(), [](uint64_t f) { return f; }),
          "Huffman table needs at least one nonzero count");
  require(freqs.size() <= (size_t(1) << kMaxCodeLength), "alphabet too large");
  std::vector<uint64_t> work(freqs.begin(), freqs.end());
  for (;;) {
    const auto depth = huffman_detail::tree_depths(work);
    if (*std::max_element(depth.begin(), depth.end()) <= kMaxCodeLength) {
      return HuffmanTable::from_lengths({depth.begin(), depth.end()});
    }
    for (uint64_t& f : work) {
      if (f) f = (f + 1) / 2;
    }
  }
}

inline size_t huffman_encode(std::span<const uint16_t> symbols,
                             const HuffmanTable& table, BitWriter& out) {
  const size_t start = out.bit_count();
  for (uint16_t s : symbols) table.encode_symbol(s, out);
  return out.bit_count() - start;
}

inline std::vector<uint16_t> huffman_decode(BitReader& in,
                                            const HuffmanTable& table,
                                            size_t count) {
  std::vector<uint16_t> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(table.decode_symbol(in));
  return out;
}

}  // namespace mcm::entropy
