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

// Trained basis files.
//
//   "MCMB" | N (u32) | M (u32) | mean: N*N f32 | components: M*N*N f32
//
// All fields little-endian. Loading re-orthonormalizes in double precision so
// the encoder and decoder work with the same vectors after the float round trip.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <vector>

#include "mcm/error.hpp"
#include "mcm/latent.hpp"
#include "mcm/netpbm.hpp"

namespace mcm::latent {

namespace basis_detail {

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

inline uint32_t get_u32(std::span<const uint8_t> in, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(in[pos + i]) << (8 * i);
  return v;
}

inline void put_f32(std::vector<uint8_t>& out, double v) {
  put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
}

}  // namespace basis_detail

inline std::vector<uint8_t> serialize_basis(const TransformBasis& basis) {
  std::vector<uint8_t> out = {'M', 'C', 'M', 'B'};
  basis_detail::put_u32(out, uint32_t(basis.patch_size));
  basis_detail::put_u32(out, uint32_t(basis.count));
  for (double v : basis.mean) basis_detail::put_f32(out, v);
  for (double v : basis.components) basis_detail::put_f32(out, v);
  return out;
}

inline TransformBasis parse_basis(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "MCMB", 4) != 0) {
    fail(ErrorKind::kFormat, "expected MCMB basis file");
  }
  const uint32_t n = basis_detail::get_u32(bytes, 4);
  const uint32_t m = basis_detail::get_u32(bytes, 8);
  if (n < 2 || n > 64) fail(ErrorKind::kFormat, "basis patch size out of range");
  const size_t dim = size_t(n) * n;
  if (m < 1 || m > dim) fail(ErrorKind::kFormat, "basis component count out of range");
  if (bytes.size() != 12 + 4 * dim * (1 + m)) {
    fail(ErrorKind::kFormat, "basis file size does not match its header");
  }
  TransformBasis b;
  b.kind = BasisKind::kPca;
  b.patch_size = int(n);
  b.dim = dim;
  b.count = m;
  size_t pos = 12;
  auto next = [&] {
    const float f = std::bit_cast<float>(basis_detail::get_u32(bytes, pos));
    pos += 4;
    return double(f);
  };
  b.mean.resize(dim);
  for (double& v : b.mean) v = next();
  b.components.resize(dim * m);
  for (double& v : b.components) v = next();
  if (!orthonormalize(b)) fail(ErrorKind::kFormat, "basis components are degenerate");
  return b;
}

inline void save_basis(const TransformBasis& basis, const std::filesystem::path& path) {
  write_file(path, serialize_basis(basis));
}

inline TransformBasis load_basis(const std::filesystem::path& path) {
  return parse_basis(read_file(path));
}

}  // namespace mcm::latent
