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

// End-to-end masked-patch codec.
//
// Bitstream (all multi-byte fields big-endian):
//
//   magic "MCM1" (4) | version (1) | width (2) | height (2) | patch_size (1)
//   strategy (1) | mode (1) | rho_num (1) | rho_den (1) | k_visible (2)
//   quality (1) | basis_kind (1) | temperature Q8.8 (2) | seed (8)
//   len_record (4) | len_latent (4) | [step Q16.16 (4), only when quality == 0]
//   position record payload | latent payload
//
// The encoder scores and masks the patches, sends the visibility bitmap as a
// position record, and range-codes the quantized transform coefficients of the
// visible patches in Y, Cb and Cr. The decoder places the visible patches and
// fills the rest by harmonic inpainting in each channel.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mcm/damask.hpp"
#include "mcm/error.hpp"
#include "mcm/image.hpp"
#include "mcm/inpaint.hpp"
#include "mcm/latent.hpp"
#include "mcm/position_record.hpp"

namespace mcm::codec {

inline constexpr uint8_t kVersion = 1;
inline constexpr size_t kHeaderSize = 36;
inline constexpr size_t kStepExtensionSize = 4;

struct Header {
  uint8_t version = kVersion;
  uint16_t width = 0;
  uint16_t height = 0;
  uint8_t patch_size = kDefaultPatchSize;
  damask::Strategy strategy = damask::Strategy::kDamask;
  damask::SampleMode mode = damask::SampleMode::kStochastic;
  damask::MaskingRatio ratio;
  uint16_t k_visible = 0;
  uint8_t quality = 5;
  latent::BasisKind basis = latent::BasisKind::kDct;
  uint16_t temperature_q88 = 26;
  uint64_t seed = 0;
  uint32_t len_record = 0;
  uint32_t len_latent = 0;
  uint32_t step_q16 = 0;  // present only when quality == 0

  size_t size() const { return kHeaderSize + (quality == 0 ? kStepExtensionSize : 0); }
  size_t total_size() const { return size() + len_record + len_latent; }
  double temperature() const { return temperature_q88 / 256.0; }
  latent::QuantSpec quant() const {
    return quality == 0 ? latent::QuantSpec{step_q16 / 65536.0, 0}
                        : latent::QuantSpec::from_quality(quality);
  }

  bool operator==(const Header&) const = default;
};

namespace header_detail {

inline void put(std::vector<uint8_t>& out, uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline uint64_t get(std::span<const uint8_t> in, size_t& pos, int bytes) {
  uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | in[pos++];
  return v;
}

}  // namespace header_detail

inline std::vector<uint8_t> serialize_header(const Header& h) {
  using header_detail::put;
  std::vector<uint8_t> out = {'M', 'C', 'M', '1'};
  put(out, h.version, 1);
  put(out, h.width, 2);
  put(out, h.height, 2);
  put(out, h.patch_size, 1);
  put(out, uint8_t(h.strategy), 1);
  put(out, uint8_t(h.mode), 1);
  put(out, h.ratio.num, 1);
  put(out, h.ratio.den, 1);
  put(out, h.k_visible, 2);
  put(out, h.quality, 1);
  put(out, uint8_t(h.basis), 1);
  put(out, h.temperature_q88, 2);
  put(out, h.seed, 8);
  put(out, h.len_record, 4);
  put(out, h.len_latent, 4);
  if (h.quality == 0) put(out, h.step_q16, 4);
  return out;
}

// Validates the header fields and that the buffer holds exactly the declared
// sections.
inline Header parse_header(std::span<const uint8_t> bytes) {
  using header_detail::get;
  check_stream(bytes.size() >= kHeaderSize, "stream shorter than the header");
  if (std::memcmp(bytes.data(), "MCM1", 4) != 0) {
    fail(ErrorKind::kFormat, "bad magic, not an MCM1 stream");
  }
  size_t pos = 4;
  Header h;
  h.version = uint8_t(get(bytes, pos, 1));
  if (h.version != kVersion) {
    fail(ErrorKind::kFormat, "unsupported stream version " + std::to_string(h.version));
  }
  h.width = uint16_t(get(bytes, pos, 2));
  h.height = uint16_t(get(bytes, pos, 2));
  h.patch_size = uint8_t(get(bytes, pos, 1));
  const auto strategy = get(bytes, pos, 1);
  const auto mode = get(bytes, pos, 1);
  h.ratio.num = uint8_t(get(bytes, pos, 1));
  h.ratio.den = uint8_t(get(bytes, pos, 1));
  h.k_visible = uint16_t(get(bytes, pos, 2));
  h.quality = uint8_t(get(bytes, pos, 1));
  const auto basis = get(bytes, pos, 1);
  h.temperature_q88 = uint16_t(get(bytes, pos, 2));
  h.seed = get(bytes, pos, 8);
  h.len_record = uint32_t(get(bytes, pos, 4));
  h.len_latent = uint32_t(get(bytes, pos, 4));

  check_stream(strategy <= 3, "unknown strategy code");
  check_stream(mode <= 1, "unknown sampling mode code");
  check_stream(basis <= 1, "unknown basis kind");
  h.strategy = damask::Strategy(strategy);
  h.mode = damask::SampleMode(mode);
  h.basis = latent::BasisKind(basis);
  check_stream(h.quality <= latent::kMaxQuality, "quality out of range");
  check_stream(h.ratio.valid(), "masking ratio out of range");
  check_stream(h.patch_size >= 2, "patch size out of range");
  check_stream(h.width > 0 && h.height > 0 && h.width % h.patch_size == 0 &&
                   h.height % h.patch_size == 0,
               "dimensions do not tile into patches");
  const size_t patches = size_t(h.width / h.patch_size) * (h.height / h.patch_size);
  check_stream(h.k_visible == h.ratio.visible_count(patches),
               "visible count does not match the masking ratio");
  if (h.quality == 0) {
    check_stream(bytes.size() >= kHeaderSize + kStepExtensionSize,
                 "stream shorter than the header");
    h.step_q16 = uint32_t(get(bytes, pos, 4));
    check_stream(h.step_q16 > 0, "explicit step is zero");
  }
  check_stream(bytes.size() >= h.total_size(), "stream truncated");
  check_stream(bytes.size() == h.total_size(), "stream has trailing bytes");
  return h;
}

struct CodecConfig {
  damask::MaskConfig mask;
  int patch_size = kDefaultPatchSize;
  latent::QuantSpec quant = latent::QuantSpec::from_quality(5);
  latent::BasisKind basis = latent::BasisKind::kDct;
  const latent::TransformBasis* trained = nullptr;  // required for kPca
};

// Luma uses every component of the basis, chroma the first half of them.
struct ChannelBases {
  latent::TransformBasis luma;
  latent::TransformBasis chroma;
};

inline ChannelBases channel_bases(int patch_size, latent::BasisKind kind,
                                  const latent::TransformBasis* trained) {
  latent::TransformBasis full;
  if (kind == latent::BasisKind::kDct) {
    full = latent::dct_basis(patch_size, size_t(patch_size) * patch_size);
  } else {
    require(trained != nullptr, "PCA basis requested but no basis file was given");
    require(trained->patch_size == patch_size,
            "basis patch size " + std::to_string(trained->patch_size) +
                " does not match stream patch size " + std::to_string(patch_size));
    full = *trained;
  }
  const size_t chroma = std::max<size_t>(1, full.count / 2);
  return {full, latent::truncated(full, chroma)};
}

inline constexpr double kLevelShift = 128.0;

// The temperature as stored in the header, Q8.8.
inline uint16_t temperature_q88(double temperature) {
  const long tq = std::lround(temperature * 256.0);
  require(tq >= 1 && tq <= 65535, "temperature must be in [1/256, 256) in Q8.8");
  return uint16_t(tq);
}

struct EncodeResult {
  std::vector<uint8_t> bytes;
  Header header;
  damask::MaskResult mask;
};

inline EncodeResult encode(const ImageRGB& img, const SemanticMap* sem,
                           const CodecConfig& cfg) {
  require(img.width <= 65535 && img.height <= 65535,
          "image dimensions exceed 65535");
  const PatchGrid grid(img.width, img.height, cfg.patch_size);
  require(cfg.patch_size <= 255, "patch size exceeds 255");

  Header h;
  h.width = uint16_t(img.width);
  h.height = uint16_t(img.height);
  h.patch_size = uint8_t(cfg.patch_size);
  h.strategy = cfg.mask.strategy;
  h.mode = cfg.mask.mode;
  h.ratio = cfg.mask.ratio;
  h.seed = cfg.mask.seed;
  h.basis = cfg.basis;
  h.temperature_q88 = temperature_q88(cfg.mask.temperature);
  if (cfg.quant.quality > 0) {
    h.quality = uint8_t(cfg.quant.quality);
  } else {
    h.quality = 0;
    const long sq = std::lround(cfg.quant.step * 65536.0);
    require(sq >= 1 && sq <= 0xFFFFFFFFL, "explicit step out of Q16.16 range");
    h.step_q16 = uint32_t(sq);
  }
  const latent::QuantSpec quant = h.quant();

  damask::MaskConfig mask_cfg = cfg.mask;
  mask_cfg.temperature = h.temperature();
  EncodeResult result;
  result.mask = damask::plan_mask(img, sem, grid, mask_cfg);
  const auto& plan = result.mask.plan;
  require(plan.k <= 65535, "visible patch count exceeds 65535");
  h.k_visible = uint16_t(plan.k);

  const auto record = entropy::PositionRecord::from_visible(plan.visible, grid.count());
  const auto record_bytes = entropy::encode_position_record(record);

  const auto bases = channel_bases(cfg.patch_size, cfg.basis, cfg.trained);
  auto planes = ycbcr_forward(img);
  std::array<std::vector<Patch>, 3> patches;
  int ch = 0;
  for (GrayPlane* p : {&planes.y, &planes.cb, &planes.cr}) {
    for (double& v : p->data) v -= kLevelShift;
    patches[size_t(ch++)] = patchify(*p, grid);
  }
  latent::LatentTensor tensor{plan.visible.size(), bases.luma.count, bases.chroma.count, {}};
  tensor.values.reserve(tensor.patches * tensor.per_patch());
  for (uint32_t l : plan.visible) {
    for (int c = 0; c < 3; ++c) {
      const auto& basis = c == 0 ? bases.luma : bases.chroma;
      const auto coeffs = latent::forward_transform(patches[size_t(c)][l], basis);
      const auto q = latent::quantize(coeffs, quant);
      tensor.values.insert(tensor.values.end(), q.begin(), q.end());
    }
  }
  const auto latent_bytes = latent::encode_latents(tensor);

  h.len_record = uint32_t(record_bytes.size());
  h.len_latent = uint32_t(latent_bytes.size());
  result.bytes = serialize_header(h);
  result.bytes.insert(result.bytes.end(), record_bytes.begin(), record_bytes.end());
  result.bytes.insert(result.bytes.end(), latent_bytes.begin(), latent_bytes.end());
  result.header = h;
  return result;
}

struct DecodeResult {
  ImageRGB image;
  Header header;
  entropy::PositionRecord record;
  inpaint::VisibilityMask mask;
};

inline DecodeResult decode_detailed(std::span<const uint8_t> bytes,
                                    const latent::TransformBasis* trained = nullptr) {
  DecodeResult out;
  const Header h = parse_header(bytes);
  out.header = h;
  const PatchGrid grid(h.width, h.height, h.patch_size);
  const auto record_span = bytes.subspan(h.size(), h.len_record);
  const auto latent_span = bytes.subspan(h.size() + h.len_record, h.len_latent);
  out.record = entropy::decode_position_record(record_span, grid.count(), h.k_visible);
  const auto visible = out.record.visible_indices();

  const auto bases = channel_bases(h.patch_size, h.basis, trained);
  const auto tensor = latent::decode_latents(latent_span, visible.size(),
                                             bases.luma.count, bases.chroma.count);
  const latent::QuantSpec quant = h.quant();

  out.mask = inpaint::VisibilityMask::from_patches(visible, grid);
  std::array<std::vector<Patch>, 3> patches;
  for (auto& p : patches) p.assign(grid.count(), Patch(grid.patch_area(), 0.0));
  for (size_t v = 0; v < visible.size(); ++v) {
    for (int c = 0; c < 3; ++c) {
      const auto& basis = c == 0 ? bases.luma : bases.chroma;
      const auto begin = tensor.values.begin() + std::ptrdiff_t(tensor.offset(v, c));
      const std::vector<int32_t> q(begin, begin + std::ptrdiff_t(basis.count));
      patches[size_t(c)][visible[v]] =
          latent::inverse_transform(latent::dequantize(q, quant), basis);
    }
  }
  YCbCrPlanes planes;
  GrayPlane* dst[3] = {&planes.y, &planes.cb, &planes.cr};
  for (int c = 0; c < 3; ++c) {
    GrayPlane plane = unpatchify(patches[size_t(c)], grid);
    *dst[c] = inpaint::harmonic_fill(plane, out.mask);
    for (double& v : dst[c]->data) v += kLevelShift;
  }
  out.image = ycbcr_inverse(planes);
  return out;
}

inline ImageRGB decode(std::span<const uint8_t> bytes,
                       const latent::TransformBasis* trained = nullptr) {
  return decode_detailed(bytes, trained).image;
}

inline double bits_per_pixel(size_t bytes, int width, int height) {
  return 8.0 * double(bytes) / (double(width) * height);
}

// Counts every byte of the stream: header, position record and latents.
inline double measured_bpp(std::span<const uint8_t> bytes) {
  const Header h = parse_header(bytes);
  return bits_per_pixel(bytes.size(), h.width, h.height);
}

}  // namespace mcm::codec
