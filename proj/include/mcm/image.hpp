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

// Raster planes, color conversion and the patch grid shared by every stage.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcm/error.hpp"

namespace mcm {

inline constexpr int kDefaultPatchSize = 16;

// 8-bit interleaved RGB, row-major.
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  ImageRGB() = default;
  ImageRGB(int w, int h) : width(w), height(h), data(size_t(w) * h * 3, 0) {
    require(w > 0 && h > 0, "image dimensions must be positive");
  }

  size_t pixel_count() const { return size_t(width) * height; }
  uint8_t* at(int x, int y) { return &data[(size_t(y) * width + x) * 3]; }
  const uint8_t* at(int x, int y) const {
    return &data[(size_t(y) * width + x) * 3];
  }

  bool operator==(const ImageRGB&) const = default;
};

// Real-valued single channel plane.
struct GrayPlane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayPlane() = default;
  GrayPlane(int w, int h, double fill = 0.0)
      : width(w), height(h), data(size_t(w) * h, fill) {
    require(w > 0 && h > 0, "plane dimensions must be positive");
  }

  double& at(int x, int y) { return data[size_t(y) * width + x]; }
  double at(int x, int y) const { return data[size_t(y) * width + x]; }

  bool operator==(const GrayPlane&) const = default;
};

// Per-pixel class labels. Label 0 is background by convention.
struct SemanticMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> labels;

  SemanticMap() = default;
  SemanticMap(int w, int h, uint8_t fill = 0)
      : width(w), height(h), labels(size_t(w) * h, fill) {
    require(w > 0 && h > 0, "map dimensions must be positive");
  }

  uint8_t& at(int x, int y) { return labels[size_t(y) * width + x]; }
  uint8_t at(int x, int y) const { return labels[size_t(y) * width + x]; }

  bool operator==(const SemanticMap&) const = default;
};

// Non-overlapping N x N tiling. Patch l sits at (row = l / cols, col = l % cols).
class PatchGrid {
 public:
  PatchGrid(int width, int height, int patch_size)
      : patch_size_(patch_size) {
    require(patch_size >= 2, "patch size must be at least 2");
    require(width > 0 && height > 0, "grid dimensions must be positive");
    if (width % patch_size != 0) {
      fail(ErrorKind::kValidation, "width " + std::to_string(width) +
                                       " is not divisible by patch size " +
                                       std::to_string(patch_size));
    }
    if (height % patch_size != 0) {
      fail(ErrorKind::kValidation, "height " + std::to_string(height) +
                                       " is not divisible by patch size " +
                                       std::to_string(patch_size));
    }
    cols_ = width / patch_size;
    rows_ = height / patch_size;
  }

  int patch_size() const { return patch_size_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int width() const { return cols_ * patch_size_; }
  int height() const { return rows_ * patch_size_; }
  size_t count() const { return size_t(rows_) * cols_; }
  size_t patch_area() const { return size_t(patch_size_) * patch_size_; }
  int row_of(size_t l) const { return int(l / cols_); }
  int col_of(size_t l) const { return int(l % cols_); }

  bool operator==(const PatchGrid&) const = default;

 private:
  int patch_size_;
  int rows_ = 0;
  int cols_ = 0;
};

// Flattened N*N patch, row-major inside the patch.
using Patch = std::vector<double>;

// BT.601 luma weights, also used for the grayscale texture source.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline GrayPlane rgb_to_gray(const ImageRGB& img) {
  GrayPlane out(img.width, img.height);
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    const uint8_t* p = &img.data[i * 3];
    // Achromatic pixels map to their channel value exactly.
    out.data[i] = (p[0] == p[1] && p[1] == p[2])
                      ? double(p[0])
                      : kLumaR * p[0] + kLumaG * p[1] + kLumaB * p[2];
  }
  return out;
}

struct YCbCrPlanes {
  GrayPlane y, cb, cr;
};

// Full-range BT.601 (JFIF) with chroma centred on 128. Planes keep full
// precision; rounding happens only on the way back to 8 bits.
inline YCbCrPlanes ycbcr_forward(const ImageRGB& img) {
  YCbCrPlanes out{GrayPlane(img.width, img.height),
                  GrayPlane(img.width, img.height),
                  GrayPlane(img.width, img.height)};
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    const double r = img.data[i * 3];
    const double g = img.data[i * 3 + 1];
    const double b = img.data[i * 3 + 2];
    double y = kLumaR * r + kLumaG * g + kLumaB * b;
    if (r == g && g == b) y = r;
    out.y.data[i] = y;
    out.cb.data[i] = 128.0 + (b - y) / 1.772;
    out.cr.data[i] = 128.0 + (r - y) / 1.402;
  }
  return out;
}

inline uint8_t clamp_to_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<uint8_t>(std::lround(v));
}

inline ImageRGB ycbcr_inverse(const YCbCrPlanes& planes) {
  const int w = planes.y.width;
  const int h = planes.y.height;
  auto same = [&](const GrayPlane& p) { return p.width == w && p.height == h; };
  require(same(planes.cb) && same(planes.cr),
          "YCbCr planes must have identical dimensions");
  ImageRGB out(w, h);
  for (size_t i = 0; i < out.pixel_count(); ++i) {
    const double y = planes.y.data[i];
    const double cb = planes.cb.data[i] - 128.0;
    const double cr = planes.cr.data[i] - 128.0;
    const double r = y + 1.402 * cr;
    const double b = y + 1.772 * cb;
    const double g = (y - kLumaR * r - kLumaB * b) / kLumaG;
    out.data[i * 3] = clamp_to_u8(r);
    out.data[i * 3 + 1] = clamp_to_u8(g);
    out.data[i * 3 + 2] = clamp_to_u8(b);
  }
  return out;
}

inline std::vector<Patch> patchify(const GrayPlane& plane,
                                   const PatchGrid& grid) {
  require(plane.width == grid.width() && plane.height == grid.height(),
          "plane dimensions do not match the patch grid");
  const int n = grid.patch_size();
  std::vector<Patch> out(grid.count(), Patch(grid.patch_area()));
  for (size_t l = 0; l < grid.count(); ++l) {
    const int x0 = grid.col_of(l) * n;
    const int y0 = grid.row_of(l) * n;
    for (int dy = 0; dy < n; ++dy) {
      const double* src = &plane.data[size_t(y0 + dy) * plane.width + x0];
      std::copy(src, src + n, out[l].begin() + size_t(dy) * n);
    }
  }
  return out;
}

inline GrayPlane unpatchify(const std::vector<Patch>& patches,
                            const PatchGrid& grid) {
  require(patches.size() == grid.count(),
          "expected " + std::to_string(grid.count()) + " patches, got " +
              std::to_string(patches.size()));
  const int n = grid.patch_size();
  GrayPlane out(grid.width(), grid.height());
  for (size_t l = 0; l < patches.size(); ++l) {
    require(patches[l].size() == grid.patch_area(),
            "patch " + std::to_string(l) + " has the wrong size");
    const int x0 = grid.col_of(l) * n;
    const int y0 = grid.row_of(l) * n;
    for (int dy = 0; dy < n; ++dy) {
      std::copy_n(patches[l].begin() + size_t(dy) * n, n,
                  &out.data[size_t(y0 + dy) * out.width + x0]);
    }
  }
  return out;
}

}  // namespace mcm
