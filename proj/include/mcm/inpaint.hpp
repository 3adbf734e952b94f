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

// Reconstruction of masked pixels from the decoded visible patches.
//
// harmonic_fill solves the discrete Laplace equation over the unknown pixels
// with the known pixels as Dirichlet data, by row-major Gauss-Seidel sweeps
// with over-relaxation. The solve runs on the residual after removing the
// least-squares affine fit of the known pixels; unknown pixels on the image
// border take mirrored neighbours (zero normal derivative of the residual).
// Away from the border this is the plain harmonic extension, and affine images
// are reproduced exactly everywhere.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mcm/error.hpp"
#include "mcm/image.hpp"

namespace mcm::inpaint {

struct VisibilityMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> known;  // 1 = pixel belongs to a visible patch

  bool at(int x, int y) const { return known[size_t(y) * width + x] != 0; }

  static VisibilityMask from_patches(std::span<const uint32_t> visible,
                                     const PatchGrid& grid) {
    VisibilityMask m{grid.width(), grid.height(),
                     std::vector<uint8_t>(size_t(grid.width()) * grid.height(), 0)};
    const int n = grid.patch_size();
    for (uint32_t l : visible) {
      require(l < grid.count(), "visible patch index out of range");
      const int x0 = grid.col_of(l) * n;
      const int y0 = grid.row_of(l) * n;
      for (int y = y0; y < y0 + n; ++y) {
        std::fill_n(m.known.begin() + std::ptrdiff_t(size_t(y) * m.width + x0), n, 1);
      }
    }
    return m;
  }

  size_t known_count() const {
    return size_t(std::count(known.begin(), known.end(), uint8_t(1)));
  }
};

struct HarmonicOptions {
  double tolerance = 0.05;  // gray levels; bounds both the update and the residual / 4
  int max_iterations = 5000;
  double relaxation = 1.8;
};

struct HarmonicResult {
  GrayPlane plane;
  int sweeps = 0;
  double last_update = 0.0;
  bool converged = false;
  // Max |4-neighbour Laplacian| of the detrended field over unknown pixels.
  double max_residual = 0.0;
};

namespace inpaint_detail {

inline int mirror(int i, int n) {
  if (n == 1) return 0;
  if (i < 0) return 1;
  if (i >= n) return n - 2;
  return i;
}

// Affine least-squares fit a + b*(x - cx) + c*(y - cy) of the known pixels.
// Falls back to the mean when the known pixels are collinear.
struct Trend {
  double a = 0.0, b = 0.0, c = 0.0, cx = 0.0, cy = 0.0;
  double operator()(int x, int y) const { return a + b * (x - cx) + c * (y - cy); }
};

inline Trend fit_trend(const GrayPlane& plane, const VisibilityMask& mask) {
  double n = 0, sx = 0, sy = 0, sv = 0;
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      if (!mask.at(x, y)) continue;
      n += 1;
      sx += x;
      sy += y;
      sv += plane.at(x, y);
    }
  }
  Trend t;
  t.cx = sx / n;
  t.cy = sy / n;
  t.a = sv / n;
  double sxx = 0, syy = 0, sxy = 0, sxv = 0, syv = 0;
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      if (!mask.at(x, y)) continue;
      const double dx = x - t.cx, dy = y - t.cy, dv = plane.at(x, y) - t.a;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
      sxv += dx * dv;
      syv += dy * dv;
    }
  }
  const double det = sxx * syy - sxy * sxy;
  if (det > 1e-9 * std::max(1.0, sxx * syy)) {
    t.b = (sxv * syy - syv * sxy) / det;
    t.c = (syv * sxx - sxv * sxy) / det;
  }
  return t;
}

}  // namespace inpaint_detail

inline HarmonicResult harmonic_fill_detailed(const GrayPlane& plane,
                                             const VisibilityMask& mask,
                                             const HarmonicOptions& opts = {}) {
  require(mask.width == plane.width && mask.height == plane.height,
          "visibility mask does not match the plane");
  require(opts.tolerance > 0.0, "tolerance must be positive");
  require(mask.known_count() > 0, "harmonic fill needs at least one known pixel");
  const int w = plane.width;
  const int h = plane.height;
  const auto trend = inpaint_detail::fit_trend(plane, mask);

  std::vector<double> field(plane.data.size(), 0.0);
  std::vector<uint32_t> unknown;
  std::vector<std::array<uint32_t, 4>> nbrs;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = size_t(y) * w + x;
      if (mask.known[i]) {
        field[i] = plane.data[i] - trend(x, y);
        continue;
      }
      unknown.push_back(uint32_t(i));
      auto idx = [&](int xx, int yy) {
        return uint32_t(size_t(inpaint_detail::mirror(yy, h)) * w +
                        inpaint_detail::mirror(xx, w));
      };
      nbrs.push_back({idx(x - 1, y), idx(x + 1, y), idx(x, y - 1), idx(x, y + 1)});
    }
  }

  auto max_residual = [&] {
    double worst = 0.0;
    for (size_t u = 0; u < unknown.size(); ++u) {
      const auto& nb = nbrs[u];
      const double lap = field[nb[0]] + field[nb[1]] + field[nb[2]] + field[nb[3]] -
                         4.0 * field[unknown[u]];
      worst = std::max(worst, std::abs(lap));
    }
    return worst;
  };

  // Converged once a sweep moves no pixel by `tolerance` and every unknown
  // lies within `tolerance` of its neighbour mean.
  HarmonicResult r;
  r.converged = unknown.empty();
  const double omega = opts.relaxation;
  while (!r.converged && r.sweeps < opts.max_iterations) {
    double max_update = 0.0;
    for (size_t u = 0; u < unknown.size(); ++u) {
      const auto& nb = nbrs[u];
      double& v = field[unknown[u]];
      const double target =
          0.25 * (field[nb[0]] + field[nb[1]] + field[nb[2]] + field[nb[3]]);
      const double delta = omega * (target - v);
      v += delta;
      max_update = std::max(max_update, std::abs(delta));
    }
    ++r.sweeps;
    r.last_update = max_update;
    r.converged = max_update < opts.tolerance && max_residual() <= 4.0 * opts.tolerance;
  }
  r.max_residual = max_residual();

  r.plane = plane;
  for (uint32_t i : unknown) {
    const int x = int(i % uint32_t(w));
    const int y = int(i / uint32_t(w));
    r.plane.data[i] = field[i] + trend(x, y);
  }
  return r;
}

inline GrayPlane harmonic_fill(const GrayPlane& plane, const VisibilityMask& mask,
                               double tolerance = 0.05, int max_iterations = 5000) {
  return harmonic_fill_detailed(plane, mask, {tolerance, max_iterations, 1.8}).plane;
}

inline GrayPlane mean_fill(const GrayPlane& plane, const VisibilityMask& mask) {
  require(mask.width == plane.width && mask.height == plane.height,
          "visibility mask does not match the plane");
  require(mask.known_count() > 0, "mean fill needs at least one known pixel");
  double sum = 0.0;
  for (size_t i = 0; i < plane.data.size(); ++i) {
    if (mask.known[i]) sum += plane.data[i];
  }
  const double mean = sum / double(mask.known_count());
  GrayPlane out = plane;
  for (size_t i = 0; i < out.data.size(); ++i) {
    if (!mask.known[i]) out.data[i] = mean;
  }
  return out;
}

}  // namespace mcm::inpaint
