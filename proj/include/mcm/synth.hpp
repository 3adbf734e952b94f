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

// Seeded procedural test images.
//
// natural_image: multi-octave value noise with a roughly 1/f amplitude
// spectrum in luma, smoother chroma, and a few hard-edged blobs.
// structured_scene: a smooth background with textured foreground objects and
// the exact label map of those objects.
//
// Only raw mt19937_64 output is used (never <random> distributions), so the
// images are identical on every standard library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mcm/image.hpp"

namespace mcm::synth {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + int(engine_() % uint64_t(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

// Smooth noise in [-1, 1] from a random lattice with the given spacing,
// interpolated with a smoothstep.
inline std::vector<double> value_noise(Rng& rng, int w, int h, int spacing) {
  const int gw = w / spacing + 2;
  const int gh = h / spacing + 2;
  std::vector<double> lattice(size_t(gw) * gh);
  for (double& v : lattice) v = rng.uniform(-1.0, 1.0);
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  std::vector<double> out(size_t(w) * h);
  for (int y = 0; y < h; ++y) {
    const int gy = y / spacing;
    const double ty = smooth(double(y % spacing) / spacing);
    for (int x = 0; x < w; ++x) {
      const int gx = x / spacing;
      const double tx = smooth(double(x % spacing) / spacing);
      const double a = lattice[size_t(gy) * gw + gx];
      const double b = lattice[size_t(gy) * gw + gx + 1];
      const double c = lattice[size_t(gy + 1) * gw + gx];
      const double d = lattice[size_t(gy + 1) * gw + gx + 1];
      out[size_t(y) * w + x] = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return out;
}

// Octaves from `coarsest` down to `finest` spacing with amplitude
// proportional to spacing^exponent, normalized to peak amplitude 1.
inline std::vector<double> fractal_noise(Rng& rng, int w, int h, int coarsest,
                                         int finest, double exponent) {
  std::vector<double> out(size_t(w) * h, 0.0);
  double norm = 0.0;
  for (int s = coarsest; s >= finest; s /= 2) {
    const double amp = std::pow(double(s) / coarsest, exponent);
    const auto layer = value_noise(rng, w, h, s);
    for (size_t i = 0; i < out.size(); ++i) out[i] += amp * layer[i];
    norm += amp;
  }
  for (double& v : out) v /= norm;
  return out;
}

// Zero mean, unit standard deviation.
inline std::vector<double> standardized(std::vector<double> v) {
  double mean = 0.0, sq = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  for (double x : v) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / double(v.size()));
  for (double& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
  return v;
}

inline ImageRGB from_ycbcr(const std::vector<double>& y, const std::vector<double>& cb,
                           const std::vector<double>& cr, int w, int h) {
  YCbCrPlanes planes{GrayPlane(w, h), GrayPlane(w, h), GrayPlane(w, h)};
  planes.y.data = y;
  planes.cb.data = cb;
  planes.cr.data = cr;
  return ycbcr_inverse(planes);
}

inline ImageRGB natural_image(uint64_t seed, int w = 256, int h = 256) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 1);
  const double contrast = rng.uniform(30.0, 50.0);  // luma standard deviation
  const double mean = rng.uniform(90.0, 160.0);
  auto y = standardized(fractal_noise(rng, w, h, 128, 2, 0.5));
  auto cb = fractal_noise(rng, w, h, 128, 16, 1.2);
  auto cr = fractal_noise(rng, w, h, 128, 16, 1.2);
  const double chroma = rng.uniform(10.0, 30.0);
  for (size_t i = 0; i < y.size(); ++i) {
    y[i] = mean + contrast * y[i];
    cb[i] = 128.0 + chroma * cb[i];
    cr[i] = 128.0 + chroma * cr[i];
  }
  const int blobs = rng.integer(2, 5);
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
    const double rx = rng.uniform(12, 60), ry = rng.uniform(12, 60);
    const double dy = rng.uniform(-50, 50), dcb = rng.uniform(-15, 15),
                 dcr = rng.uniform(-15, 15);
    for (int py = 0; py < h; ++py) {
      for (int px = 0; px < w; ++px) {
        const double u = (px - cx) / rx, v = (py - cy) / ry;
        if (u * u + v * v > 1.0) continue;
        const size_t i = size_t(py) * w + px;
        y[i] += dy;
        cb[i] += dcb;
        cr[i] += dcr;
      }
    }
  }
  return from_ycbcr(y, cb, cr, w, h);
}

struct Scene {
  ImageRGB image;
  SemanticMap labels;
};

// Background: gentle gradient plus coarse low-amplitude noise. Foreground:
// 3-6 ellipses or rectangles, each with a class label in 1..4, a base color and
// one of several textures of random strength.
inline Scene structured_scene(uint64_t seed, int w = 256, int h = 256) {
  Rng rng(seed * 0xD1B54A32D192ED03ull + 7);
  Scene scene{ImageRGB(w, h), SemanticMap(w, h, 0)};
  std::vector<double> y(size_t(w) * h), cb(y.size()), cr(y.size());

  const double gx = rng.uniform(-0.25, 0.25), gy = rng.uniform(-0.25, 0.25);
  const double base = rng.uniform(90.0, 170.0);
  const auto bg = fractal_noise(rng, w, h, 128, 64, 1.0);
  const double bcb = rng.uniform(108, 148), bcr = rng.uniform(108, 148);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const size_t i = size_t(py) * w + px;
      y[i] = base + gx * (px - w / 2) + gy * (py - h / 2) + 10.0 * bg[i];
      cb[i] = bcb + 4.0 * bg[i];
      cr[i] = bcr - 4.0 * bg[i];
    }
  }

  const int objects = rng.integer(3, 6);
  for (int o = 0; o < objects; ++o) {
    const uint8_t label = uint8_t(rng.integer(1, 4));
    const bool ellipse = rng.uniform() < 0.5;
    const double cx = rng.uniform(0.15 * w, 0.85 * w), cy = rng.uniform(0.15 * h, 0.85 * h);
    const double rx = rng.uniform(18, 56), ry = rng.uniform(18, 56);
    const double oy = rng.uniform(50, 200), ocb = rng.uniform(90, 166), ocr = rng.uniform(90, 166);
    const int texture = rng.integer(0, 2);
    const double amp = rng.uniform(3.0, 55.0);
    const double period = rng.uniform(3.0, 9.0);
    const double angle = rng.uniform(0.0, 3.14159);
    const auto grain = value_noise(rng, w, h, rng.integer(1, 2) * 2);
    for (int py = 0; py < h; ++py) {
      for (int px = 0; px < w; ++px) {
        const double u = (px - cx) / rx, v = (py - cy) / ry;
        const bool inside = ellipse ? (u * u + v * v <= 1.0)
                                    : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0);
        if (!inside) continue;
        const size_t i = size_t(py) * w + px;
        double t = 0.0;
        switch (texture) {
          case 0: t = grain[i]; break;
          case 1: t = std::sin(2 * 3.14159265 * (px * std::cos(angle) + py * std::sin(angle)) / period); break;
          default: t = ((int(px / period) + int(py / period)) % 2) ? 1.0 : -1.0; break;
        }
        y[i] = oy + amp * t;
        cb[i] = ocb + 0.2 * amp * t;
        cr[i] = ocr;
        scene.labels.labels[i] = label;
      }
    }
  }
  scene.image = from_ycbcr(y, cb, cr, w, h);
  return scene;
}

// Affine ramp a*x + b*y + c in all three channels, rounded to 8 bits.
inline ImageRGB gradient_image(int w, int h, double a, double b, double c) {
  ImageRGB img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const uint8_t v = clamp_to_u8(a * x + b * y + c);
      uint8_t* p = img.at(x, y);
      p[0] = p[1] = p[2] = v;
    }
  }
  return img;
}

}  // namespace mcm::synth
