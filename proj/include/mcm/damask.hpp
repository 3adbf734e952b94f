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

// Dual-adaptive patch masking.
//
// Each patch gets a texture score (sum of |Laplacian| over the patch) and a
// structure score (foreground pixel count of the binarized semantic map). Their
// product is the patch's information capacity; a temperature softmax over the
// max-normalized capacities gives a categorical distribution from which the
// visible set is drawn, either as the plain top-k or as a Gumbel-top-k sample
// (k draws without replacement).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mcm/error.hpp"
#include "mcm/image.hpp"

namespace mcm::damask {

enum class Strategy : uint8_t {
  kRandom = 0,
  kTexture = 1,
  kStructure = 2,
  kDamask = 3,
};

enum class SampleMode : uint8_t {
  kDeterministic = 0,
  kStochastic = 1,
};

inline constexpr double kDefaultTemperature = 0.1;

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return "random";
    case Strategy::kTexture: return "texture";
    case Strategy::kStructure: return "structure";
    case Strategy::kDamask: return "damask";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::kRandom, Strategy::kTexture,
                     Strategy::kStructure, Strategy::kDamask}) {
    if (name == strategy_name(s)) return s;
  }
  return std::nullopt;
}

inline const char* mode_name(SampleMode m) {
  return m == SampleMode::kDeterministic ? "deterministic" : "stochastic";
}

// Masking ratio as the exact rational num/den, so the visible count can be
// rebuilt from a header without floating-point drift.
struct MaskingRatio {
  uint8_t num = 191;
  uint8_t den = 255;

  static MaskingRatio nearest(double rho) {
    require(rho > 0.0 && rho < 1.0, "masking ratio must lie in (0, 1)");
    const long n = std::lround(rho * 255.0);
    require(n > 0 && n < 255,
            "masking ratio " + std::to_string(rho) + " rounds to 0 or 1 in 1/255 steps");
    return {uint8_t(n), 255};
  }

  double value() const { return double(num) / den; }

  // round(L * (1 - rho)), half away from zero, in integer arithmetic.
  size_t visible_count(size_t patches) const {
    return (2 * patches * size_t(den - num) + den) / (2 * size_t(den));
  }

  bool valid() const { return den > 0 && num > 0 && num < den; }
  bool operator==(const MaskingRatio&) const = default;
};

// Signed discrete Laplacian response.
struct TextureMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double at(int x, int y) const { return data[size_t(y) * width + x]; }
};

// 0/1 foreground indicator.
struct StructureMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  uint8_t at(int x, int y) const { return data[size_t(y) * width + x]; }
};

struct PatchScores {
  std::vector<double> texture;
  std::vector<double> structure;
  std::vector<double> info;
};

struct CategoricalDist {
  std::vector<double> alpha;
};

struct MaskPlan {
  std::vector<uint32_t> visible;  // ascending, distinct
  MaskingRatio ratio;
  size_t k = 0;
  uint64_t seed = 0;
  Strategy strategy = Strategy::kDamask;
  SampleMode mode = SampleMode::kStochastic;
};

// 4-neighbour kernel [[0,1,0],[1,-4,1],[0,1,0]] with replicated borders.
inline TextureMap laplacian(const GrayPlane& gray) {
  TextureMap out{gray.width, gray.height,
                 std::vector<double>(gray.data.size(), 0.0)};
  const int w = gray.width;
  const int h = gray.height;
  for (int y = 0; y < h; ++y) {
    const int yu = std::max(y - 1, 0);
    const int yd = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      out.data[size_t(y) * w + x] = gray.at(x, yu) + gray.at(x, yd) +
                                    gray.at(xl, y) + gray.at(xr, y) -
                                    4.0 * gray.at(x, y);
    }
  }
  return out;
}

inline std::vector<double> texture_scores(const TextureMap& tmap,
                                          const PatchGrid& grid) {
  require(tmap.width == grid.width() && tmap.height == grid.height(),
          "texture map does not match the patch grid");
  const int n = grid.patch_size();
  std::vector<double> scores(grid.count(), 0.0);
  for (int y = 0; y < tmap.height; ++y) {
    const size_t row_base = size_t(y / n) * grid.cols();
    for (int x = 0; x < tmap.width; ++x) {
      scores[row_base + x / n] += std::abs(tmap.at(x, y));
    }
  }
  return scores;
}

// Pixels whose label is in `foreground` become 1. Without a set, any
// nonzero label counts as foreground.
inline StructureMap binarize(const SemanticMap& sem,
                             const std::optional<std::set<uint8_t>>& foreground =
                                 std::nullopt) {
  if (foreground) require(!foreground->empty(), "foreground label set is empty");
  StructureMap out{sem.width, sem.height,
                   std::vector<uint8_t>(sem.labels.size(), 0)};
  for (size_t i = 0; i < sem.labels.size(); ++i) {
    const uint8_t label = sem.labels[i];
    out.data[i] = foreground ? uint8_t(foreground->count(label) != 0)
                             : uint8_t(label != 0);
  }
  return out;
}

inline std::vector<double> structure_scores(const StructureMap& smap,
                                            const PatchGrid& grid) {
  require(smap.width == grid.width() && smap.height == grid.height(),
          "structure map does not match the patch grid");
  const int n = grid.patch_size();
  std::vector<double> scores(grid.count(), 0.0);
  for (int y = 0; y < smap.height; ++y) {
    const size_t row_base = size_t(y / n) * grid.cols();
    for (int x = 0; x < smap.width; ++x) {
      scores[row_base + x / n] += smap.at(x, y);
    }
  }
  return scores;
}

inline std::vector<double> strategy_scores(Strategy strategy,
                                           const std::vector<double>& texture,
                                           const std::vector<double>& structure) {
  require(texture.size() == structure.size(),
          "texture and structure score vectors differ in length");
  switch (strategy) {
    case Strategy::kRandom:
      return std::vector<double>(texture.size(), 1.0);
    case Strategy::kTexture:
      return texture;
    case Strategy::kStructure:
      return structure;
    case Strategy::kDamask: {
      std::vector<double> info(texture.size());
      for (size_t l = 0; l < info.size(); ++l) info[l] = structure[l] * texture[l];
      return info;
    }
  }
  fail(ErrorKind::kValidation, "unknown strategy");
}

// softmax(info / max(info) / temperature), max-subtracted.
inline CategoricalDist categorical(const std::vector<double>& info,
                                   double temperature) {
  require(!info.empty(), "categorical needs at least one patch");
  require(temperature > 0.0, "temperature must be positive");
  const double peak = *std::max_element(info.begin(), info.end());
  std::vector<double> logits(info.size(), 0.0);
  if (peak > 0.0) {
    for (size_t l = 0; l < info.size(); ++l) {
      logits[l] = info[l] / peak / temperature;
    }
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  CategoricalDist dist{std::vector<double>(info.size())};
  double total = 0.0;
  for (size_t l = 0; l < info.size(); ++l) {
    dist.alpha[l] = std::exp(logits[l] - top);
    total += dist.alpha[l];
  }
  for (double& a : dist.alpha) a /= total;
  return dist;
}

// Indices of the k largest keys, ties to the lower index, returned ascending.
inline std::vector<uint32_t> top_k_indices(const std::vector<double>& keys,
                                           size_t k) {
  std::vector<uint32_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + std::ptrdiff_t(k), order.end(),
                    [&](uint32_t a, uint32_t b) {
                      return keys[a] != keys[b] ? keys[a] > keys[b] : a < b;
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

// Uniform draw in the open interval (0, 1) from the top 53 bits.
inline double open_unit(std::mt19937_64& rng) {
  return (double(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Deterministic: top-k of alpha. Stochastic: top-k of ln(alpha) + Gumbel
// noise from mt19937_64(seed), one draw per patch in index order.
inline MaskPlan sample_visible(const CategoricalDist& dist, MaskingRatio ratio,
                               uint64_t seed, SampleMode mode) {
  require(ratio.valid(), "masking ratio must lie in (0, 1)");
  const size_t patches = dist.alpha.size();
  const size_t k = ratio.visible_count(patches);
  require(k >= 1, "masking ratio leaves no visible patch");
  require(k < patches, "masking ratio leaves no masked patch");

  MaskPlan plan;
  plan.ratio = ratio;
  plan.k = k;
  plan.seed = seed;
  plan.mode = mode;
  if (mode == SampleMode::kDeterministic) {
    plan.visible = top_k_indices(dist.alpha, k);
    return plan;
  }
  std::mt19937_64 rng(seed);
  std::vector<double> keys(patches);
  for (size_t l = 0; l < patches; ++l) {
    const double gumbel = -std::log(-std::log(open_unit(rng)));
    keys[l] = std::log(dist.alpha[l]) + gumbel;
  }
  plan.visible = top_k_indices(keys, k);
  return plan;
}

struct MaskConfig {
  Strategy strategy = Strategy::kDamask;
  SampleMode mode = SampleMode::kStochastic;
  MaskingRatio ratio;
  uint64_t seed = 0;
  double temperature = kDefaultTemperature;
  std::optional<std::set<uint8_t>> foreground;
};

// Texture, structure and info vectors for one image. Without a semantic map
// every structure score is 1, so damask reduces to the texture ranking.
inline PatchScores compute_scores(const ImageRGB& img, const SemanticMap* sem,
                                  const PatchGrid& grid, Strategy strategy,
                                  const std::optional<std::set<uint8_t>>& foreground =
                                      std::nullopt) {
  PatchScores scores;
  scores.texture = texture_scores(laplacian(rgb_to_gray(img)), grid);
  if (sem) {
    require(sem->width == img.width && sem->height == img.height,
            "semantic map is " + std::to_string(sem->width) + "x" +
                std::to_string(sem->height) + " but image is " +
                std::to_string(img.width) + "x" + std::to_string(img.height));
    scores.structure = structure_scores(binarize(*sem, foreground), grid);
  } else {
    scores.structure.assign(grid.count(), 1.0);
  }
  scores.info = strategy_scores(strategy, scores.texture, scores.structure);
  return scores;
}

struct MaskResult {
  PatchScores scores;
  CategoricalDist dist;
  MaskPlan plan;
};

inline MaskResult plan_mask(const ImageRGB& img, const SemanticMap* sem,
                            const PatchGrid& grid, const MaskConfig& cfg) {
  MaskResult r;
  r.scores = compute_scores(img, sem, grid, cfg.strategy, cfg.foreground);
  r.dist = categorical(r.scores.info, cfg.temperature);
  r.plan = sample_visible(r.dist, cfg.ratio, cfg.seed, cfg.mode);
  r.plan.strategy = cfg.strategy;
  return r;
}

}  // namespace mcm::damask
