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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "mcm/damask.hpp"
#include "mcm/synth.hpp"
#include "test_util.hpp"

namespace mcm::damask {
namespace {

// Brute-force oracles: each patch is scored straight from raw pixels.
double gray_oracle(const ImageRGB& img, int x, int y) {
  x = std::clamp(x, 0, img.width - 1);
  y = std::clamp(y, 0, img.height - 1);
  const uint8_t* p = img.at(x, y);
  if (p[0] == p[1] && p[1] == p[2]) return p[0];
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

double texture_oracle(const ImageRGB& img, int n, int row, int col) {
  double s = 0.0;
  for (int y = row * n; y < (row + 1) * n; ++y) {
    for (int x = col * n; x < (col + 1) * n; ++x) {
      const double lap = gray_oracle(img, x, y - 1) + gray_oracle(img, x, y + 1) +
                         gray_oracle(img, x - 1, y) + gray_oracle(img, x + 1, y) -
                         4.0 * gray_oracle(img, x, y);
      s += std::abs(lap);
    }
  }
  return s;
}

double structure_oracle(const SemanticMap& sem, int n, int row, int col) {
  int count = 0;
  for (int y = row * n; y < (row + 1) * n; ++y) {
    for (int x = col * n; x < (col + 1) * n; ++x) count += sem.at(x, y) != 0 ? 1 : 0;
  }
  return count;
}

std::vector<uint32_t> sort_oracle(const std::vector<double>& keys, size_t k) {
  std::vector<std::pair<double, uint32_t>> v;
  for (uint32_t i = 0; i < keys.size(); ++i) v.push_back({-keys[i], i});
  std::sort(v.begin(), v.end());
  std::vector<uint32_t> out;
  for (size_t i = 0; i < k; ++i) out.push_back(v[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Laplacian, ConstantAndRamp) {
  const auto flat = laplacian(GrayPlane(8, 8, 42.0));
  for (double v : flat.data) EXPECT_EQ(v, 0.0);
  GrayPlane ramp(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) ramp.at(x, y) = x;
  }
  const auto lap = laplacian(ramp);
  for (int y = 0; y < 8; ++y) {
    for (int x = 1; x < 7; ++x) EXPECT_EQ(lap.at(x, y), 0.0);
    EXPECT_EQ(lap.at(0, y), 1.0);
    EXPECT_EQ(lap.at(7, y), -1.0);
  }
}

TEST(Laplacian, CenterImpulse) {
  GrayPlane p(3, 3, 0.0);
  p.at(1, 1) = 10.0;
  const auto lap = laplacian(p);
  EXPECT_EQ(lap.at(1, 1), -40.0);
  EXPECT_EQ(lap.at(0, 1), 10.0);
  EXPECT_EQ(lap.at(2, 1), 10.0);
  EXPECT_EQ(lap.at(1, 0), 10.0);
  EXPECT_EQ(lap.at(1, 2), 10.0);
  EXPECT_EQ(lap.at(0, 0), 0.0);
}

TEST(TextureScores, HandValues) {
  TextureMap t{4, 4, std::vector<double>(16, 0.0)};
  t.data[0] = -3.0;
  t.data[1] = 2.0;
  t.data[15] = 7.5;
  const auto s = texture_scores(t, PatchGrid(4, 4, 2));
  EXPECT_EQ(s, (std::vector<double>{5.0, 0.0, 0.0, 7.5}));
  const auto zero = texture_scores(laplacian(GrayPlane(32, 32, 9.0)), PatchGrid(32, 32, 16));
  EXPECT_EQ(zero, std::vector<double>(4, 0.0));
}

TEST(Binarize, Rules) {
  SemanticMap m(3, 1);
  m.labels = {0, 1, 2};
  EXPECT_EQ(binarize(m).data, (std::vector<uint8_t>{0, 1, 1}));
  EXPECT_EQ(binarize(m, std::set<uint8_t>{2}).data, (std::vector<uint8_t>{0, 0, 1}));
  EXPECT_EQ(binarize(SemanticMap(3, 1)).data, (std::vector<uint8_t>{0, 0, 0}));
  EXPECT_THROW(binarize(m, std::set<uint8_t>{}), Error);
}

TEST(StructureScores, FullAndEmptyPatches) {
  SemanticMap m(32, 16, 0);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) m.at(x, y) = 3;
  }
  EXPECT_EQ(structure_scores(binarize(m), PatchGrid(32, 16, 16)),
            (std::vector<double>{256.0, 0.0}));
}

TEST(StrategyScores, Definitions) {
  const std::vector<double> t = {10, 2}, s = {4, 0};
  EXPECT_EQ(strategy_scores(Strategy::kDamask, t, s), (std::vector<double>{40, 0}));
  EXPECT_EQ(strategy_scores(Strategy::kTexture, t, s), t);
  EXPECT_EQ(strategy_scores(Strategy::kStructure, t, s), s);
  EXPECT_EQ(strategy_scores(Strategy::kRandom, {1, 2, 3, 4}, {5, 6, 7, 8}),
            (std::vector<double>(4, 1.0)));
  EXPECT_THROW(strategy_scores(Strategy::kDamask, {1, 2}, {1}), Error);
}

TEST(StrategyNames, RoundTrip) {
  for (auto s : {Strategy::kRandom, Strategy::kTexture, Strategy::kStructure, Strategy::kDamask}) {
    EXPECT_EQ(parse_strategy(strategy_name(s)), s);
  }
  EXPECT_FALSE(parse_strategy("mae").has_value());
}

// Scores from the pipeline equal the per-patch pixel oracles bit for bit.
TEST(ScoreOracle, RandomImages) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const int n = t % 3 == 0 ? 4 : 8;
    const int w = n * (1 + int(rng() % 6)), h = n * (1 + int(rng() % 6));
    const ImageRGB img = t % 4 == 0 ? synth::structured_scene(uint64_t(t), 32, 32).image
                                    : testing::random_image(rng, w, h);
    const SemanticMap sem = testing::random_labels(rng, img.width, img.height, 3);
    const PatchGrid grid(img.width, img.height, n);
    const auto s = compute_scores(img, &sem, grid, Strategy::kDamask);
    for (size_t l = 0; l < grid.count(); ++l) {
      const double te = texture_oracle(img, n, grid.row_of(l), grid.col_of(l));
      const double st = structure_oracle(sem, n, grid.row_of(l), grid.col_of(l));
      ASSERT_EQ(s.texture[l], te) << "image " << t << " patch " << l;
      ASSERT_EQ(s.structure[l], st) << "image " << t << " patch " << l;
      ASSERT_EQ(s.info[l], st * te) << "image " << t << " patch " << l;
    }
  }
}

TEST(ScoreOracle, NoSemanticMapGivesUnitStructure) {
  std::mt19937_64 rng(12);
  const ImageRGB img = testing::random_image(rng, 32, 32);
  const PatchGrid grid(32, 32, 16);
  const auto s = compute_scores(img, nullptr, grid, Strategy::kDamask);
  EXPECT_EQ(s.structure, std::vector<double>(4, 1.0));
  EXPECT_EQ(s.info, s.texture);
  const SemanticMap wrong(16, 16);
  EXPECT_THROW(compute_scores(img, &wrong, grid, Strategy::kDamask), Error);
}

TEST(Categorical, Softmax) {
  const auto u = categorical({3, 3, 3, 3}, 0.1);
  for (double a : u.alpha) EXPECT_DOUBLE_EQ(a, 0.25);
  const auto z = categorical({0, 0, 0}, 0.1);
  for (double a : z.alpha) EXPECT_DOUBLE_EQ(a, 1.0 / 3.0);
  const auto two = categorical({1, 0}, 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(two.alpha[0], e / (e + 1.0), 1e-12);
  EXPECT_NEAR(two.alpha[1], 1.0 / (e + 1.0), 1e-12);
  EXPECT_NEAR(two.alpha[0], 0.7311, 1e-4);
  EXPECT_NEAR(two.alpha[1], 0.2689, 1e-4);
  EXPECT_THROW(categorical({}, 0.1), Error);
  EXPECT_THROW(categorical({1}, 0.0), Error);
}

TEST(Categorical, SumsToOne) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> info(1 + rng() % 300);
    for (auto& v : info) v = rng() % 5 == 0 ? 0.0 : u(rng);
    const double tau = std::ldexp(1.0, -int(rng() % 8));
    const auto d = categorical(info, tau);
    EXPECT_NEAR(std::accumulate(d.alpha.begin(), d.alpha.end(), 0.0), 1.0, 1e-9);
    for (double a : d.alpha) EXPECT_GT(a, 0.0);
  }
}

TEST(MaskingRatio, RationalEncoding) {
  const auto r75 = MaskingRatio::nearest(0.75);
  EXPECT_EQ(r75.num, 191);
  EXPECT_EQ(r75.den, 255);
  EXPECT_EQ(r75.visible_count(256), 64u);
  const auto r43 = MaskingRatio::nearest(0.43);
  EXPECT_EQ(r43.num, 110);
  // 256 * 145 / 255 = 145.57
  EXPECT_EQ(r43.visible_count(256), 146u);
  EXPECT_THROW(MaskingRatio::nearest(0.0), Error);
  EXPECT_THROW(MaskingRatio::nearest(1.0), Error);
  EXPECT_THROW(MaskingRatio::nearest(0.001), Error);
  for (int n = 1; n < 255; ++n) {
    const MaskingRatio r{uint8_t(n), 255};
    for (size_t l : {4u, 16u, 256u, 1024u}) {
      const double exact = double(l) * double(255 - n) / 255.0;
      EXPECT_EQ(double(r.visible_count(l)), std::floor(exact + 0.5)) << n << " " << l;
    }
  }
}

TEST(TopK, HandExampleAndTies) {
  EXPECT_EQ(top_k_indices({5, 1, 9, 9}, 2), (std::vector<uint32_t>{2, 3}));
  EXPECT_EQ(top_k_indices({1, 1, 1, 1}, 2), (std::vector<uint32_t>{0, 1}));
  EXPECT_EQ(top_k_indices({0, 2, 2, 2}, 2), (std::vector<uint32_t>{1, 2}));
}

TEST(TopK, MatchesSortOracle) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> keys(1 + rng() % 64);
    const int levels = 1 + int(rng() % 6);  // few distinct values force ties
    for (auto& v : keys) v = double(rng() % uint64_t(levels));
    const size_t k = 1 + rng() % keys.size();
    ASSERT_EQ(top_k_indices(keys, k), sort_oracle(keys, k)) << "trial " << t;
  }
}

TEST(SampleVisible, DeterministicMode) {
  CategoricalDist d = categorical({5, 1, 9, 9}, 1.0);
  const auto plan = sample_visible(d, MaskingRatio{128, 255}, 0, SampleMode::kDeterministic);
  EXPECT_EQ(plan.k, 2u);
  EXPECT_EQ(plan.visible, (std::vector<uint32_t>{2, 3}));
}

TEST(SampleVisible, RatioBoundsAndShape) {
  const CategoricalDist d = categorical(std::vector<double>(256, 1.0), 0.1);
  const auto plan = sample_visible(d, MaskingRatio::nearest(0.75), 7, SampleMode::kStochastic);
  EXPECT_EQ(plan.visible.size(), 64u);
  EXPECT_TRUE(std::is_sorted(plan.visible.begin(), plan.visible.end()));
  EXPECT_EQ(std::set<uint32_t>(plan.visible.begin(), plan.visible.end()).size(), 64u);
  const CategoricalDist tiny = categorical({1, 2}, 0.1);
  EXPECT_THROW(sample_visible(tiny, MaskingRatio{254, 255}, 0, SampleMode::kStochastic), Error);
  EXPECT_THROW(sample_visible(tiny, MaskingRatio{1, 255}, 0, SampleMode::kStochastic), Error);
}

TEST(SampleVisible, SeedDeterminism) {
  const CategoricalDist d = categorical({1, 5, 2, 8, 3, 0, 7, 4}, 0.5);
  const auto a = sample_visible(d, MaskingRatio{128, 255}, 99, SampleMode::kStochastic);
  const auto b = sample_visible(d, MaskingRatio{128, 255}, 99, SampleMode::kStochastic);
  EXPECT_EQ(a.visible, b.visible);
  bool differs = false;
  for (uint64_t s = 0; s < 20 && !differs; ++s) {
    differs = sample_visible(d, MaskingRatio{128, 255}, s, SampleMode::kStochastic).visible !=
              a.visible;
  }
  EXPECT_TRUE(differs);
}

// Inclusion frequencies of Gumbel-top-k against the exact probabilities of
// sequential sampling without replacement, enumerated over every ordering.
TEST(SampleVisible, GumbelFrequenciesMatchEnumeration) {
  const std::vector<double> alpha = {0.1, 0.2, 0.3, 0.4};
  const CategoricalDist d{alpha};
  const size_t k = 2;
  std::map<std::vector<uint32_t>, double> exact;
  std::vector<uint32_t> perm = {0, 1, 2, 3};
  do {
    double p = 1.0, left = 1.0;
    for (size_t i = 0; i < k; ++i) {
      p *= alpha[perm[i]] / left;
      left -= alpha[perm[i]];
    }
    std::vector<uint32_t> chosen(perm.begin(), perm.begin() + k);
    std::sort(chosen.begin(), chosen.end());
    exact[chosen] += p / 2.0;  // each k-prefix appears (4-k)! = 2 times
  } while (std::next_permutation(perm.begin(), perm.end()));

  const MaskingRatio half{128, 255};  // k = round(4 * 127 / 255) = 2
  ASSERT_EQ(half.visible_count(4), k);
  std::map<std::vector<uint32_t>, double> seen;
  const int trials = 100000;
  for (int s = 0; s < trials; ++s) {
    seen[sample_visible(d, half, uint64_t(s), SampleMode::kStochastic).visible] += 1.0 / trials;
  }
  double total = 0.0;
  for (const auto& [subset, p] : exact) {
    total += p;
    EXPECT_NEAR(seen[subset], p, 0.01) << subset[0] << "," << subset[1];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(PlanMask, UsesConfig) {
  const auto scene = synth::structured_scene(5, 64, 64);
  const PatchGrid grid(64, 64, 16);
  MaskConfig cfg;
  cfg.mode = SampleMode::kDeterministic;
  const auto r = plan_mask(scene.image, &scene.labels, grid, cfg);
  EXPECT_EQ(r.plan.k, 4u);
  EXPECT_EQ(r.plan.visible, top_k_indices(r.dist.alpha, 4));
  EXPECT_EQ(r.plan.strategy, Strategy::kDamask);
}

}  // namespace
}  // namespace mcm::damask
