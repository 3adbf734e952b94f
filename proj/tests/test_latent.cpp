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
#include <numbers>
#include <random>

#include "mcm/basis_io.hpp"
#include "mcm/latent.hpp"
#include "test_util.hpp"

namespace mcm::latent {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Cyclic Jacobi eigenvalue oracle for a symmetric matrix; returns the
// eigenvalues sorted descending.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off < 1e-22) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

std::vector<double> covariance_oracle(const std::vector<Patch>& patches) {
  const size_t d = patches[0].size();
  std::vector<double> mean(d, 0.0), cov(d * d, 0.0);
  for (const auto& p : patches) {
    for (size_t i = 0; i < d; ++i) mean[i] += p[i] / double(patches.size());
  }
  for (const auto& p : patches) {
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = 0; j < d; ++j) {
        cov[i * d + j] += (p[i] - mean[i]) * (p[j] - mean[j]) / double(patches.size());
      }
    }
  }
  return cov;
}

TEST(Zigzag, FirstEntries) {
  const auto z = zigzag_order(4);
  ASSERT_EQ(z.size(), 16u);
  const std::vector<std::pair<int, int>> head = {{0, 0}, {0, 1}, {1, 0}, {2, 0}, {1, 1}, {0, 2}};
  const std::vector<std::pair<int, int>> first(z.begin(), z.begin() + 6);
  EXPECT_EQ(first, head);
  EXPECT_EQ(z.back(), std::make_pair(3, 3));
}

TEST(Dct, DcVectorAndOrthonormality) {
  const auto b2 = dct_basis(2, 4);
  for (double v : b2.component(0)) EXPECT_NEAR(v, 0.5, 1e-15);
  for (int n : {2, 4, 8, 16}) {
    const auto b = dct_basis(n, size_t(n) * n);
    for (size_t i = 0; i < b.count; ++i) {
      for (size_t j = 0; j < b.count; ++j) {
        ASSERT_NEAR(dot(b.component(i), b.component(j)), i == j ? 1.0 : 0.0, 1e-6);
      }
    }
  }
  EXPECT_THROW(dct_basis(4, 0), Error);
  EXPECT_THROW(dct_basis(4, 17), Error);
}

// Component 1 is the horizontal half-cosine; checked against the closed form.
TEST(Dct, FirstAcComponent) {
  const int n = 8;
  const auto b = dct_basis(n, 2);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double want = std::sqrt(1.0 / n) * std::sqrt(2.0 / n) *
                          std::cos((2 * x + 1) * std::numbers::pi / (2.0 * n));
      EXPECT_NEAR(b.component(1)[size_t(y * n + x)], want, 1e-15);
    }
  }
}

TEST(Transform, RoundTripAndEnergy) {
  std::mt19937_64 rng(31);
  const auto full = dct_basis(16, 256);
  const auto part = dct_basis(16, 40);
  std::uniform_real_distribution<double> u(-128.0, 127.0);
  for (int t = 0; t < 50; ++t) {
    Patch p(256);
    for (auto& v : p) v = u(rng);
    const auto c = forward_transform(p, full);
    const auto back = inverse_transform(c, full);
    double err = 0.0;
    for (size_t i = 0; i < p.size(); ++i) err = std::max(err, std::abs(back[i] - p[i]));
    EXPECT_LE(err, 1e-4);
    const double energy = dot(p, p);
    EXPECT_NEAR(dot(c, c), energy, 1e-6 * energy);
    const auto cp = forward_transform(p, part);
    EXPECT_LE(dot(cp, cp), energy + 1e-9);
  }
  const auto flat = forward_transform(Patch(256, 37.0), full);
  EXPECT_NEAR(flat[0], 37.0 * 16.0, 1e-9);
  for (size_t i = 1; i < flat.size(); ++i) EXPECT_NEAR(flat[i], 0.0, 1e-9);
  EXPECT_THROW(forward_transform(Patch(255, 0.0), full), Error);
  EXPECT_THROW(inverse_transform(std::vector<double>(3), full), Error);
}

TEST(Pca, RankOneCorpus) {
  std::mt19937_64 rng(32);
  Patch v(16);
  std::normal_distribution<double> g;
  for (auto& e : v) e = g(rng);
  std::vector<Patch> corpus;
  for (int i = 0; i < 200; ++i) {
    const double s = g(rng) * 10.0;
    Patch p(16);
    for (size_t j = 0; j < 16; ++j) p[j] = s * v[j];
    corpus.push_back(p);
  }
  const auto r = train_pca_basis(corpus, 4);
  EXPECT_TRUE(r.rank_deficient);
  ASSERT_EQ(r.basis.count, 1u);
  const double norm = std::sqrt(dot(v, v));
  EXPECT_NEAR(std::abs(dot(r.basis.component(0), v)) / norm, 1.0, 1e-9);
  for (const auto& p : corpus) {
    const auto back = inverse_transform(forward_transform(p, r.basis), r.basis);
    for (size_t j = 0; j < 16; ++j) ASSERT_NEAR(back[j], p[j], 1e-6);
  }
}

TEST(Pca, IsotropicNoiseHasFlatSpectrum) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> g;
  std::vector<Patch> corpus(100000, Patch(16));
  for (auto& p : corpus) {
    for (auto& e : p) e = g(rng);
  }
  const auto r = train_pca_basis(corpus, 16);
  ASSERT_EQ(r.eigenvalues.size(), 16u);
  const auto [lo, hi] = std::minmax_element(r.eigenvalues.begin(), r.eigenvalues.end());
  EXPECT_LE(*hi / *lo, 1.10);
}

TEST(Pca, MatchesJacobiOracle) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> g;
  const size_t d = 64;  // 8x8 toy patches
  // Random orthonormal directions with a geometric spectrum.
  TransformBasis dirs;
  dirs.dim = d;
  dirs.count = d;
  dirs.components.resize(d * d);
  for (auto& e : dirs.components) e = g(rng);
  ASSERT_TRUE(orthonormalize(dirs));
  std::vector<Patch> corpus(5000, Patch(d, 0.0));
  for (auto& p : corpus) {
    for (size_t k = 0; k < d; ++k) {
      const double a = g(rng) * 40.0 * std::pow(0.85, double(k));
      for (size_t i = 0; i < d; ++i) p[i] += a * dirs.components[k * d + i];
    }
  }
  const auto oracle = jacobi_eigenvalues(covariance_oracle(corpus), d);
  const size_t m = 12;
  const auto r = train_pca_basis(corpus, m);
  ASSERT_EQ(r.eigenvalues.size(), m);
  for (size_t k = 0; k < m; ++k) {
    EXPECT_NEAR(r.eigenvalues[k], oracle[k], 1e-6 * oracle[0]) << k;
    if (k > 0) {
      EXPECT_LE(r.eigenvalues[k], r.eigenvalues[k - 1]);
    }
  }
  double trace = 0.0;
  for (double e : oracle) trace += e;
  EXPECT_NEAR(r.total_variance, trace, 1e-9 * trace);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) {
      ASSERT_NEAR(dot(r.basis.component(i), r.basis.component(j)), i == j ? 1.0 : 0.0, 1e-9);
    }
  }
}

TEST(Pca, DeterministicAndValidated) {
  std::mt19937_64 rng(35);
  std::vector<Patch> corpus;
  for (int i = 0; i < 300; ++i) corpus.push_back(testing::random_plane(rng, 4, 4).data);
  const auto a = train_pca_basis(corpus, 6);
  const auto b = train_pca_basis(corpus, 6);
  EXPECT_EQ(a.basis.components, b.basis.components);
  EXPECT_EQ(serialize_basis(a.basis), serialize_basis(b.basis));
  EXPECT_THROW(train_pca_basis(std::vector<Patch>{}, 1), Error);
  EXPECT_THROW(train_pca_basis(corpus, 17), Error);
  EXPECT_THROW(train_pca_basis(std::vector<Patch>(10, Patch(16, 3.0)), 2), Error);
}

TEST(Quantizer, RoundingRules) {
  const auto unit = QuantSpec::from_step(1.0);
  EXPECT_EQ(quantize(3.7, unit), 4);
  EXPECT_EQ(dequantize(4, unit), 4.0);
  EXPECT_EQ(quantize(-0.5, unit), -1);
  EXPECT_EQ(quantize(0.5, unit), 1);
  EXPECT_EQ(quantize(0.49, unit), 0);
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> u(-3000.0, 3000.0);
  for (int q = kMinQuality; q <= kMaxQuality; ++q) {
    const auto spec = QuantSpec::from_quality(q);
    for (int t = 0; t < 1000; ++t) {
      const double c = u(rng);
      EXPECT_LE(std::abs(dequantize(quantize(c, spec), spec) - c), spec.step / 2 + 1e-12);
    }
  }
}

TEST(Quantizer, PresetLadder) {
  EXPECT_DOUBLE_EQ(QuantSpec::from_quality(10).step, kBaseStep);
  for (int q = kMinQuality; q < kMaxQuality; ++q) {
    EXPECT_NEAR(QuantSpec::from_quality(q).step / QuantSpec::from_quality(q + 1).step,
                std::pow(2.0, 2.0 / 3.0), 1e-12);
  }
  EXPECT_THROW(QuantSpec::from_quality(0), Error);
  EXPECT_THROW(QuantSpec::from_quality(11), Error);
  EXPECT_THROW(QuantSpec::from_step(0.0), Error);
  EXPECT_THROW(QuantSpec::from_step(5000.0), Error);
}

TEST(Symbols, HandExamples) {
  EXPECT_EQ(to_symbol(0), (CoeffSymbol{0, false, 0}));
  EXPECT_EQ(to_symbol(-20), (CoeffSymbol{15, true, 5}));
  EXPECT_EQ(to_symbol(15), (CoeffSymbol{15, false, 0}));
  EXPECT_EQ(to_symbol(7), (CoeffSymbol{7, false, 0}));
  EXPECT_EQ(exp_golomb_bits(5), (std::vector<bool>{0, 0, 1, 1, 0}));
  EXPECT_EQ(exp_golomb_bits(0), (std::vector<bool>{1}));
  EXPECT_EQ(exp_golomb_bits(1), (std::vector<bool>{0, 1, 0}));
  for (int32_t q : {0, 1, -1, 14, -15, 15, 16, -20, 1000, -65536, 2147483647, -2147483647}) {
    EXPECT_EQ(from_symbol(to_symbol(q)), q);
  }
}

TEST(Symbols, ExpGolombRoundTripAndGuard) {
  for (uint32_t v : {0u, 1u, 2u, 5u, 100u, 65535u, 4294967294u}) {
    const auto bits = exp_golomb_bits(v);
    size_t i = 0;
    EXPECT_EQ(read_exp_golomb([&] { return bool(bits[i++]); }), v);
    EXPECT_EQ(i, bits.size());
  }
  EXPECT_THROW(read_exp_golomb([] { return false; }), Error);
}

TEST(Symbols, BandGroups) {
  EXPECT_EQ(band_group(0), 0);
  EXPECT_EQ(band_group(1), 1);
  EXPECT_EQ(band_group(5), 1);
  EXPECT_EQ(band_group(6), 2);
  EXPECT_EQ(band_group(20), 2);
  EXPECT_EQ(band_group(21), 3);
}

TEST(Latents, RandomTensorsRoundTrip) {
  std::mt19937_64 rng(37);
  std::geometric_distribution<int> geo(0.4);
  for (int t = 0; t < 100; ++t) {
    LatentTensor tensor{1 + rng() % 20, 1 + rng() % 64, 1 + rng() % 32, {}};
    tensor.values.resize(tensor.patches * tensor.per_patch());
    for (auto& v : tensor.values) {
      int mag = geo(rng);
      if (rng() % 50 == 0) mag += int(rng() % 100000);
      v = rng() & 1 ? -mag : mag;
    }
    const auto bytes = encode_latents(tensor);
    EXPECT_EQ(decode_latents(bytes, tensor.patches, tensor.luma_coeffs, tensor.chroma_coeffs),
              tensor);
  }
}

TEST(Latents, ShapeAndCorruption) {
  LatentTensor tensor{2, 4, 2, std::vector<int32_t>(16, 3)};
  const auto bytes = encode_latents(tensor);
  EXPECT_EQ(tensor.offset(1, 2), 8u + 4u + 2u);
  auto extra = bytes;
  extra.push_back(0x55);
  EXPECT_THROW(decode_latents(extra, 2, 4, 2), Error);
  EXPECT_THROW(decode_latents(std::span(bytes).first(1), 2, 4, 2), Error);
  tensor.values.pop_back();
  EXPECT_THROW(encode_latents(tensor), Error);
}

TEST(BasisFile, RoundTripAndErrors) {
  std::mt19937_64 rng(38);
  std::vector<Patch> corpus;
  for (int i = 0; i < 400; ++i) corpus.push_back(testing::random_plane(rng, 4, 4).data);
  const auto basis = train_pca_basis(corpus, 5).basis;
  testing::TempDir dir("basis");
  save_basis(basis, dir / "b.mcmb");
  const auto back = load_basis(dir / "b.mcmb");
  EXPECT_EQ(back.patch_size, 4);
  EXPECT_EQ(back.count, 5u);
  for (size_t i = 0; i < basis.components.size(); ++i) {
    EXPECT_NEAR(back.components[i], basis.components[i], 1e-6);
  }
  const auto bytes = serialize_basis(basis);
  EXPECT_EQ(bytes.size(), 12u + 4u * 16u * 6u);
  auto kind = [](std::vector<uint8_t> b) {
    try {
      parse_basis(b);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind(bad_magic), ErrorKind::kFormat);
  auto short_file = bytes;
  short_file.pop_back();
  EXPECT_EQ(kind(short_file), ErrorKind::kFormat);
  auto zero_m = bytes;
  zero_m[8] = 0;
  EXPECT_EQ(kind(zero_m), ErrorKind::kFormat);
}

}  // namespace
}  // namespace mcm::latent
