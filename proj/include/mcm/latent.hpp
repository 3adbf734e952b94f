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

// Per-patch linear transforms and the quantized latent representation.
//
// A patch is flattened row-major to N*N values, projected on an orthonormal
// basis (separable DCT-II in zigzag order, or a PCA basis trained on a patch
// corpus), and the coefficients are quantized with a uniform mid-tread
// quantizer.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcm/error.hpp"
#include "mcm/image.hpp"
#include "mcm/range_coder.hpp"

namespace mcm::latent {

enum class BasisKind : uint8_t {
  kDct = 0,
  kPca = 1,
};

inline const char* basis_name(BasisKind k) {
  return k == BasisKind::kDct ? "dct" : "pca";
}

struct TransformBasis {
  BasisKind kind = BasisKind::kDct;
  int patch_size = 0;
  size_t dim = 0;                  // patch_size^2
  size_t count = 0;                // number of components M
  std::vector<double> components;  // count x dim, row-major
  std::vector<double> mean;        // dim

  std::span<const double> component(size_t m) const {
    return {components.data() + m * dim, dim};
  }
};

// (row, col) frequency pairs in JPEG zigzag order.
inline std::vector<std::pair<int, int>> zigzag_order(int n) {
  std::vector<std::pair<int, int>> order;
  order.reserve(size_t(n) * n);
  for (int s = 0; s <= 2 * (n - 1); ++s) {
    const int lo = std::max(0, s - (n - 1));
    const int hi = std::min(s, n - 1);
    if (s % 2 == 1) {
      for (int row = lo; row <= hi; ++row) order.emplace_back(row, s - row);
    } else {
      for (int row = hi; row >= lo; --row) order.emplace_back(row, s - row);
    }
  }
  return order;
}

inline TransformBasis dct_basis(int n, size_t m) {
  require(n >= 2, "patch size must be at least 2");
  const size_t dim = size_t(n) * n;
  require(m >= 1 && m <= dim, "retained coefficient count must be in [1, N^2]");
  TransformBasis b;
  b.kind = BasisKind::kDct;
  b.patch_size = n;
  b.dim = dim;
  b.count = m;
  b.mean.assign(dim, 0.0);
  b.components.assign(m * dim, 0.0);
  const auto order = zigzag_order(n);
  auto scale = [n](int k) { return std::sqrt((k == 0 ? 1.0 : 2.0) / n); };
  for (size_t c = 0; c < m; ++c) {
    const auto [fv, fu] = order[c];
    for (int y = 0; y < n; ++y) {
      const double cy = std::cos((2 * y + 1) * fv * std::numbers::pi / (2.0 * n));
      for (int x = 0; x < n; ++x) {
        const double cx = std::cos((2 * x + 1) * fu * std::numbers::pi / (2.0 * n));
        b.components[c * dim + size_t(y) * n + x] = scale(fu) * scale(fv) * cx * cy;
      }
    }
  }
  return b;
}

// The first `m` components of `basis`, sharing its mean.
inline TransformBasis truncated(const TransformBasis& basis, size_t m) {
  require(m >= 1 && m <= basis.count, "cannot truncate basis to that many components");
  TransformBasis out = basis;
  out.count = m;
  out.components.resize(m * basis.dim);
  return out;
}

inline std::vector<double> forward_transform(std::span<const double> patch,
                                             const TransformBasis& basis) {
  require(patch.size() == basis.dim,
          "patch length " + std::to_string(patch.size()) +
              " does not match basis dimension " + std::to_string(basis.dim));
  std::vector<double> centered(patch.begin(), patch.end());
  for (size_t i = 0; i < basis.dim; ++i) centered[i] -= basis.mean[i];
  std::vector<double> coeffs(basis.count, 0.0);
  for (size_t m = 0; m < basis.count; ++m) {
    const double* comp = basis.components.data() + m * basis.dim;
    double acc = 0.0;
    for (size_t i = 0; i < basis.dim; ++i) acc += centered[i] * comp[i];
    coeffs[m] = acc;
  }
  return coeffs;
}

inline std::vector<double> inverse_transform(std::span<const double> coeffs,
                                             const TransformBasis& basis) {
  require(coeffs.size() == basis.count,
          "coefficient count does not match basis size");
  std::vector<double> patch = basis.mean;
  for (size_t m = 0; m < basis.count; ++m) {
    const double* comp = basis.components.data() + m * basis.dim;
    for (size_t i = 0; i < basis.dim; ++i) patch[i] += coeffs[m] * comp[i];
  }
  return patch;
}

// Gram-Schmidt in place, twice per vector for stability. Returns false if a
// component collapses to zero.
inline bool orthonormalize(TransformBasis& basis) {
  const size_t dim = basis.dim;
  for (size_t m = 0; m < basis.count; ++m) {
    double* v = basis.components.data() + m * dim;
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t j = 0; j < m; ++j) {
        const double* u = basis.components.data() + j * dim;
        double dot = 0.0;
        for (size_t i = 0; i < dim; ++i) dot += v[i] * u[i];
        for (size_t i = 0; i < dim; ++i) v[i] -= dot * u[i];
      }
    }
    double norm = 0.0;
    for (size_t i = 0; i < dim; ++i) norm += v[i] * v[i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) return false;
    for (size_t i = 0; i < dim; ++i) v[i] /= norm;
  }
  return true;
}

struct PcaResult {
  TransformBasis basis;
  std::vector<double> eigenvalues;  // non-increasing
  double total_variance = 0.0;
  bool rank_deficient = false;      // fewer than the requested components
};

struct PcaOptions {
  double tolerance = 1e-6;  // direction change between iterations
  int max_iterations = 1000;
  double rank_epsilon = 1e-9;  // eigenvalue floor relative to total variance
};

// Top principal directions of the centred corpus by power iteration with
// deflation. Start vectors come from a fixed-seed generator, so training is
// reproducible.
inline PcaResult train_pca_basis(std::span<const Patch> corpus, size_t m,
                                 const PcaOptions& opts = {}) {
  require(!corpus.empty(), "PCA corpus is empty");
  const size_t dim = corpus.front().size();
  const int n = int(std::lround(std::sqrt(double(dim))));
  require(size_t(n) * n == dim, "patches must be square");
  require(m >= 1 && m <= dim, "component count must be in [1, N^2]");
  require(corpus.size() >= m, "PCA corpus smaller than the component count");

  std::vector<double> mean(dim, 0.0);
  for (const Patch& p : corpus) {
    require(p.size() == dim, "PCA corpus has mixed patch sizes");
    for (size_t i = 0; i < dim; ++i) mean[i] += p[i];
  }
  for (double& v : mean) v /= double(corpus.size());

  std::vector<double> cov(dim * dim, 0.0);
  std::vector<double> centered(dim);
  for (const Patch& p : corpus) {
    for (size_t i = 0; i < dim; ++i) centered[i] = p[i] - mean[i];
    for (size_t i = 0; i < dim; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      double* row = &cov[i * dim];
      for (size_t j = i; j < dim; ++j) row[j] += ci * centered[j];
    }
  }
  const double inv_n = 1.0 / double(corpus.size());
  for (size_t i = 0; i < dim; ++i) {
    for (size_t j = i; j < dim; ++j) {
      cov[i * dim + j] *= inv_n;
      cov[j * dim + i] = cov[i * dim + j];
    }
  }
  double trace = 0.0;
  for (size_t i = 0; i < dim; ++i) trace += cov[i * dim + i];
  require(trace > 0.0, "PCA corpus has zero variance");

  const std::vector<double> original = cov;
  auto multiply = [&](const std::vector<double>& mat, const std::vector<double>& v,
                      std::vector<double>& out) {
    for (size_t i = 0; i < dim; ++i) {
      const double* row = &mat[i * dim];
      double acc = 0.0;
      for (size_t j = 0; j < dim; ++j) acc += row[j] * v[j];
      out[i] = acc;
    }
  };

  std::vector<std::vector<double>> found;
  std::vector<double> values;
  std::mt19937_64 rng(0x6d636d62u);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<double> v(dim), w(dim);
  auto project_out = [&](std::vector<double>& x) {
    for (const auto& u : found) {
      double dot = 0.0;
      for (size_t i = 0; i < dim; ++i) dot += x[i] * u[i];
      for (size_t i = 0; i < dim; ++i) x[i] -= dot * u[i];
    }
  };
  auto normalize = [&](std::vector<double>& x) {
    double norm = 0.0;
    for (double e : x) norm += e * e;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& e : x) e /= norm;
    }
    return norm;
  };

  for (size_t c = 0; c < m; ++c) {
    for (double& e : v) e = uniform(rng);
    project_out(v);
    normalize(v);
    double lambda = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
      multiply(cov, v, w);
      project_out(w);
      lambda = normalize(w);
      if (lambda <= opts.rank_epsilon * trace) break;
      double plus = 0.0, minus = 0.0;
      for (size_t i = 0; i < dim; ++i) {
        plus += (w[i] - v[i]) * (w[i] - v[i]);
        minus += (w[i] + v[i]) * (w[i] + v[i]);
      }
      v.swap(w);
      if (std::sqrt(std::min(plus, minus)) < opts.tolerance) break;
    }
    if (lambda <= opts.rank_epsilon * trace) break;
    // Rayleigh quotient against the undeflated covariance.
    multiply(original, v, w);
    double rayleigh = 0.0;
    for (size_t i = 0; i < dim; ++i) rayleigh += v[i] * w[i];
    for (size_t i = 0; i < dim; ++i) {
      for (size_t j = 0; j < dim; ++j) cov[i * dim + j] -= rayleigh * v[i] * v[j];
    }
    found.push_back(v);
    values.push_back(rayleigh);
  }
  require(!found.empty(), "PCA corpus has zero variance");

  std::vector<size_t> order(found.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] > values[b]; });

  PcaResult r;
  r.total_variance = trace;
  r.rank_deficient = found.size() < m;
  r.basis.kind = BasisKind::kPca;
  r.basis.patch_size = n;
  r.basis.dim = dim;
  r.basis.count = found.size();
  r.basis.mean = mean;
  for (size_t idx : order) {
    r.basis.components.insert(r.basis.components.end(), found[idx].begin(),
                               found[idx].end());
    r.eigenvalues.push_back(values[idx]);
  }
  orthonormalize(r.basis);
  return r;
}

// ---------------------------------------------------------------------------
// Quantization

// Step of preset 10; each preset below it multiplies the step by 2^(2/3).
inline constexpr double kBaseStep = 3.0;
inline constexpr int kMinQuality = 1;
inline constexpr int kMaxQuality = 10;

struct QuantSpec {
  double step = 1.0;
  int quality = 0;  // 0 when the step was given explicitly

  static QuantSpec from_quality(int q) {
    require(q >= kMinQuality && q <= kMaxQuality,
            "quality must be in [1, 10], got " + std::to_string(q));
    return {std::exp2((kMaxQuality - q) / 1.5) * kBaseStep, q};
  }

  static QuantSpec from_step(double step) {
    require(step >= 1.0 / 64 && step <= 4096.0, "step must be in [1/64, 4096]");
    return {step, 0};
  }
};

inline int32_t quantize(double c, const QuantSpec& spec) {
  return int32_t(std::round(c / spec.step));
}

inline double dequantize(int32_t q, const QuantSpec& spec) {
  return double(q) * spec.step;
}

inline std::vector<int32_t> quantize(std::span<const double> coeffs,
                                     const QuantSpec& spec) {
  std::vector<int32_t> out(coeffs.size());
  for (size_t i = 0; i < coeffs.size(); ++i) out[i] = quantize(coeffs[i], spec);
  return out;
}

inline std::vector<double> dequantize(std::span<const int32_t> q,
                                      const QuantSpec& spec) {
  std::vector<double> out(q.size());
  for (size_t i = 0; i < q.size(); ++i) out[i] = dequantize(q[i], spec);
  return out;
}

// ---------------------------------------------------------------------------
// Coefficient symbols

inline constexpr int kMaxBucket = 15;
inline constexpr int kBandGroups = 4;

// DC, AC 1-5, AC 6-20, rest.
inline int band_group(size_t coeff_index) {
  if (coeff_index == 0) return 0;
  if (coeff_index <= 5) return 1;
  if (coeff_index <= 20) return 2;
  return 3;
}

struct CoeffSymbol {
  uint8_t bucket = 0;     // min(|q|, 15)
  bool negative = false;  // meaningful only when bucket != 0
  uint32_t tail = 0;      // |q| - 15 when bucket == 15, else 0

  bool operator==(const CoeffSymbol&) const = default;
};

inline CoeffSymbol to_symbol(int32_t q) {
  const uint32_t mag = q < 0 ? uint32_t(-int64_t(q)) : uint32_t(q);
  CoeffSymbol s;
  s.bucket = uint8_t(std::min<uint32_t>(mag, kMaxBucket));
  s.negative = q < 0;
  s.tail = mag >= kMaxBucket ? mag - kMaxBucket : 0;
  return s;
}

inline int32_t from_symbol(const CoeffSymbol& s) {
  const int64_t mag = int64_t(s.bucket) + (s.bucket == kMaxBucket ? s.tail : 0);
  return int32_t(s.negative ? -mag : mag);
}

// Order-0 Exp-Golomb: floor(log2(v+1)) zeros, then v+1 in binary.
inline std::vector<bool> exp_golomb_bits(uint32_t v) {
  const uint64_t x = uint64_t(v) + 1;
  const int width = int(std::bit_width(x));
  std::vector<bool> bits(size_t(width - 1), false);
  for (int i = width - 1; i >= 0; --i) bits.push_back((x >> i) & 1u);
  return bits;
}

template <typename BitSource>
uint32_t read_exp_golomb(BitSource&& next_bit) {
  int zeros = 0;
  while (!next_bit()) {
    ++zeros;
    check_stream(zeros <= 31, "malformed Exp-Golomb tail");
  }
  uint64_t x = 1;
  for (int i = 0; i < zeros; ++i) x = (x << 1) | uint64_t(next_bit());
  return uint32_t(x - 1);
}

// Quantized coefficients of the visible patches, ordered by (visible patch
// ascending, channel Y/Cb/Cr, coefficient index).
struct LatentTensor {
  size_t patches = 0;
  size_t luma_coeffs = 0;
  size_t chroma_coeffs = 0;
  std::vector<int32_t> values;

  size_t per_patch() const { return luma_coeffs + 2 * chroma_coeffs; }
  size_t channel_coeffs(int channel) const {
    return channel == 0 ? luma_coeffs : chroma_coeffs;
  }
  size_t offset(size_t patch, int channel) const {
    return patch * per_patch() + (channel == 0 ? 0 : luma_coeffs + (channel - 1) * chroma_coeffs);
  }

  bool operator==(const LatentTensor&) const = default;
};

// Adaptive contexts: one 16-ary magnitude model per band group, one binary
// sign model. Exp-Golomb tails are coded as equiprobable bits.
class CoeffContexts {
 public:
  CoeffContexts()
      : buckets_(kBandGroups, entropy::FreqModel(kMaxBucket + 1)),
        sign_(2) {}

  void encode(entropy::RangeEncoder& enc, int32_t q, size_t coeff_index) {
    const CoeffSymbol s = to_symbol(q);
    enc.encode(buckets_[size_t(band_group(coeff_index))], s.bucket);
    if (s.bucket == 0) return;
    enc.encode(sign_, s.negative ? 1 : 0);
    if (s.bucket == kMaxBucket) {
      for (bool bit : exp_golomb_bits(s.tail)) enc.encode_bit(bit);
    }
  }

  int32_t decode(entropy::RangeDecoder& dec, size_t coeff_index) {
    CoeffSymbol s;
    s.bucket = uint8_t(dec.decode(buckets_[size_t(band_group(coeff_index))]));
    if (s.bucket == 0) return 0;
    s.negative = dec.decode(sign_) == 1;
    if (s.bucket == kMaxBucket) {
      s.tail = read_exp_golomb([&] { return dec.decode_bit(); });
    }
    return from_symbol(s);
  }

 private:
  std::vector<entropy::FreqModel> buckets_;
  entropy::FreqModel sign_;
};

inline std::vector<uint8_t> encode_latents(const LatentTensor& t) {
  require(t.values.size() == t.patches * t.per_patch(),
          "latent tensor size does not match its shape");
  CoeffContexts ctx;
  entropy::RangeEncoder enc;
  size_t i = 0;
  for (size_t p = 0; p < t.patches; ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      for (size_t c = 0; c < t.channel_coeffs(ch); ++c) ctx.encode(enc, t.values[i++], c);
    }
  }
  return enc.finish();
}

// The stream must be consumed exactly.
inline LatentTensor decode_latents(std::span<const uint8_t> bytes, size_t patches,
                                   size_t luma_coeffs, size_t chroma_coeffs) {
  LatentTensor t{patches, luma_coeffs, chroma_coeffs, {}};
  t.values.reserve(patches * t.per_patch());
  CoeffContexts ctx;
  entropy::RangeDecoder dec(bytes);
  for (size_t p = 0; p < patches; ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      for (size_t c = 0; c < t.channel_coeffs(ch); ++c) {
        t.values.push_back(ctx.decode(dec, c));
      }
    }
  }
  check_stream(dec.bytes_consumed() == bytes.size(),
               "latent payload has trailing bytes");
  return t;
}

}  // namespace mcm::latent
