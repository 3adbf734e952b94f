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

// Distortion metrics and Bjontegaard rate differences.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcm/error.hpp"
#include "mcm/image.hpp"

namespace mcm::metrics {

inline constexpr double kPsnrCap = 99.0;

inline void require_same_dims(const ImageRGB& a, const ImageRGB& b) {
  require(a.width == b.width && a.height == b.height,
          "image dimensions differ: " + std::to_string(a.width) + "x" +
              std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
              std::to_string(b.height));
}

inline double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Over all three channels. Identical images give +infinity.
inline double psnr(const ImageRGB& a, const ImageRGB& b) {
  require_same_dims(a, b);
  double sse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    sse += d * d;
  }
  return psnr_from_mse(sse / double(a.data.size()));
}

// PSNR restricted to pixels where `include` is nonzero.
inline double psnr_masked(const ImageRGB& a, const ImageRGB& b,
                          const std::vector<uint8_t>& include) {
  require_same_dims(a, b);
  require(include.size() == a.pixel_count(), "pixel mask size mismatch");
  double sse = 0.0;
  size_t n = 0;
  for (size_t p = 0; p < a.pixel_count(); ++p) {
    if (!include[p]) continue;
    for (int c = 0; c < 3; ++c) {
      const double d = double(a.data[p * 3 + c]) - double(b.data[p * 3 + c]);
      sse += d * d;
    }
    n += 3;
  }
  require(n > 0, "pixel mask selects nothing");
  return psnr_from_mse(sse / double(n));
}

inline double l1(const ImageRGB& a, const ImageRGB& b) {
  require_same_dims(a, b);
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    sum += std::abs(double(a.data[i]) - double(b.data[i]));
  }
  return sum / double(a.data.size());
}

namespace ssim_detail {

inline constexpr int kWindow = 11;
inline constexpr double kSigma = 1.5;

inline std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[size_t(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += taps[size_t(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" Gaussian filtering: output is (w-10) x (h-10).
inline std::vector<double> filter_valid(const std::vector<double>& src, int w, int h) {
  static const auto taps = gaussian_taps();
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> tmp(size_t(ow) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[size_t(k)] * src[size_t(y) * w + x + k];
      tmp[size_t(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(size_t(ow) * oh, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[size_t(k)] * tmp[size_t(y + k) * ow + x];
      out[size_t(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace ssim_detail

// Mean SSIM over all 11x11 Gaussian windows (sigma 1.5) that fit inside the
// plane; K1 = 0.01, K2 = 0.03, dynamic range 255.
inline double ssim(const GrayPlane& a, const GrayPlane& b) {
  using namespace ssim_detail;
  require(a.width == b.width && a.height == b.height, "plane dimensions differ");
  require(a.width >= kWindow && a.height >= kWindow,
          "SSIM needs planes of at least 11x11");
  const int w = a.width, h = a.height;
  std::vector<double> aa(a.data.size()), bb(a.data.size()), ab(a.data.size());
  for (size_t i = 0; i < a.data.size(); ++i) {
    aa[i] = a.data[i] * a.data[i];
    bb[i] = b.data[i] * b.data[i];
    ab[i] = a.data[i] * b.data[i];
  }
  const auto mu_a = filter_valid(a.data, w, h);
  const auto mu_b = filter_valid(b.data, w, h);
  const auto e_aa = filter_valid(aa, w, h);
  const auto e_bb = filter_valid(bb, w, h);
  const auto e_ab = filter_valid(ab, w, h);
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  double total = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / double(mu_a.size());
}

// SSIM of color images is evaluated on luma.
inline double ssim(const ImageRGB& a, const ImageRGB& b) {
  require_same_dims(a, b);
  return ssim(rgb_to_gray(a), rgb_to_gray(b));
}

// ---------------------------------------------------------------------------
// Rate-distortion curves

struct RDPoint {
  double bpp = 0.0;
  double psnr = 0.0;  // may be +infinity
  double ssim = 0.0;
  double l1 = 0.0;

  bool operator==(const RDPoint&) const = default;
};

struct RDCurve {
  std::string label;
  std::vector<RDPoint> points;
};

enum class Metric { kPsnr, kSsim };

inline std::string format_number(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline const char* kRdCsvHeader = "label,bpp,psnr,ssim,l1";

inline void write_rd_row(std::ostream& out, const std::string& label, const RDPoint& p) {
  out << label << ',' << format_number(p.bpp, 6) << ',' << format_number(p.psnr, 4)
      << ',' << format_number(p.ssim, 6) << ',' << format_number(p.l1, 4) << '\n';
}

inline void write_rd_csv(std::ostream& out, const std::vector<RDCurve>& curves) {
  out << kRdCsvHeader << '\n';
  for (const auto& c : curves) {
    for (const auto& p : c.points) write_rd_row(out, c.label, p);
  }
}

inline double parse_number(const std::string& field) {
  if (field == "inf") return std::numeric_limits<double>::infinity();
  try {
    size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kFormat, "bad number '" + field + "' in RD csv");
}

// Curves in file order of first appearance of each label.
inline std::vector<RDCurve> read_rd_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("label,bpp,psnr,ssim,l1", 0) != 0) {
    fail(ErrorKind::kFormat, "RD csv must start with header 'label,bpp,psnr,ssim,l1'");
  }
  std::vector<RDCurve> curves;
  std::map<std::string, size_t> index;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5) fail(ErrorKind::kFormat, "RD csv row needs 5 fields: " + line);
    auto [it, inserted] = index.try_emplace(fields[0], curves.size());
    if (inserted) curves.push_back({fields[0], {}});
    curves[it->second].points.push_back({parse_number(fields[1]), parse_number(fields[2]),
                                         parse_number(fields[3]), parse_number(fields[4])});
  }
  return curves;
}

inline std::vector<RDCurve> read_rd_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  return read_rd_csv(in);
}

namespace bd_detail {

// Least-squares cubic in the normalized variable t = (x - center) / scale.
struct Cubic {
  std::array<double, 4> coef{};  // ascending powers of t
  double center = 0.0;
  double scale = 1.0;

  // Integral over x in [lo, hi].
  double integrate(double lo, double hi) const {
    auto anti = [&](double x) {
      const double t = (x - center) / scale;
      double acc = 0.0;
      for (int k = 3; k >= 0; --k) acc = acc * t + coef[size_t(k)] / (k + 1);
      return acc * t;
    };
    return scale * (anti(hi) - anti(lo));
  }
};

inline Cubic fit_cubic(const std::vector<double>& x, const std::vector<double>& y) {
  Cubic c;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  c.center = 0.5 * (*mn + *mx);
  c.scale = std::max(0.5 * (*mx - *mn), 1e-12);
  std::array<std::array<double, 5>, 4> m{};  // augmented normal equations
  for (size_t i = 0; i < x.size(); ++i) {
    const double t = (x[i] - c.center) / c.scale;
    std::array<double, 4> pw{1.0, t, t * t, t * t * t};
    for (int r = 0; r < 4; ++r) {
      for (int k = 0; k < 4; ++k) m[size_t(r)][size_t(k)] += pw[size_t(r)] * pw[size_t(k)];
      m[size_t(r)][4] += pw[size_t(r)] * y[i];
    }
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(m[size_t(r)][size_t(col)]) > std::abs(m[size_t(pivot)][size_t(col)])) pivot = r;
    }
    std::swap(m[size_t(col)], m[size_t(pivot)]);
    require(std::abs(m[size_t(col)][size_t(col)]) > 1e-14,
            "RD curve distortions are degenerate; cannot fit a cubic");
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = m[size_t(r)][size_t(col)] / m[size_t(col)][size_t(col)];
      for (int k = col; k < 5; ++k) m[size_t(r)][size_t(k)] -= f * m[size_t(col)][size_t(k)];
    }
  }
  for (int r = 0; r < 4; ++r) c.coef[size_t(r)] = m[size_t(r)][4] / m[size_t(r)][size_t(r)];
  return c;
}

inline double distortion(const RDPoint& p, Metric metric) {
  return metric == Metric::kPsnr ? p.psnr : p.ssim;
}

}  // namespace bd_detail

struct BdRateResult {
  double percent = 0.0;
  std::vector<std::string> warnings;
};

// Average rate difference of `test` against `anchor` at equal distortion:
// log10(bpp) is fitted as a cubic in the distortion for each curve and both
// fits are integrated over the shared distortion interval. Negative values
// mean the test curve needs less rate.
inline BdRateResult bd_rate_detailed(const RDCurve& anchor, const RDCurve& test,
                                     Metric metric) {
  BdRateResult result;
  struct Fit {
    bd_detail::Cubic cubic;
    double lo, hi;
  };
  auto prepare = [&](const RDCurve& curve) {
    require(curve.points.size() >= 4,
            "curve '" + curve.label + "' needs at least 4 points for BD-rate");
    auto pts = curve.points;
    std::sort(pts.begin(), pts.end(),
              [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
    std::vector<double> d, r;
    for (size_t i = 0; i < pts.size(); ++i) {
      require(pts[i].bpp > 0.0, "curve '" + curve.label + "' has a non-positive rate");
      require(i == 0 || pts[i].bpp > pts[i - 1].bpp,
              "curve '" + curve.label + "' rates are not strictly increasing");
      const double dist = bd_detail::distortion(pts[i], metric);
      require(std::isfinite(dist), "curve '" + curve.label + "' has a non-finite distortion");
      if (i > 0 && dist < d.back()) {
        result.warnings.push_back("curve '" + curve.label +
                                  "' distortion is not monotone in rate");
      }
      d.push_back(dist);
      r.push_back(std::log10(pts[i].bpp));
    }
    const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
    return Fit{bd_detail::fit_cubic(d, r), *mn, *mx};
  };
  const Fit a = prepare(anchor);
  const Fit t = prepare(test);
  const double lo = std::max(a.lo, t.lo);
  const double hi = std::min(a.hi, t.hi);
  if (!(hi > lo)) fail(ErrorKind::kValidation, "no overlap between the curves' distortion ranges");
  const double avg_diff =
      (t.cubic.integrate(lo, hi) - a.cubic.integrate(lo, hi)) / (hi - lo);
  result.percent = (std::pow(10.0, avg_diff) - 1.0) * 100.0;
  return result;
}

inline double bd_rate(const RDCurve& anchor, const RDCurve& test, Metric metric) {
  return bd_rate_detailed(anchor, test, metric).percent;
}

}  // namespace mcm::metrics
