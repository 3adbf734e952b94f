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

// Corpus-level evaluation shared by the command-line tool and the acceptance
// suite: strategy ablation and rate sweeps.

#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mcm/codec.hpp"
#include "mcm/metrics.hpp"
#include "mcm/netpbm.hpp"

namespace mcm::eval {

// Runs `work(i)` for i in [0, n) on up to `jobs` threads and hands each result
// to `sink` in index order, on the calling thread, as soon as it and all
// earlier results are ready.
template <typename T>
void ordered_parallel(size_t n, int jobs, const std::function<T(size_t)>& work,
                      const std::function<void(size_t, T&)>& sink) {
  jobs = std::max(1, std::min<int>(jobs, int(std::max<size_t>(n, 1))));
  if (jobs == 1) {
    for (size_t i = 0; i < n; ++i) {
      T r = work(i);
      sink(i, r);
    }
    return;
  }
  std::vector<std::optional<T>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::mutex mu;
  std::condition_variable ready;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= n) return;
        i = next++;
      }
      std::optional<T> r;
      std::exception_ptr err;
      try {
        r.emplace(work(i));
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        results[i] = std::move(r);
        errors[i] = err;
      }
      ready.notify_all();
    }
  };
  std::vector<std::jthread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  std::exception_ptr first_error;
  for (size_t i = 0; i < n; ++i) {
    std::unique_lock lock(mu);
    ready.wait(lock, [&] { return results[i].has_value() || errors[i]; });
    if (errors[i]) {
      first_error = errors[i];
      next = n;  // stop handing out work
      break;
    }
    T r = std::move(*results[i]);
    results[i].reset();
    lock.unlock();
    sink(i, r);
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

struct CorpusItem {
  std::string name;
  ImageRGB image;
  std::optional<SemanticMap> labels;
};

// Every *.ppm in `dir`, sorted by file name. With `sem_dir`, the map
// <sem_dir>/<stem>.pgm is attached when it exists; missing maps are reported
// through `warnings` and the item is kept without labels.
inline std::vector<CorpusItem> load_corpus(const std::filesystem::path& dir,
                                           const std::optional<std::filesystem::path>& sem_dir,
                                           int patch_size,
                                           std::vector<std::string>* warnings = nullptr) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorKind::kIo, "corpus directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusItem> items;
  for (const auto& f : files) {
    CorpusItem item{f.stem().string(), load_ppm(f, patch_size), std::nullopt};
    if (sem_dir) {
      const auto sem_path = *sem_dir / (f.stem().string() + ".pgm");
      if (fs::exists(sem_path)) {
        item.labels = load_pgm(sem_path);
        if (item.labels->width != item.image.width ||
            item.labels->height != item.image.height) {
          if (warnings) warnings->push_back(item.name + ": semantic map size mismatch, ignored");
          item.labels.reset();
        }
      } else if (warnings) {
        warnings->push_back(item.name + ": no semantic map at " + sem_path.string());
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

struct RunResult {
  size_t bytes = 0;
  metrics::RDPoint point;
};

// Encodes one image and, when `measure` is set, decodes it and measures the
// reconstruction.
inline RunResult run_codec(const ImageRGB& img, const SemanticMap* sem,
                           const codec::CodecConfig& cfg, bool measure = true) {
  const auto enc = codec::encode(img, sem, cfg);
  RunResult r;
  r.bytes = enc.bytes.size();
  r.point.bpp = codec::measured_bpp(enc.bytes);
  if (measure) {
    const ImageRGB dec = codec::decode(enc.bytes, cfg.trained);
    r.point.psnr = metrics::psnr(img, dec);
    r.point.ssim = metrics::ssim(img, dec);
    r.point.l1 = metrics::l1(img, dec);
  }
  return r;
}

inline constexpr damask::Strategy kAllStrategies[] = {
    damask::Strategy::kRandom, damask::Strategy::kTexture,
    damask::Strategy::kStructure, damask::Strategy::kDamask};

struct AblationRow {
  std::string image;
  damask::Strategy strategy;
  uint64_t seed;
  RunResult result;
};

struct StrategySummary {
  damask::Strategy strategy;
  size_t runs = 0;
  metrics::RDPoint mean;
};

struct AblationConfig {
  codec::CodecConfig base;  // strategy and seed are overwritten per run
  std::vector<uint64_t> seeds = {0};
  int jobs = 1;
};

// All four strategies over corpus x seeds. Items without labels are skipped.
// Rows arrive at `on_row` in (image, seed, strategy) order.
inline std::vector<StrategySummary> run_ablation(
    const std::vector<CorpusItem>& corpus, const AblationConfig& cfg,
    const std::function<void(const AblationRow&)>& on_row = {}) {
  struct Task {
    size_t item;
    uint64_t seed;
    damask::Strategy strategy;
  };
  std::vector<Task> tasks;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].labels) continue;
    for (uint64_t seed : cfg.seeds) {
      for (auto s : kAllStrategies) tasks.push_back({i, seed, s});
    }
  }
  std::vector<StrategySummary> summary;
  for (auto s : kAllStrategies) summary.push_back({s, 0, {}});
  ordered_parallel<RunResult>(
      tasks.size(), cfg.jobs,
      [&](size_t t) {
        codec::CodecConfig c = cfg.base;
        c.mask.strategy = tasks[t].strategy;
        c.mask.seed = tasks[t].seed;
        const auto& item = corpus[tasks[t].item];
        return run_codec(item.image, &*item.labels, c);
      },
      [&](size_t t, RunResult& r) {
        auto& s = summary[size_t(tasks[t].strategy)];
        ++s.runs;
        s.mean.bpp += r.point.bpp;
        s.mean.psnr += r.point.psnr;
        s.mean.ssim += r.point.ssim;
        s.mean.l1 += r.point.l1;
        if (on_row) on_row({corpus[tasks[t].item].name, tasks[t].strategy, tasks[t].seed, r});
      });
  for (auto& s : summary) {
    if (s.runs == 0) continue;
    const double n = double(s.runs);
    s.mean.bpp /= n;
    s.mean.psnr /= n;
    s.mean.ssim /= n;
    s.mean.l1 /= n;
  }
  return summary;
}

struct SweepConfig {
  codec::CodecConfig base;  // ratio and quality are overwritten per point
  std::vector<damask::MaskingRatio> ratios;
  std::vector<int> qualities;
  bool measure = true;
  int jobs = 1;
};

inline std::string curve_label(damask::Strategy s, damask::MaskingRatio r) {
  return std::string(damask::strategy_name(s)) + "_rho" + std::to_string(r.num) + "of" +
         std::to_string(r.den);
}

// One curve per masking ratio; each point averages the corpus at one quality.
// Points are ordered by quality as given. Items without labels fall back to
// all-ones structure scores.
inline std::vector<metrics::RDCurve> run_rd_sweep(const std::vector<CorpusItem>& corpus,
                                                  const SweepConfig& cfg) {
  require(!cfg.ratios.empty(), "rate sweep needs at least one masking ratio");
  require(!cfg.qualities.empty(), "rate sweep needs at least one quality preset");
  require(!corpus.empty(), "rate sweep corpus is empty");
  const size_t per_curve = cfg.qualities.size() * corpus.size();
  std::vector<metrics::RDCurve> curves;
  for (auto r : cfg.ratios) {
    metrics::RDCurve c{curve_label(cfg.base.mask.strategy, r),
                       std::vector<metrics::RDPoint>(cfg.qualities.size())};
    curves.push_back(std::move(c));
  }
  ordered_parallel<RunResult>(
      cfg.ratios.size() * per_curve, cfg.jobs,
      [&](size_t t) {
        const size_t ri = t / per_curve;
        const size_t qi = (t % per_curve) / corpus.size();
        const auto& item = corpus[t % corpus.size()];
        codec::CodecConfig c = cfg.base;
        c.mask.ratio = cfg.ratios[ri];
        c.quant = latent::QuantSpec::from_quality(cfg.qualities[qi]);
        return run_codec(item.image, item.labels ? &*item.labels : nullptr, c, cfg.measure);
      },
      [&](size_t t, RunResult& r) {
        auto& p = curves[t / per_curve].points[(t % per_curve) / corpus.size()];
        const double n = double(corpus.size());
        p.bpp += r.point.bpp / n;
        p.psnr += r.point.psnr / n;
        p.ssim += r.point.ssim / n;
        p.l1 += r.point.l1 / n;
      });
  return curves;
}

}  // namespace mcm::eval
