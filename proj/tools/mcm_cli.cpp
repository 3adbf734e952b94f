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

// mcm: command-line front end for the masked-patch image codec.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcm/basis_io.hpp"
#include "mcm/codec.hpp"
#include "mcm/evaluate.hpp"
#include "mcm/metrics.hpp"
#include "mcm/netpbm.hpp"
#include "mcm/synth.hpp"

namespace fs = std::filesystem;
using namespace mcm;

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string ratio_text(damask::MaskingRatio r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den) + " = " +
         fmt("%.4f", r.value());
}

// Writes through a temporary so a failed command never leaves a partial file.
void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorKind::kIo, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Flags shared by every command that encodes.
struct CodecFlags {
  std::string strategy = "damask";
  double rho = 0.75;
  uint64_t seed = 0;
  std::string mode = "stochastic";
  std::optional<int> quality;
  std::optional<double> step;
  double temperature = damask::kDefaultTemperature;
  std::string basis = "dct";
  std::string basis_file;
  std::vector<int> foreground;
  int patch_size = kDefaultPatchSize;
  bool allow_no_sem = false;

  // Flag groups; each subcommand registers only the ones it reads.
  struct Groups {
    bool strategy = true;  // --strategy, --allow-no-sem
    bool rho = true;       // --rho
    bool sampling = true;  // --mode
    bool coding = true;    // --basis, --basis-file
    bool quality = true;   // --quality, --step
  };

  void add(CLI::App* app, Groups g) {
    if (g.strategy) {
      app->add_option("--strategy", strategy, "random | texture | structure | damask")
          ->capture_default_str()
          ->check(CLI::IsMember({"random", "texture", "structure", "damask"}));
      app->add_flag("--allow-no-sem", allow_no_sem,
                    "let structure/damask run without a semantic map (all-ones structure)");
    }
    if (g.rho) {
      app->add_option("--rho", rho, "masking ratio, rounded to the nearest n/255")
          ->capture_default_str();
    }
    if (g.sampling) {
      app->add_option("--mode", mode, "stochastic | deterministic")
          ->capture_default_str()
          ->check(CLI::IsMember({"stochastic", "deterministic"}));
    }
    app->add_option("--temperature", temperature, "softmax temperature (Q8.8 in the header)")
        ->capture_default_str();
    app->add_option("--foreground", foreground,
                    "labels counted as foreground (default: every nonzero label)")
        ->delimiter(',')
        ->check(CLI::Range(0, 255));
    app->add_option("--patch-size", patch_size, "patch side N")->capture_default_str();
    if (g.coding) {
      app->add_option("--basis", basis, "dct | pca")
          ->capture_default_str()
          ->check(CLI::IsMember({"dct", "pca"}));
      app->add_option("--basis-file", basis_file, "trained MCMB basis (required for --basis pca)");
    }
    if (g.quality) {
      auto* q = app->add_option("--quality", quality, "quality preset 1..10 (default 5)")
                    ->check(CLI::Range(latent::kMinQuality, latent::kMaxQuality));
      auto* s = app->add_option("--step", step, "explicit quantizer step");
      q->excludes(s);
    }
  }

  codec::CodecConfig config() const {
    codec::CodecConfig cfg;
    cfg.mask.strategy = *damask::parse_strategy(strategy);
    cfg.mask.mode = mode == "deterministic" ? damask::SampleMode::kDeterministic
                                            : damask::SampleMode::kStochastic;
    cfg.mask.ratio = damask::MaskingRatio::nearest(rho);
    cfg.mask.seed = seed;
    cfg.mask.temperature = temperature;
    if (!foreground.empty()) {
      cfg.mask.foreground = std::set<uint8_t>(foreground.begin(), foreground.end());
    }
    cfg.patch_size = patch_size;
    if (step) {
      cfg.quant = latent::QuantSpec::from_step(*step);
    } else {
      cfg.quant = latent::QuantSpec::from_quality(quality.value_or(5));
    }
    cfg.basis = basis == "pca" ? latent::BasisKind::kPca : latent::BasisKind::kDct;
    return cfg;
  }

  bool needs_sem() const { return strategy == "structure" || strategy == "damask"; }
};

std::optional<latent::TransformBasis> load_optional_basis(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return latent::load_basis(path);
}

void print_ratio_echo(const CodecFlags& f) {
  std::cerr << "rho " << fmt("%g", f.rho) << " -> "
            << ratio_text(damask::MaskingRatio::nearest(f.rho)) << "\n";
}

int cmd_encode(const std::string& in, const std::string& sem_path, const std::string& out,
               const CodecFlags& f) {
  if (f.needs_sem() && sem_path.empty() && !f.allow_no_sem) {
    fail(ErrorKind::kValidation, "strategy '" + f.strategy +
                                     "' needs --sem; pass --allow-no-sem to fall back to "
                                     "all-ones structure scores");
  }
  codec::CodecConfig cfg = f.config();
  const auto trained = load_optional_basis(f.basis_file);
  cfg.trained = trained ? &*trained : nullptr;
  const ImageRGB img = load_ppm(in, cfg.patch_size);
  std::optional<SemanticMap> sem;
  if (!sem_path.empty()) sem = load_pgm(sem_path);
  const auto enc = codec::encode(img, sem ? &*sem : nullptr, cfg);
  write_file(out, enc.bytes);
  const PatchGrid grid(img.width, img.height, cfg.patch_size);
  std::cout << out << ": " << enc.bytes.size() << " bytes, "
            << fmt("%.4f", codec::measured_bpp(enc.bytes)) << " bpp (rho "
            << ratio_text(cfg.mask.ratio) << ", " << enc.header.k_visible << "/"
            << grid.count() << " patches visible)\n";
  return 0;
}

int cmd_decode(const std::string& in, const std::string& out, const std::string& ref,
               const std::string& basis_file) {
  const auto trained = load_optional_basis(basis_file);
  const auto bytes = read_file(in);
  const ImageRGB img = codec::decode(bytes, trained ? &*trained : nullptr);
  save_ppm(img, out);
  std::cout << out << ": " << img.width << "x" << img.height << "\n";
  if (!ref.empty()) {
    const ImageRGB original = load_ppm(ref);
    const double p = metrics::psnr(original, img);
    std::cout << "psnr " << (std::isinf(p) ? std::string("inf") : fmt("%.4f", p)) << "\n"
              << "ssim " << fmt("%.6f", metrics::ssim(original, img)) << "\n"
              << "l1 " << fmt("%.6f", metrics::l1(original, img)) << "\n";
  }
  return 0;
}

int cmd_scores(const std::string& in, const std::string& sem_path, const std::string& out,
               const CodecFlags& f) {
  if (f.needs_sem() && sem_path.empty() && !f.allow_no_sem) {
    fail(ErrorKind::kValidation, "strategy '" + f.strategy +
                                     "' needs --sem; pass --allow-no-sem to fall back to "
                                     "all-ones structure scores");
  }
  const codec::CodecConfig cfg = f.config();
  const ImageRGB img = load_ppm(in, cfg.patch_size);
  std::optional<SemanticMap> sem;
  if (!sem_path.empty()) sem = load_pgm(sem_path);
  const PatchGrid grid(img.width, img.height, cfg.patch_size);
  const auto scores = damask::compute_scores(img, sem ? &*sem : nullptr, grid,
                                             cfg.mask.strategy, cfg.mask.foreground);
  // Same distribution the encoder samples from.
  const auto dist =
      damask::categorical(scores.info, codec::temperature_q88(cfg.mask.temperature) / 256.0);
  std::ostringstream csv;
  csv << "index,row,col,score_t,score_s,inf,alpha\n";
  for (size_t l = 0; l < grid.count(); ++l) {
    csv << l << "," << grid.row_of(l) << "," << grid.col_of(l) << ","
        << fmt("%.17g", scores.texture[l]) << "," << fmt("%.17g", scores.structure[l]) << ","
        << fmt("%.17g", scores.info[l]) << "," << fmt("%.17g", dist.alpha[l]) << "\n";
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_atomically(out, csv.str());
  }
  return 0;
}

std::vector<eval::CorpusItem> corpus_or_fail(const std::string& dir, const std::string& sem_dir,
                                             int patch_size) {
  std::vector<std::string> warnings;
  auto items = eval::load_corpus(
      dir, sem_dir.empty() ? std::nullopt : std::optional<fs::path>(sem_dir), patch_size,
      &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  require(!items.empty(), "no .ppm images in " + dir);
  return items;
}

int cmd_ablate(const std::string& corpus_dir, const std::string& sem_dir,
               const std::vector<uint64_t>& seeds, const std::string& out,
               const std::string& summary_out, int jobs, const CodecFlags& f) {
  const auto corpus = corpus_or_fail(corpus_dir, sem_dir, f.patch_size);
  size_t paired = 0;
  for (const auto& item : corpus) paired += item.labels ? 1 : 0;
  require(paired > 0, "no image in " + corpus_dir + " has a semantic map in " + sem_dir);
  eval::AblationConfig cfg;
  cfg.base = f.config();
  cfg.seeds = seeds;
  cfg.jobs = jobs;

  std::optional<std::ofstream> rows;
  const fs::path rows_tmp = out + ".tmp";
  if (!out.empty()) {
    rows.emplace(rows_tmp);
    if (!*rows) fail(ErrorKind::kIo, "cannot write " + rows_tmp.string());
    *rows << "image,strategy,seed,bytes,bpp,psnr,ssim,l1\n" << std::flush;
  }
  const auto summary = eval::run_ablation(corpus, cfg, [&](const eval::AblationRow& r) {
    if (!rows) return;
    const double p = r.result.point.psnr;
    *rows << r.image << "," << damask::strategy_name(r.strategy) << "," << r.seed << ","
          << r.result.bytes << "," << metrics::format_number(r.result.point.bpp, 6) << ","
          << (std::isinf(p) ? std::string("inf") : metrics::format_number(p, 4)) << ","
          << metrics::format_number(r.result.point.ssim, 6) << ","
          << metrics::format_number(r.result.point.l1, 4) << "\n"
          << std::flush;
  });
  if (rows) {
    rows->close();
    fs::rename(rows_tmp, out);
  }

  std::ostringstream csv;
  csv << "strategy,runs,mean_bpp,mean_psnr,mean_ssim,mean_l1\n";
  for (const auto& s : summary) {
    csv << damask::strategy_name(s.strategy) << "," << s.runs << ","
        << metrics::format_number(s.mean.bpp, 6) << ","
        << metrics::format_number(std::min(s.mean.psnr, metrics::kPsnrCap), 4) << ","
        << metrics::format_number(s.mean.ssim, 6) << ","
        << metrics::format_number(s.mean.l1, 4) << "\n";
  }
  if (!summary_out.empty()) write_atomically(summary_out, csv.str());

  std::cout << "rho " << ratio_text(cfg.base.mask.ratio) << ", " << paired << " images x "
            << seeds.size() << " seeds\n";
  std::printf("%-10s %6s %10s %10s %10s %10s\n", "strategy", "runs", "bpp", "psnr", "ssim",
              "l1");
  for (const auto& s : summary) {
    std::printf("%-10s %6zu %10.4f %10.2f %10.4f %10.3f\n", damask::strategy_name(s.strategy),
                s.runs, s.mean.bpp, std::min(s.mean.psnr, metrics::kPsnrCap), s.mean.ssim,
                s.mean.l1);
  }
  return 0;
}

int cmd_rd_sweep(const std::string& corpus_dir, const std::string& sem_dir,
                 const std::vector<double>& rhos, const std::vector<int>& qualities,
                 const std::string& out_dir, int jobs, const CodecFlags& f) {
  if (f.needs_sem() && sem_dir.empty() && !f.allow_no_sem) {
    fail(ErrorKind::kValidation, "strategy '" + f.strategy +
                                     "' needs --sem-dir; pass --allow-no-sem to fall back "
                                     "to all-ones structure scores");
  }
  const auto corpus = corpus_or_fail(corpus_dir, sem_dir, f.patch_size);
  eval::SweepConfig cfg;
  cfg.base = f.config();
  for (double r : rhos) cfg.ratios.push_back(damask::MaskingRatio::nearest(r));
  cfg.qualities = qualities;
  cfg.jobs = jobs;
  const auto curves = eval::run_rd_sweep(corpus, cfg);
  fs::create_directories(out_dir);
  for (const auto& c : curves) {
    std::ostringstream csv;
    metrics::write_rd_csv(csv, {c});
    const fs::path path = fs::path(out_dir) / (c.label + ".csv");
    write_atomically(path, csv.str());
    std::cout << path.string() << "\n";
    for (size_t i = 0; i < c.points.size(); ++i) {
      const auto& p = c.points[i];
      std::printf("  q%-2d bpp %.4f psnr %.2f ssim %.4f\n", qualities[i], p.bpp,
                  std::min(p.psnr, metrics::kPsnrCap), p.ssim);
    }
  }
  return 0;
}

int cmd_train_basis(const std::string& corpus_dir, int patch_size, size_t components,
                    const std::string& out) {
  const auto corpus = corpus_or_fail(corpus_dir, "", patch_size);
  std::vector<Patch> patches;
  for (const auto& item : corpus) {
    const PatchGrid grid(item.image.width, item.image.height, patch_size);
    GrayPlane y = ycbcr_forward(item.image).y;
    for (double& v : y.data) v -= codec::kLevelShift;
    auto p = patchify(y, grid);
    patches.insert(patches.end(), std::make_move_iterator(p.begin()),
                   std::make_move_iterator(p.end()));
  }
  const auto result = latent::train_pca_basis(patches, components);
  latent::save_basis(result.basis, out);
  std::cout << out << ": " << result.basis.count << " components of dimension "
            << result.basis.dim << " from " << patches.size() << " patches\n";
  double cumulative = 0.0;
  for (size_t i = 0; i < result.eigenvalues.size(); ++i) {
    cumulative += result.eigenvalues[i];
    if (i < 8 || i + 1 == result.eigenvalues.size()) {
      std::printf("  component %3zu  eigenvalue %12.4f  cumulative %7.3f%%\n", i,
                  result.eigenvalues[i], 100.0 * cumulative / result.total_variance);
    }
  }
  if (result.rank_deficient) {
    std::cerr << "warning: corpus variance has rank " << result.basis.count << " < "
              << components << " requested components\n";
  }
  return 0;
}

int cmd_bdrate(const std::string& anchor_path, const std::string& test_path,
               const std::string& metric) {
  const auto anchor = metrics::read_rd_csv(anchor_path);
  const auto test = metrics::read_rd_csv(test_path);
  require(anchor.size() == 1 && test.size() == 1, "each CSV must hold exactly one curve");
  const auto m = metric == "ssim" ? metrics::Metric::kSsim : metrics::Metric::kPsnr;
  const auto r = metrics::bd_rate_detailed(anchor[0], test[0], m);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "BD-rate (" << metric << "): " << fmt("%+.2f", r.percent) << "%\n";
  return 0;
}

int cmd_synth(const std::string& kind, int count, uint64_t first_seed, int size,
              const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (kind == "scene") fs::create_directories(fs::path(out_dir) / "sem");
  for (int i = 0; i < count; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "%s_%03d", kind.c_str(), i);
    const uint64_t seed = first_seed + uint64_t(i);
    if (kind == "natural") {
      save_ppm(synth::natural_image(seed, size, size),
               fs::path(out_dir) / (std::string(stem) + ".ppm"));
    } else {
      const auto scene = synth::structured_scene(seed, size, size);
      save_ppm(scene.image, fs::path(out_dir) / (std::string(stem) + ".ppm"));
      save_pgm(scene.labels, fs::path(out_dir) / "sem" / (std::string(stem) + ".pgm"));
    }
  }
  std::cout << "wrote " << count << " " << kind << (count == 1 ? " image" : " images") << " to "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked-patch image codec for extremely low bitrates"};
  app.require_subcommand(1);
  int jobs = 1;
  std::function<int()> run;

  auto* encode = app.add_subcommand("encode", "compress a PPM image");
  std::string enc_in, enc_sem, enc_out;
  CodecFlags enc_flags;
  encode->add_option("input", enc_in, "input PPM")->required();
  encode->add_option("--sem", enc_sem, "semantic label map (PGM)");
  encode->add_option("-o,--output", enc_out, "output .mcm file")->required();
  encode->add_option("--seed", enc_flags.seed, "sampling seed")->capture_default_str();
  enc_flags.add(encode, {});
  encode->callback([&] {
    print_ratio_echo(enc_flags);
    run = [&] { return cmd_encode(enc_in, enc_sem, enc_out, enc_flags); };
  });

  auto* decode = app.add_subcommand("decode", "reconstruct a PPM image");
  std::string dec_in, dec_out, dec_ref, dec_basis;
  decode->add_option("input", dec_in, "input .mcm file")->required();
  decode->add_option("-o,--output", dec_out, "output PPM")->required();
  decode->add_option("--ref", dec_ref, "original image; prints psnr, ssim and l1");
  decode->add_option("--basis-file", dec_basis, "trained basis for PCA streams");
  decode->callback([&] { run = [&] { return cmd_decode(dec_in, dec_out, dec_ref, dec_basis); }; });

  auto* scores = app.add_subcommand("scores", "per-patch scores and sampling distribution");
  std::string sc_in, sc_sem, sc_out;
  CodecFlags sc_flags;
  scores->add_option("input", sc_in, "input PPM")->required();
  scores->add_option("--sem", sc_sem, "semantic label map (PGM)");
  scores->add_option("-o,--output", sc_out, "CSV path (default: stdout)");
  sc_flags.add(scores, {.rho = false, .sampling = false, .coding = false, .quality = false});
  scores->callback([&] { run = [&] { return cmd_scores(sc_in, sc_sem, sc_out, sc_flags); }; });

  auto* ablate = app.add_subcommand("ablate", "compare the four masking strategies");
  std::string ab_corpus, ab_sem, ab_out, ab_summary;
  std::vector<uint64_t> ab_seeds = {0};
  CodecFlags ab_flags;
  ablate->add_option("--corpus", ab_corpus, "directory of PPM images")->required();
  ablate->add_option("--sem-dir", ab_sem, "directory of <stem>.pgm label maps")->required();
  ablate->add_option("--seeds", ab_seeds, "sampling seeds")->delimiter(',')->capture_default_str();
  ablate->add_option("-o,--output", ab_out, "per-run CSV");
  ablate->add_option("--summary", ab_summary, "per-strategy summary CSV");
  ablate->add_option("--jobs", jobs, "worker threads")->envname("MCM_JOBS")->capture_default_str();
  ab_flags.add(ablate, {.strategy = false});
  ablate->callback([&] {
    print_ratio_echo(ab_flags);
    run = [&] { return cmd_ablate(ab_corpus, ab_sem, ab_seeds, ab_out, ab_summary, jobs, ab_flags); };
  });

  auto* sweep = app.add_subcommand("rd-sweep", "rate-distortion curves over quality presets");
  std::string rd_corpus, rd_sem, rd_out;
  std::vector<double> rd_rhos = {0.43, 0.75};
  std::vector<int> rd_qualities = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CodecFlags rd_flags;
  sweep->add_option("--corpus", rd_corpus, "directory of PPM images")->required();
  sweep->add_option("--sem-dir", rd_sem, "directory of <stem>.pgm label maps");
  sweep->add_option("--rhos", rd_rhos, "masking ratios")->delimiter(',')->capture_default_str();
  sweep->add_option("--qualities", rd_qualities, "quality presets")
      ->delimiter(',')
      ->check(CLI::Range(latent::kMinQuality, latent::kMaxQuality))
      ->capture_default_str();
  sweep->add_option("--out-dir", rd_out, "directory for one CSV per curve")->required();
  sweep->add_option("--seed", rd_flags.seed, "sampling seed")->capture_default_str();
  sweep->add_option("--jobs", jobs, "worker threads")->envname("MCM_JOBS")->capture_default_str();
  rd_flags.add(sweep, {.rho = false, .quality = false});
  sweep->callback([&] {
    run = [&] {
      if (rd_qualities.empty()) throw CLI::ValidationError("--qualities", "quality list is empty");
      if (rd_rhos.empty()) throw CLI::ValidationError("--rhos", "masking ratio list is empty");
      return cmd_rd_sweep(rd_corpus, rd_sem, rd_rhos, rd_qualities, rd_out, jobs, rd_flags);
    };
  });

  auto* train = app.add_subcommand("train-basis", "train a PCA patch basis");
  std::string tb_corpus, tb_out;
  int tb_patch = kDefaultPatchSize;
  size_t tb_components = 64;
  train->add_option("--corpus", tb_corpus, "directory of PPM images")->required();
  train->add_option("--patch-size", tb_patch, "patch side N")->capture_default_str();
  train->add_option("--components", tb_components, "basis size M")->capture_default_str();
  train->add_option("-o,--output", tb_out, "output MCMB file")->required();
  train->callback([&] { run = [&] { return cmd_train_basis(tb_corpus, tb_patch, tb_components, tb_out); }; });

  auto* bdrate = app.add_subcommand("bdrate", "Bjontegaard delta rate between two curves");
  std::string bd_anchor, bd_test, bd_metric = "psnr";
  bdrate->add_option("anchor", bd_anchor, "anchor curve CSV")->required();
  bdrate->add_option("test", bd_test, "test curve CSV")->required();
  bdrate->add_option("--metric", bd_metric, "psnr | ssim")
      ->capture_default_str()
      ->check(CLI::IsMember({"psnr", "ssim"}));
  bdrate->callback([&] { run = [&] { return cmd_bdrate(bd_anchor, bd_test, bd_metric); }; });

  auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  std::string sy_kind = "natural", sy_out;
  int sy_count = 20, sy_size = 256;
  uint64_t sy_seed = 0;
  synth_cmd->add_option("--kind", sy_kind, "natural | scene (scene also writes sem/*.pgm)")
      ->capture_default_str()
      ->check(CLI::IsMember({"natural", "scene"}));
  synth_cmd->add_option("--count", sy_count, "number of images")->capture_default_str();
  synth_cmd->add_option("--first-seed", sy_seed, "seed of the first image")->capture_default_str();
  synth_cmd->add_option("--size", sy_size, "image side in pixels")->capture_default_str();
  synth_cmd->add_option("--out-dir", sy_out, "output directory")->required();
  synth_cmd->callback([&] { run = [&] { return cmd_synth(sy_kind, sy_count, sy_seed, sy_size, sy_out); }; });

  try {
    app.parse(argc, argv);
    return run();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
