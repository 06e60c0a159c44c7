// Acceptance suite: one PASS/FAIL/SKIP line per criterion, non-zero exit on
// any FAIL. Criterion 9 needs real images; set CTFDCT_FIG6_DIR to a folder
// holding ffhq/, stylegan/ and stylegan2/ image directories to run it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ctfdct/attacks.hpp"
#include "ctfdct/beta.hpp"
#include "ctfdct/dct.hpp"
#include "ctfdct/error.hpp"
#include "ctfdct/gsf.hpp"
#include "ctfdct/parallel.hpp"
#include "ctfdct/pipeline.hpp"
#include "ctfdct/rng.hpp"
#include "ctfdct/synth.hpp"

namespace fs = std::filesystem;
using namespace ctfdct;

namespace {

constexpr std::uint64_t kSeed = 20210601;

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict = Verdict::Fail;
  std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return default_jobs(); }

std::vector<FeatureRecord> features_of(const std::vector<LuminanceImage>& images, const std::string& label,
                                       const std::string& prefix) {
  std::vector<FeatureRecord> out(images.size());
  parallel_for(images.size(), jobs(), [&](std::size_t i) {
    out[i].features = image_betas(images[i], fmt("%s/%05zu", prefix.c_str(), i));
    out[i].label = label;
  });
  return out;
}

BetaMatrix matrix_of(const std::vector<LuminanceImage>& images, const std::string& label) {
  std::vector<BetaVector> rows(images.size());
  parallel_for(images.size(), jobs(), [&](std::size_t i) { rows[i] = image_betas(images[i]); });
  return build_matrix(rows, label);
}

// 1. Forward/inverse DCT round trip and energy preservation.
Outcome dct_round_trip() {
  Rng rng(kSeed);
  double max_err = 0.0, max_parseval = 0.0;
  for (int b = 0; b < 10000; ++b) {
    std::array<double, kCoefficients> px{};
    for (auto& v : px) v = rng.uniform(0.0, 255.0);
    const auto f = forward_dct(std::span<const double, kCoefficients>(px));
    const auto back = inverse_dct(f);
    double e_px = 0.0, e_f = 0.0;
    for (int i = 0; i < kCoefficients; ++i) {
      max_err = std::max(max_err, std::abs(back[i] - px[i]));
      e_px += px[i] * px[i];
      e_f += f.coeffs[i] * f.coeffs[i];
    }
    max_parseval = std::max(max_parseval, std::abs(e_f - e_px) / e_px);
  }
  return check(max_err <= 1e-9 && max_parseval <= 1e-6,
               fmt("max round-trip error %.3g (<= 1e-9), max Parseval deviation %.3g (<= 1e-6)", max_err,
                   max_parseval));
}

// 2. Recovering the Laplacian scale from synthetic coefficient streams.
Outcome beta_recovery() {
  double worst = 0.0;
  std::string per;
  for (double beta : {0.5, 2.0, 10.0}) {
    Rng rng(derive_seed(kSeed, static_cast<std::uint64_t>(beta * 10)));
    std::vector<CoefficientBlock> blocks(100000);
    for (auto& blk : blocks) {
      blk.coeffs[0] = rng.uniform(0.0, 2040.0);
      for (int c = 1; c < kCoefficients; ++c) blk.coeffs[c] = rng.laplace(beta);
    }
    const auto v = beta_vector(blocks);
    double local = 0.0;
    for (int c = 1; c < kCoefficients; ++c) local = std::max(local, std::abs(v.beta(c) - beta) / beta);
    worst = std::max(worst, local);
    per += fmt(" beta=%g: %.2f%%", beta, 100.0 * local);
  }
  return check(worst <= 0.02, "worst relative error over 63 coefficients," + per + " (<= 2%)");
}

// 3. Every coefficient injected into a synthetic corpus is found as the GSF.
Outcome gsf_sweep() {
  TextureConfig tex;
  const auto clean = matrix_of(generate_corpus(200, ArtifactSpec::clean(derive_seed(kSeed, 3000)), tex, jobs()), "clean");
  int hits = 0;
  std::string misses;
  for (int c = 1; c <= kAcCoefficients; ++c) {
    const auto spec = ArtifactSpec::inject(c, 2.0, derive_seed(kSeed, 3000 + static_cast<std::uint64_t>(c)));
    const auto injected = matrix_of(generate_corpus(200, spec, tex, jobs()), "injected");
    GsfOptions opt;
    opt.seed = kSeed;
    const auto got = analyze_pair(injected, clean, opt).forward.gsf;
    if (got == c) {
      ++hits;
    } else {
      misses += fmt(" %d->%d", c, got);
    }
  }
  return check(hits == kAcCoefficients, fmt("%d/63 recovered", hits) + (misses.empty() ? "" : ", misses:" + misses));
}

struct Corpus {
  std::vector<FeatureRecord> records;
};

// Clean / inject@13 / inject@47, 300 images each.
std::vector<std::vector<LuminanceImage>> three_class_images(bool quantize) {
  TextureConfig tex;
  tex.quantize = quantize;
  std::vector<std::vector<LuminanceImage>> out;
  out.push_back(generate_corpus(300, ArtifactSpec::clean(derive_seed(kSeed, 40)), tex, jobs()));
  out.push_back(generate_corpus(300, ArtifactSpec::inject(13, 2.0, derive_seed(kSeed, 41)), tex, jobs()));
  out.push_back(generate_corpus(300, ArtifactSpec::inject(47, 2.0, derive_seed(kSeed, 42)), tex, jobs()));
  return out;
}

const char* const kClassNames[] = {"clean", "inject13", "inject47"};

std::vector<FeatureRecord> records_of(const std::vector<std::vector<LuminanceImage>>& classes) {
  std::vector<FeatureRecord> all;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto r = features_of(classes[c], kClassNames[c], kClassNames[c]);
    std::move(r.begin(), r.end(), std::back_inserter(all));
  }
  return all;
}

RunConfig base_config() {
  RunConfig cfg;
  cfg.seed = kSeed;
  cfg.train_fraction = 0.10;
  cfg.folds = 5;
  cfg.jobs = jobs();
  cfg.real_label = "clean";
  return cfg;
}

EvalResult train_and_eval(const std::vector<FeatureRecord>& records, const RunConfig& cfg) {
  const auto trained = cmd_train(records, cfg);
  return cmd_eval(records, nlohmann::json::parse(trained.file.dump()), cfg);
}

// 4. Three-class boosted classification on the synthetic corpus.
Outcome classification(const std::vector<FeatureRecord>& records) {
  const auto result = train_and_eval(records, base_config());
  const double acc = result.holdout.accuracy;
  const double sd = result.cross_validation->accuracy_stddev;
  return check(acc >= 99.0 && sd <= 1.0,
               fmt("holdout accuracy %.2f%% (>= 99), 5-fold CV mean %.2f%%, stddev %.2f points (<= 1)", acc,
                   result.cross_validation->mean.accuracy, sd));
}

// 5. Single-beta logistic probe, clean vs inject@13.
Outcome logistic_probe(const std::vector<FeatureRecord>& records) {
  std::vector<FeatureRecord> pair;
  for (const auto& r : records) {
    if (r.label == "clean" || r.label == "inject13") pair.push_back(r);
  }
  auto cfg = base_config();
  cfg.classifier = ClassifierKind::Logistic;
  cfg.folds = 0;
  const auto trained = cmd_train(pair, cfg);
  const auto& model = std::get<LogisticModel>(trained.model);
  const auto result = cmd_eval(pair, nlohmann::json::parse(trained.file.dump()), cfg);
  return check(result.holdout.accuracy >= 95.0,
               fmt("probe on beta_%d, holdout accuracy %.2f%% (>= 95)", model.feature_index, result.holdout.accuracy));
}

// 6. Attack invariances and sensitivities.
Outcome attack_invariances(const std::vector<std::vector<LuminanceImage>>& quantized,
                           const std::vector<FeatureRecord>& quantized_records) {
  std::vector<std::string> failures;
  // Mirrors and quarter turns on 8-multiple images, including non-square ones.
  double mirror_err = 0.0, rot_err = 0.0;
  Rng rng(derive_seed(kSeed, 6));
  for (int t = 0; t < 20; ++t) {
    const int w = 8 * (4 + static_cast<int>(rng.below(12))), h = 8 * (4 + static_cast<int>(rng.below(12)));
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (auto& v : px) v = std::round(rng.uniform(0.0, 255.0));
    const LuminanceImage img(w, h, px);
    const auto base = image_betas(img);
    for (auto axis : {MirrorAxis::Horizontal, MirrorAxis::Vertical, MirrorAxis::Both}) {
      AttackSpec spec;
      spec.kind = AttackKind::Mirror;
      spec.axis = axis;
      const auto m = image_betas(apply_attack(img, spec));
      for (int c = 1; c <= kAcCoefficients; ++c) mirror_err = std::max(mirror_err, std::abs(m.beta(c) - base.beta(c)));
    }
    for (int deg : {90, 180, 270}) {
      AttackSpec spec;
      spec.kind = AttackKind::Rotation;
      spec.value = deg;
      const auto r = image_betas(apply_attack(img, spec));
      for (int c = 1; c <= kAcCoefficients; ++c) {
        const int target = deg == 180 ? c : zigzag_transpose(c);
        rot_err = std::max(rot_err, std::abs(r.beta(target) - base.beta(c)));
      }
    }
  }
  if (mirror_err > 1e-9) failures.push_back("mirror");
  if (rot_err > 1e-9) failures.push_back("rotation");

  // JPEG at QF 100 applied to every image before extraction.
  AttackSpec jpeg;
  jpeg.kind = AttackKind::Jpeg;
  jpeg.value = 100;
  std::vector<FeatureRecord> jpeg_records;
  for (std::size_t c = 0; c < quantized.size(); ++c) {
    std::vector<LuminanceImage> attacked(quantized[c].size());
    parallel_for(attacked.size(), jobs(), [&](std::size_t i) { attacked[i] = apply_attack(quantized[c][i], jpeg); });
    auto r = features_of(attacked, kClassNames[c], kClassNames[c]);
    std::move(r.begin(), r.end(), std::back_inserter(jpeg_records));
  }
  auto cfg = base_config();
  cfg.folds = 0;
  const double before = train_and_eval(quantized_records, cfg).holdout.accuracy;
  const double after = train_and_eval(jpeg_records, cfg).holdout.accuracy;
  if (std::abs(before - after) > 1.0) failures.push_back("jpeg-100");

  // Blur 3 -> 9 -> 15 on 200 clean 1/f textures: mean beta over zigzag >= 32.
  const auto natural = generate_corpus(200, ArtifactSpec::clean(derive_seed(kSeed, 61)), TextureConfig{.quantize = true},
                                       jobs());
  std::vector<int> monotone(natural.size(), 0);
  parallel_for(natural.size(), jobs(), [&](std::size_t i) {
    double prev = INFINITY;
    bool ok = true;
    for (int k : {3, 9, 15}) {
      AttackSpec blur;
      blur.kind = AttackKind::GaussianBlur;
      blur.value = k;
      const auto v = image_betas(apply_attack(natural[i], blur));
      double sum = 0.0;
      for (int c = 32; c <= kAcCoefficients; ++c) sum += v.beta(c);
      const double mean = sum / (kAcCoefficients - 31);
      ok = ok && mean <= prev;
      prev = mean;
    }
    monotone[i] = ok ? 1 : 0;
  });
  const double share = 100.0 * std::accumulate(monotone.begin(), monotone.end(), 0) / natural.size();
  if (share < 95.0) failures.push_back("blur");

  std::string detail = fmt(
      "mirror max |dbeta| %.3g, rot90 permuted max |dbeta| %.3g (<= 1e-9); QF100 accuracy %.2f%% -> %.2f%% "
      "(|delta| <= 1); blur high-band monotone on %.1f%% of 200 (>= 95%%)",
      mirror_err, rot_err, before, after, share);
  if (!failures.empty()) {
    detail += "; failed:";
    for (const auto& f : failures) detail += " " + f;
  }
  return check(failures.empty(), detail);
}

// 7. Amplification makes the injected grid visible in the Fourier spectrum.
Outcome amplification() {
  TextureConfig tex;
  tex.quantize = true;
  double amp_min = INFINITY, clean_max = 0.0;
  const int targets[] = {5, 13, 27, 47, 63};
  for (int t : targets) {
    const auto injected = generate_corpus(4, ArtifactSpec::inject(t, 2.0, derive_seed(kSeed, 700 + t)), tex, jobs());
    for (const auto& img : injected) amp_min = std::min(amp_min, spectral_peak_ratio(render(amplify(img, t))));
  }
  const auto clean = generate_corpus(20, ArtifactSpec::clean(derive_seed(kSeed, 799)), tex, jobs());
  for (const auto& img : clean) clean_max = std::max(clean_max, spectral_peak_ratio(img));
  return check(amp_min > 10.0 && clean_max < 3.0,
               fmt("amplified peak/median min %.2f over 20 injected images (> 10), clean baseline max %.2f over 20 "
                   "(< 3)",
                   amp_min, clean_max));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 8. Two full runs with the same seed give byte-identical artifacts.
Outcome determinism() {
  const auto root = fs::temp_directory_path() / fmt("ctfdct_accept_%d", static_cast<int>(::getpid()));
  fs::remove_all(root);
  auto run = [&](const fs::path& dir, int worker_count) {
    RunConfig cfg = base_config();
    cfg.jobs = worker_count;
    cfg.folds = 3;
    const std::vector<SynthClass> classes = {{"clean", 0, 1.0}, {"inject13", 13, 2.0}, {"inject47", 47, 2.0}};
    TextureConfig tex;
    tex.size = 64;
    const auto manifest = cmd_synth(dir / "corpus", classes, 40, tex, cfg);
    const auto extracted = cmd_extract(manifest, dir / "features.csv", cfg);
    const auto trained = cmd_train(extracted.records, cfg);
    write_json(dir / "model.json", trained.file);
    const auto eval = cmd_eval(extracted.records, read_json(dir / "model.json"), cfg);
    write_json(dir / "report.json", eval.report);
    write_json(dir / "gsf.json", cmd_gsf(extracted.records, extracted.records, cfg, "inject13", "clean").report);
  };
  run(root / "a", 1);
  run(root / "b", std::max(2, jobs()));
  std::vector<std::string> differ;
  for (const char* f : {"features.csv", "model.json", "report.json", "gsf.json"}) {
    const auto x = slurp(root / "a" / f), y = slurp(root / "b" / f);
    if (x.empty() || x != y) differ.push_back(f);
  }
  fs::remove_all(root);
  std::string detail = "features.csv, model.json, report.json, gsf.json compared across two runs (1 vs many workers)";
  for (const auto& d : differ) detail += "; differs: " + d;
  return check(differ.empty(), detail);
}

std::vector<LuminanceImage> load_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LuminanceImage> out(files.size());
  parallel_for(files.size(), jobs(), [&](std::size_t i) { out[i] = decode(files[i]); });
  return out;
}

// 9. Real-data GSF check; optional.
Outcome real_data() {
  const char* env = std::getenv("CTFDCT_FIG6_DIR");
  if (!env || !*env) return {Verdict::Skip, "set CTFDCT_FIG6_DIR to a folder with ffhq/, stylegan/, stylegan2/"};
  const fs::path root(env);
  const auto ffhq = matrix_of(load_dir(root / "ffhq"), "ffhq");
  const auto sg = matrix_of(load_dir(root / "stylegan"), "stylegan");
  const auto sg2 = matrix_of(load_dir(root / "stylegan2"), "stylegan2");
  GsfOptions opt;
  opt.seed = kSeed;
  opt.max_rows = 3000;
  const int a = analyze_pair(sg, ffhq, opt).forward.gsf;
  const int b = analyze_pair(sg, sg2, opt).forward.gsf;
  return check(a == 63 && b == 54, fmt("GSF(StyleGAN, FFHQ) = %d (63), GSF(StyleGAN, StyleGAN2) = %d (54)", a, b));
}

}  // namespace

int main() {
  bool failed = false;
  auto report = [&](int id, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.verdict != Verdict::Skip && limit_s > 0.0 && secs > limit_s) {
      o.verdict = Verdict::Fail;
      o.detail += fmt("; runtime %.1fs exceeds %.0fs", secs, limit_s);
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    failed = failed || o.verdict == Verdict::Fail;
    std::printf("criterion %d: %s [%.1fs] %s\n", id, tag, secs, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, 5.0, dct_round_trip);
  report(2, 10.0, beta_recovery);
  report(3, 300.0, gsf_sweep);

  std::vector<FeatureRecord> records;
  std::vector<std::vector<LuminanceImage>> quantized;
  std::vector<FeatureRecord> quantized_records;
  report(4, 600.0, [&] {
    records = records_of(three_class_images(false));
    return classification(records);
  });
  report(5, 0.0, [&] { return logistic_probe(records); });
  report(6, 0.0, [&] {
    quantized = three_class_images(true);
    quantized_records = records_of(quantized);
    return attack_invariances(quantized, quantized_records);
  });
  report(7, 0.0, amplification);
  report(8, 0.0, determinism);
  report(9, 0.0, real_data);
  return failed ? 1 : 0;
}
