// ctfdct: frequency-domain deepfake forensics from the command line.
//
//   ctfdct synth   --out-dir DIR --n 300 --class real --class inj13:13:2
//   ctfdct extract --manifest DIR/manifest.json --out features.csv
//   ctfdct gsf     --a features.csv --label-a inj13 --b features.csv --label-b real --out gsf.json
//   ctfdct train   --features features.csv --out model.json
//   ctfdct eval    --features features.csv --model model.json --out report.json
//   ctfdct attack  --manifest DIR/manifest.json --out-dir attacked --grid
//   ctfdct amplify --image face.png --gsf 13 --out-dir amp
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 partial failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctfdct/error.hpp"
#include "ctfdct/parallel.hpp"
#include "ctfdct/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ctfdct;

namespace {

struct Options {
  RunConfig config;
  std::string luminance = "bt601";
  std::string normalization = "joint";
  std::string classifier = "boosted";
  std::string labels;

  // extract / attack
  std::string manifest;
  // shared outputs
  std::string out;
  std::string out_dir;
  // gsf
  std::string features_a, features_b, label_a, label_b, svg;
  // train / eval
  std::string features, model, text;
  // attack
  std::vector<std::string> specs;
  bool grid = false;
  // amplify
  std::string image;
  int gsf = 0;
  double k1 = 0.1, k2 = 100.0;
  // synth
  std::size_t n = 100;
  std::vector<std::string> classes;
  int size = 128;

  void finish() {
    config.luminance = parse_channel_mode(luminance);
    config.normalization = parse_normalization_mode(normalization);
    config.classifier = parse_classifier_kind(classifier);
    config.labels.clear();
    std::stringstream ss(labels);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) config.labels.push_back(item);
    }
  }
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.config.seed, "Seed for every random draw")->capture_default_str();
  cmd->add_option("--jobs", o.config.jobs, "Worker threads for per-image work")->capture_default_str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

int run_extract(const Options& o) {
  const auto manifest = load_manifest(o.manifest);
  const auto result = cmd_extract(manifest, o.out, o.config);
  for (const auto& e : result.errors) std::cerr << "error: " << e.path << ": " << e.message << '\n';
  std::cout << "extracted " << result.records.size() << " rows -> " << o.out;
  if (!result.errors.empty()) std::cout << " (" << result.errors.size() << " failures)";
  std::cout << '\n';
  return result.exit_code();
}

int run_gsf(const Options& o) {
  const auto a = read_features(o.features_a);
  const auto b = read_features(o.features_b);
  const auto result = cmd_gsf(a, b, o.config, o.label_a, o.label_b);
  write_json(o.out, result.report);
  if (result.analysis) {
    const auto& f = result.analysis->forward;
    if (!o.svg.empty()) {
      write_text(o.svg, chi2_svg(f, result.report["set_a"].get<std::string>() + " vs " +
                                        result.report["set_b"].get<std::string>()));
    }
    std::cout << "GSF(" << result.report["set_a"].get<std::string>() << ", "
              << result.report["set_b"].get<std::string>() << ") = " << f.gsf << " (runner-up " << f.runner_up
              << ", K=" << result.analysis->rows << ")\n";
  } else {
    std::cerr << "no signal: " << result.report["error"].get<std::string>() << '\n';
  }
  return result.exit_code;
}

int run_train(const Options& o) {
  const auto features = read_features(o.features);
  const auto result = cmd_train(features, o.config);
  write_json(o.out, result.file);
  std::cout << "trained " << to_string(o.config.classifier) << " model on " << result.split.train.size() << " of "
            << features.size() << " rows -> " << o.out << '\n';
  return kExitOk;
}

int run_eval(const Options& o) {
  const auto features = read_features(o.features);
  const auto result = cmd_eval(features, read_json(o.model), o.config);
  if (!o.out.empty()) write_json(o.out, result.report);
  if (!o.text.empty()) write_text(o.text, result.table);
  std::cout << result.table;
  return kExitOk;
}

int run_attack(const Options& o) {
  std::vector<AttackSpec> specs;
  if (o.grid) specs = attack_grid(o.config.seed);
  for (const auto& s : o.specs) specs.push_back(AttackSpec::parse(s, o.config.seed));
  const auto manifest = load_manifest(o.manifest);
  const auto result = cmd_attack(manifest, specs, o.out_dir, o.config);
  fs::create_directories(o.out_dir);
  auto out_manifest = result.manifest;
  save_manifest(fs::path(o.out_dir) / "manifest.json", out_manifest);
  write_provenance(fs::path(o.out_dir) / "provenance.jsonl", result.provenance);
  for (const auto& e : result.errors) std::cerr << "error: " << e.path << ": " << e.message << '\n';
  std::cout << "wrote " << result.provenance.size() << " attacked images -> " << o.out_dir << '\n';
  return result.errors.empty() ? kExitOk : kExitPartial;
}

int run_amplify(const Options& o) {
  const auto img = decode(o.image, o.config.luminance);
  const auto result = cmd_amplify(img, o.gsf, {o.k1, o.k2}, o.out_dir);
  write_json(fs::path(o.out_dir) / "amplify.json", result.report);
  std::cout << "spectral peak ratio: original " << result.original_peak_ratio << ", amplified "
            << result.amplified_peak_ratio << "\n";
  return kExitOk;
}

int run_synth(const Options& o) {
  std::vector<SynthClass> classes;
  for (const auto& c : o.classes) classes.push_back(parse_synth_class(c));
  if (classes.empty()) classes.push_back(parse_synth_class("real"));
  TextureConfig texture;
  texture.size = o.size;
  const auto manifest = cmd_synth(o.out_dir, classes, o.n, texture, o.config);
  std::cout << "wrote " << manifest.entries.size() << " images -> " << o.out_dir << "/manifest.json\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain (8x8 DCT) deepfake forensics toolkit"};
  app.require_subcommand(1);
  Options o;
  o.config.jobs = default_jobs();

  auto* extract = app.add_subcommand("extract", "Per-image beta features from a manifest");
  extract->add_option("--manifest", o.manifest, "Dataset manifest JSON")->required();
  extract->add_option("--out", o.out, "Feature file (.csv or .jsonl)")->required();
  extract->add_option("--luminance", o.luminance, "bt601 | r | g | b")->capture_default_str();
  add_common(extract, o);

  auto* gsf = app.add_subcommand("gsf", "GAN-specific frequency between two feature sets");
  gsf->add_option("--a", o.features_a, "Features of set A")->required();
  gsf->add_option("--b", o.features_b, "Features of set B (chi-square denominator)")->required();
  gsf->add_option("--label-a", o.label_a, "Only rows of A with this label");
  gsf->add_option("--label-b", o.label_b, "Only rows of B with this label");
  gsf->add_option("--out", o.out, "Report JSON")->required();
  gsf->add_option("--svg", o.svg, "Bar chart of the 63 chi-square values");
  gsf->add_option("--k", o.config.k, "Rows per set (the larger set is subsampled)")->capture_default_str();
  gsf->add_option("--normalization", o.normalization, "joint | per-set")->capture_default_str();
  add_common(gsf, o);

  auto* train = app.add_subcommand("train", "Train a classifier on a stratified split");
  train->add_option("--features", o.features, "Feature file")->required();
  train->add_option("--out", o.out, "Model JSON")->required();
  train->add_option("--classifier", o.classifier, "boosted | logistic")->capture_default_str();
  train->add_option("--train-fraction", o.config.train_fraction, "Fraction of each class used for training")
      ->capture_default_str();
  train->add_option("--labels", o.labels, "Comma-separated class order");
  train->add_flag("--binary-collapse", o.config.binary_collapse, "Collapse to real vs any-fake");
  train->add_option("--real-label", o.config.real_label, "Label treated as real")->capture_default_str();
  train->add_option("--feature-index", o.config.feature_index, "Logistic feature (0 = GSF of the training split)")
      ->capture_default_str();
  train->add_option("--normalization", o.normalization, "joint | per-set (GSF selection)")->capture_default_str();
  train->add_option("--n-estimators", o.config.boost.n_estimators)->capture_default_str();
  train->add_option("--learning-rate", o.config.boost.learning_rate)->capture_default_str();
  train->add_option("--max-depth", o.config.boost.max_depth)->capture_default_str();
  train->add_option("--subsample", o.config.boost.subsample, "Row fraction per boosting round")
      ->capture_default_str();
  train->add_option("--min-samples-leaf", o.config.boost.min_samples_leaf)->capture_default_str();
  train->add_flag("--newton-leaves", o.config.boost.newton_leaves, "Newton-step leaves instead of mean residuals");
  add_common(train, o);

  auto* eval = app.add_subcommand("eval", "Evaluate a model on its holdout rows, plus k-fold CV");
  eval->add_option("--features", o.features, "Feature file")->required();
  eval->add_option("--model", o.model, "Model JSON from train")->required();
  eval->add_option("--out", o.out, "Report JSON");
  eval->add_option("--text", o.text, "Report table (text)");
  eval->add_option("--folds", o.config.folds, "Cross-validation folds")->capture_default_str();
  add_common(eval, o);

  auto* attack = app.add_subcommand("attack", "Write attacked variants of every manifest image");
  attack->add_option("--manifest", o.manifest, "Dataset manifest JSON")->required();
  attack->add_option("--out-dir", o.out_dir, "Output directory")->required();
  attack->add_option("--spec", o.specs, "Attack, e.g. jpeg:50, mirror:H, rotation:45, gaussian-blur:9");
  attack->add_flag("--grid", o.grid, "The full 17-attack robustness grid");
  add_common(attack, o);

  auto* amp = app.add_subcommand("amplify", "Render the GSF amplification and Fourier spectra");
  amp->add_option("--image", o.image, "Input image")->required();
  amp->add_option("--gsf", o.gsf, "Coefficient to amplify (1..63)")->required();
  amp->add_option("--k1", o.k1, "Attenuation of the other coefficients")->capture_default_str();
  amp->add_option("--k2", o.k2, "Amplification of the GSF")->capture_default_str();
  amp->add_option("--out-dir", o.out_dir, "Output directory")->required();
  amp->add_option("--luminance", o.luminance, "bt601 | r | g | b")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Synthetic corpus with injected single-coefficient artifacts");
  synth->add_option("--out-dir", o.out_dir, "Output directory")->required();
  synth->add_option("--n", o.n, "Images per class")->capture_default_str();
  synth->add_option("--class", o.classes, "label[:coefficient[:strength]]; coefficient 0 is clean");
  synth->add_option("--size", o.size, "Image side in pixels (multiple of 8)")->capture_default_str();
  add_common(synth, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    o.finish();
    if (*extract) return run_extract(o);
    if (*gsf) return run_gsf(o);
    if (*train) return run_train(o);
    if (*eval) return run_eval(o);
    if (*attack) return run_attack(o);
    if (*amp) return run_amplify(o);
    if (*synth) return run_synth(o);
  } catch (const Error& e) {
    std::cerr << "ctfdct: " << to_string(e.code()) << " error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "ctfdct: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
