#include "ctfdct/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ctfdct/error.hpp"
#include "ctfdct/parallel.hpp"
#include "ctfdct/rng.hpp"

namespace fs = std::filesystem;

namespace ctfdct {

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string collapsed_label(const std::string& label, const RunConfig& config) {
  if (!config.binary_collapse) return label;
  return label == config.real_label ? config.real_label : std::string("fake");
}

BetaMatrix matrix_for(std::span<const FeatureRecord> records, const std::string& label, std::string& set_name) {
  std::vector<BetaVector> rows;
  for (const auto& r : records) {
    if (label.empty() || r.label == label) rows.push_back(r.features);
  }
  if (rows.empty()) throw Error(ErrorCode::Data, "no feature rows for set '" + label + "'");
  set_name = label.empty() ? records.front().label : label;
  return build_matrix(rows, set_name);
}

RunConfig stored_config(const nlohmann::json& training, const RunConfig& fallback) {
  RunConfig c = fallback;
  if (!training.contains("config")) return c;
  const auto& j = training.at("config");
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  c.normalization = parse_normalization_mode(j.value("normalization", std::string(to_string(c.normalization))));
  c.binary_collapse = j.value("binary_collapse", c.binary_collapse);
  c.real_label = j.value("real_label", c.real_label);
  c.feature_index = j.value("feature_index", c.feature_index);
  if (j.contains("boost")) {
    const auto& b = j.at("boost");
    c.boost.n_estimators = b.value("n_estimators", c.boost.n_estimators);
    c.boost.learning_rate = b.value("learning_rate", c.boost.learning_rate);
    c.boost.max_depth = b.value("max_depth", c.boost.max_depth);
    c.boost.min_samples_leaf = b.value("min_samples_leaf", c.boost.min_samples_leaf);
    c.boost.newton_leaves = b.value("newton_leaves", c.boost.newton_leaves);
    c.boost.subsample = b.value("subsample", c.boost.subsample);
  }
  if (j.contains("logistic")) {
    const auto& l = j.at("logistic");
    c.logistic.max_iter = l.value("max_iter", c.logistic.max_iter);
    c.logistic.tol = l.value("tol", c.logistic.tol);
    c.logistic.learning_rate = l.value("learning_rate", c.logistic.learning_rate);
  }
  return c;
}

}  // namespace

ClassifierKind parse_classifier_kind(std::string_view name) {
  if (name == "boosted") return ClassifierKind::Boosted;
  if (name == "logistic") return ClassifierKind::Logistic;
  throw Error(ErrorCode::Usage, "unknown classifier: " + std::string(name));
}

std::string_view to_string(ClassifierKind kind) { return kind == ClassifierKind::Boosted ? "boosted" : "logistic"; }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::Spec:
    case ErrorCode::Bounds: return kExitUsage;
    default: return kExitData;
  }
}

void RunConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error(ErrorCode::Usage, "train fraction must be in (0, 1)");
  if (folds == 1 || folds < 0) throw Error(ErrorCode::Usage, "folds must be 0 (no cross-validation) or >= 2");
  if (k < 2) throw Error(ErrorCode::Usage, "K must be >= 2");
  if (feature_index < 0 || feature_index > kAcCoefficients) throw Error(ErrorCode::Usage, "feature index must be 0..63");
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["train_fraction"] = train_fraction;
  j["folds"] = folds;
  j["k"] = k;
  j["classifier"] = to_string(classifier);
  j["normalization"] = to_string(normalization);
  j["luminance"] = to_string(luminance);
  j["binary_collapse"] = binary_collapse;
  j["real_label"] = real_label;
  j["labels"] = labels;
  j["feature_index"] = feature_index;
  j["boost"] = {{"n_estimators", boost.n_estimators}, {"learning_rate", boost.learning_rate},
                {"max_depth", boost.max_depth}, {"min_samples_leaf", boost.min_samples_leaf},
                {"newton_leaves", boost.newton_leaves}, {"subsample", boost.subsample}};
  j["logistic"] = {{"max_iter", logistic.max_iter}, {"tol", logistic.tol}, {"learning_rate", logistic.learning_rate}};
  return j;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

std::vector<std::string> class_labels_for(std::span<const FeatureRecord> records, const RunConfig& config) {
  if (config.binary_collapse) {
    const bool has_real = std::any_of(records.begin(), records.end(),
                                      [&](const FeatureRecord& r) { return r.label == config.real_label; });
    if (!has_real) throw Error(ErrorCode::Label, "binary collapse: no rows labelled '" + config.real_label + "'");
    return {config.real_label, "fake"};
  }
  if (!config.labels.empty()) return config.labels;
  std::set<std::string> unique;
  for (const auto& r : records) unique.insert(r.label);
  return {unique.begin(), unique.end()};
}

LabeledData to_labeled(std::span<const FeatureRecord> records, const RunConfig& config,
                       const std::vector<std::string>& class_labels) {
  LabeledData data;
  data.class_labels = class_labels.empty() ? class_labels_for(records, config) : class_labels;
  for (const auto& r : records) {
    const auto label = collapsed_label(r.label, config);
    const auto it = std::find(data.class_labels.begin(), data.class_labels.end(), label);
    if (it == data.class_labels.end()) throw Error(ErrorCode::Label, "unknown label '" + r.label + "' (" + r.features.source_id + ")");
    data.features.emplace_back(r.features.betas.begin(), r.features.betas.end());
    data.labels.push_back(static_cast<int>(it - data.class_labels.begin()));
  }
  return data;
}

ExtractResult extract_features(const DatasetManifest& manifest, const RunConfig& config) {
  if (manifest.entries.empty()) throw Error(ErrorCode::Usage, "manifest has no entries");
  const std::size_t n = manifest.entries.size();
  std::vector<std::optional<FeatureRecord>> rows(n);
  std::vector<std::optional<ItemError>> failures(n);
  parallel_for(n, config.jobs, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      const auto img = decode(manifest.resolve(entry), config.luminance);
      rows[i] = FeatureRecord{image_betas(img, entry.path), entry.label};
    } catch (const Error& e) {
      failures[i] = ItemError{entry.path, e.what()};
    }
  });
  ExtractResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i]) out.records.push_back(std::move(*rows[i]));
    if (failures[i]) out.errors.push_back(std::move(*failures[i]));
  }
  return out;
}

ExtractResult cmd_extract(const DatasetManifest& manifest, const fs::path& out, const RunConfig& config) {
  auto result = extract_features(manifest, config);
  write_features(out, result.records, format_for_path(out));
  fs::path error_path = out;
  error_path += ".errors.jsonl";
  if (result.errors.empty()) {
    fs::remove(error_path);
  } else {
    std::ofstream err(error_path);
    for (const auto& e : result.errors) {
      err << nlohmann::ordered_json{{"path", e.path}, {"error", e.message}}.dump() << '\n';
    }
  }
  return result;
}

std::string chi2_svg(const GsfResult& result, const std::string& title) {
  constexpr int bar = 12, left = 50, top = 30, plot_h = 240, bottom = 40;
  const int width = left + bar * kAcCoefficients + 20, height = top + plot_h + bottom;
  const double peak = std::max(*std::max_element(result.chi2.begin(), result.chi2.end()), 1e-300);
  std::ostringstream svg;
  char buf[256];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" << title << " (GSF "
      << result.gsf << ")</text>\n";
  for (int c = 1; c <= kAcCoefficients; ++c) {
    const double h = plot_h * result.chi2[c - 1] / peak;
    std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%.3f\" width=\"%d\" height=\"%.3f\" fill=\"%s\"/>\n",
                  left + (c - 1) * bar, top + plot_h - h, bar - 2, h, c == result.gsf ? "#c0392b" : "#4a6fa5");
    svg << buf;
    if (c % 8 == 0 || c == 1) {
      svg << "<text x=\"" << left + (c - 1) * bar << "\" y=\"" << top + plot_h + 15
          << "\" font-family=\"sans-serif\" font-size=\"10\">" << c << "</text>\n";
    }
  }
  std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%d\" font-family=\"sans-serif\" font-size=\"10\">%.4g</text>\n",
                top + 8, peak);
  svg << buf;
  svg << "<text x=\"" << left << "\" y=\"" << height - 8
      << "\" font-family=\"sans-serif\" font-size=\"11\">AC coefficient (zigzag index)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

GsfCommandResult cmd_gsf(std::span<const FeatureRecord> a, std::span<const FeatureRecord> b, const RunConfig& config,
                         const std::string& label_a, const std::string& label_b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::Data, "both feature sets must be non-empty");
  std::string name_a, name_b;
  const auto matrix_a = matrix_for(a, label_a, name_a);
  const auto matrix_b = matrix_for(b, label_b, name_b);
  GsfOptions options;
  options.seed = config.seed;
  options.max_rows = config.k;
  options.mode = config.normalization;

  GsfCommandResult out;
  auto& j = out.report;
  j["set_a"] = name_a;
  j["set_b"] = name_b;
  j["seed"] = config.seed;
  j["config_hash"] = config.hash();
  j["normalization"] = to_string(config.normalization);
  try {
    const auto analysis = analyze_pair(matrix_a, matrix_b, options);
    j["status"] = "ok";
    j["K"] = analysis.rows;
    j["chi2"] = analysis.forward.chi2;
    j["gsf"] = analysis.forward.gsf;
    j["runner_up"] = analysis.forward.runner_up;
    j["margin"] = analysis.forward.margin;
    j["chi2_reverse"] = analysis.reverse_chi2;
    j["gsf_reverse"] = gsf_from_chi2(analysis.reverse_chi2).gsf;
    out.analysis = analysis;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSignal) throw;
    j["status"] = "no-signal";
    j["error"] = e.what();
    j["K"] = std::min({matrix_a.rows(), matrix_b.rows(), config.k});
    out.exit_code = kExitData;
  }
  return out;
}

int pick_gsf_feature(const LabeledData& train, const RunConfig& config) {
  if (train.class_count() != 2) throw Error(ErrorCode::DegenerateData, "GSF feature selection needs 2 classes");
  std::vector<BetaVector> neg, pos;
  for (std::size_t i = 0; i < train.size(); ++i) {
    BetaVector v;
    std::copy(train.features[i].begin(), train.features[i].end(), v.betas.begin());
    (train.labels[i] == 1 ? pos : neg).push_back(v);
  }
  GsfOptions options;
  options.seed = config.seed;
  options.mode = config.normalization;
  return analyze_pair(build_matrix(pos, train.class_labels[1]), build_matrix(neg, train.class_labels[0]), options)
      .forward.gsf;
}

Trainer make_trainer(const RunConfig& config, int logistic_feature) {
  if (config.classifier == ClassifierKind::Boosted) {
    return [config](const LabeledData& d) -> Model {
      auto boost = config.boost;
      boost.seed = derive_seed(config.seed, 0xb005);
      return train_boosted(d, boost);
    };
  }
  return [config, logistic_feature](const LabeledData& d) -> Model {
    const int feature = logistic_feature > 0 ? logistic_feature : pick_gsf_feature(d, config);
    return train_logistic(d, feature, config.logistic);
  };
}

TrainResult cmd_train(std::span<const FeatureRecord> features, const RunConfig& config) {
  config.validate();
  if (features.empty()) throw Error(ErrorCode::Data, "no feature rows");
  TrainResult out;
  out.data = to_labeled(features, config);
  out.split = stratified_split(out.data.labels, config.train_fraction, config.seed);
  const auto train = out.data.subset(out.split.train);
  if (config.classifier == ClassifierKind::Logistic && train.class_count() != 2) {
    throw Error(ErrorCode::DegenerateData, "logistic probe needs exactly 2 classes (use --binary-collapse)");
  }
  out.model = make_trainer(config, config.feature_index)(train);

  out.file = model_to_json(out.model);
  nlohmann::ordered_json training;
  training["config"] = config.to_json();
  training["config_hash"] = config.hash();
  training["seed"] = config.seed;
  training["train_rows"] = out.split.train.size();
  std::vector<std::string> ids;
  for (std::size_t i : out.split.train) ids.push_back(features[i].features.source_id);
  training["train_ids"] = ids;
  out.file["training"] = std::move(training);
  return out;
}

EvalResult cmd_eval(std::span<const FeatureRecord> features, const nlohmann::json& model_file, const RunConfig& config) {
  if (features.empty()) throw Error(ErrorCode::Data, "no feature rows");
  const Model model = model_from_json(model_file);
  const auto training = model_file.value("training", nlohmann::json::object());
  RunConfig cfg = stored_config(training, config);
  cfg.seed = config.seed;
  cfg.folds = config.folds;
  cfg.classifier = std::holds_alternative<LogisticModel>(model) ? ClassifierKind::Logistic : ClassifierKind::Boosted;

  const auto data = to_labeled(features, cfg, model_class_labels(model));
  const auto train_ids = training.value("train_ids", std::vector<std::string>{});
  const std::set<std::string> trained(train_ids.begin(), train_ids.end());
  std::vector<std::size_t> holdout;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!trained.count(features[i].features.source_id)) holdout.push_back(i);
  }
  if (holdout.empty()) throw Error(ErrorCode::Data, "no rows outside the model's training split");

  EvalResult out;
  out.holdout = evaluate(model, data.subset(holdout));
  auto& j = out.report;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  j["model_kind"] = to_string(cfg.classifier);
  j["holdout"] = report_to_json(out.holdout);
  out.table = "holdout (" + std::to_string(out.holdout.samples) + " rows)\n" + report_table(out.holdout);
  if (config.folds >= 2) {
    const int feature = std::holds_alternative<LogisticModel>(model) ? std::get<LogisticModel>(model).feature_index : 0;
    out.cross_validation = cross_validate(data, make_trainer(cfg, feature), config.folds, cfg.seed);
    j["cross_validation"] = report_to_json(*out.cross_validation);
    char line[96];
    std::snprintf(line, sizeof line, "accuracy stddev across folds: %.2f\n", out.cross_validation->accuracy_stddev);
    out.table += "\n" + std::to_string(config.folds) + "-fold cross-validation (mean)\n" +
                 report_table(out.cross_validation->mean) + line;
  }
  return out;
}

AugmentResult cmd_attack(const DatasetManifest& manifest, std::span<const AttackSpec> specs, const fs::path& out_dir,
                         const RunConfig& config) {
  std::vector<AttackSpec> seeded(specs.begin(), specs.end());
  for (auto& s : seeded) s.seed = config.seed;
  return augment_dataset(manifest, seeded, out_dir, config.jobs);
}

AmplifyResult cmd_amplify(const LuminanceImage& img, int gsf_index, const AmplificationParams& params,
                          const fs::path& out_dir) {
  const auto rendered = render(amplify(img, gsf_index, params));
  fs::create_directories(out_dir);
  write_png(out_dir / "amplified.png", rendered);
  write_png(out_dir / "spectrum_original.png", LuminanceImage::clamped(fourier_magnitude(img)));
  write_png(out_dir / "spectrum_amplified.png", LuminanceImage::clamped(fourier_magnitude(rendered)));
  AmplifyResult out;
  out.original_peak_ratio = spectral_peak_ratio(img);
  out.amplified_peak_ratio = spectral_peak_ratio(rendered);
  out.report["gsf"] = gsf_index;
  out.report["k1"] = params.k1;
  out.report["k2"] = params.k2;
  out.report["peak_ratio_original"] = out.original_peak_ratio;
  out.report["peak_ratio_amplified"] = out.amplified_peak_ratio;
  out.report["outputs"] = {"amplified.png", "spectrum_original.png", "spectrum_amplified.png"};
  return out;
}

SynthClass parse_synth_class(std::string_view text) {
  SynthClass c;
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.empty() || parts[0].empty() || parts.size() > 3) throw Error(ErrorCode::Usage, "bad class spec: " + std::string(text));
  c.label = parts[0];
  try {
    if (parts.size() >= 2) c.target = std::stoi(parts[1]);
    if (parts.size() == 3) c.strength = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Usage, "bad class spec: " + std::string(text));
  }
  if (c.target == 0) c.strength = 1.0;
  ArtifactSpec{c.target, c.strength, "pink", 0}.validate();
  return c;
}

DatasetManifest cmd_synth(const fs::path& out_dir, std::span<const SynthClass> classes, std::size_t n,
                          const TextureConfig& texture, const RunConfig& config) {
  if (classes.empty()) throw Error(ErrorCode::Usage, "at least one class is required");
  DatasetManifest m;
  m.name = "synthetic";
  m.created_at = manifest_timestamp();
  m.base_dir = out_dir;
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    const auto& cls = classes[ci];
    const ArtifactSpec spec{cls.target, cls.strength, "pink", derive_seed(config.seed, ci)};
    const auto images = generate_corpus(n, spec, texture, config.jobs);
    fs::create_directories(out_dir / cls.label);
    m.labels.push_back(cls.label);
    for (std::size_t i = 0; i < images.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%05zu.png", i);
      const auto rel = (fs::path(cls.label) / name).generic_string();
      write_png(out_dir / rel, images[i]);
      m.entries.push_back({rel, cls.label, SplitTag::Unassigned});
    }
  }
  m.validate();
  save_manifest(out_dir / "manifest.json", m);
  return m;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

}  // namespace ctfdct
