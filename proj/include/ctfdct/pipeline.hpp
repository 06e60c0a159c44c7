#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctfdct/augment.hpp"
#include "ctfdct/beta.hpp"
#include "ctfdct/classifiers.hpp"
#include "ctfdct/error.hpp"
#include "ctfdct/evaluation.hpp"
#include "ctfdct/feature_io.hpp"
#include "ctfdct/gsf.hpp"
#include "ctfdct/image_io.hpp"
#include "ctfdct/manifest.hpp"
#include "ctfdct/synth.hpp"

namespace ctfdct {

enum class ClassifierKind { Boosted, Logistic };

ClassifierKind parse_classifier_kind(std::string_view name);
std::string_view to_string(ClassifierKind kind);

// Process exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitPartial = 3 };
int exit_code_for(ErrorCode code);

struct RunConfig {
  std::uint64_t seed = 1;
  double train_fraction = 0.10;
  int folds = 5;
  std::size_t k = 3000;
  ClassifierKind classifier = ClassifierKind::Boosted;
  NormalizationMode normalization = NormalizationMode::Joint;
  ChannelMode luminance = ChannelMode::Bt601;
  bool binary_collapse = false;
  std::string real_label = "real";
  std::vector<std::string> labels;  // explicit class order; empty = sorted unique
  int feature_index = 0;            // logistic probe column; 0 = pick the GSF
  BoostConfig boost;
  LogisticConfig logistic;
  int jobs = 1;  // does not affect outputs

  void validate() const;
  // Output-affecting fields only; jobs is excluded.
  nlohmann::ordered_json to_json() const;
  // FNV-1a 64 of to_json().dump(), as 16 hex digits.
  std::string hash() const;
};

// Features -> labeled rows using config.labels (or sorted unique labels) and
// the optional binary collapse to (real_label, "fake").
LabeledData to_labeled(std::span<const FeatureRecord> records, const RunConfig& config,
                       const std::vector<std::string>& class_labels = {});
std::vector<std::string> class_labels_for(std::span<const FeatureRecord> records, const RunConfig& config);

struct ExtractResult {
  std::vector<FeatureRecord> records;
  std::vector<ItemError> errors;
  int exit_code() const { return errors.empty() ? kExitOk : kExitPartial; }
};

// One row per decodable manifest entry, in manifest order. source_id is the
// entry path as written in the manifest.
ExtractResult extract_features(const DatasetManifest& manifest, const RunConfig& config);
ExtractResult cmd_extract(const DatasetManifest& manifest, const std::filesystem::path& out, const RunConfig& config);

struct GsfCommandResult {
  nlohmann::ordered_json report;
  std::optional<GsfAnalysis> analysis;  // empty on no-signal
  int exit_code = kExitOk;
};

// Each side is one image set: label_a/label_b select rows by label, or the
// whole file when empty. Writes report JSON and, when svg is set, a chart.
GsfCommandResult cmd_gsf(std::span<const FeatureRecord> a, std::span<const FeatureRecord> b,
                         const RunConfig& config, const std::string& label_a = {}, const std::string& label_b = {});
std::string chi2_svg(const GsfResult& result, const std::string& title);

struct TrainResult {
  Model model;
  nlohmann::ordered_json file;  // model record plus "training" metadata
  Split split;
  LabeledData data;
};

TrainResult cmd_train(std::span<const FeatureRecord> features, const RunConfig& config);

struct EvalResult {
  EvalReport holdout;
  std::optional<CrossValidationReport> cross_validation;
  nlohmann::ordered_json report;
  std::string table;
};

// Holdout: rows not listed in the model's training ids. With folds >= 2 the
// model's configuration is also cross-validated on all rows.
EvalResult cmd_eval(std::span<const FeatureRecord> features, const nlohmann::json& model_file, const RunConfig& config);

Trainer make_trainer(const RunConfig& config, int logistic_feature);
// Picks the GSF between the two classes of a binary training set.
int pick_gsf_feature(const LabeledData& train, const RunConfig& config);

AugmentResult cmd_attack(const DatasetManifest& manifest, std::span<const AttackSpec> specs,
                         const std::filesystem::path& out_dir, const RunConfig& config);

struct AmplifyResult {
  double original_peak_ratio = 0.0;
  double amplified_peak_ratio = 0.0;
  nlohmann::ordered_json report;
};

// Writes amplified.png, spectrum_original.png and spectrum_amplified.png.
AmplifyResult cmd_amplify(const LuminanceImage& img, int gsf_index, const AmplificationParams& params,
                          const std::filesystem::path& out_dir);

struct SynthClass {
  std::string label;
  int target = 0;
  double strength = 2.0;
};

// "name", "name:target" or "name:target:strength".
SynthClass parse_synth_class(std::string_view text);

// n images per class under out_dir/<label>/, manifest at out_dir/manifest.json.
DatasetManifest cmd_synth(const std::filesystem::path& out_dir, std::span<const SynthClass> classes, std::size_t n,
                          const TextureConfig& texture, const RunConfig& config);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace ctfdct
