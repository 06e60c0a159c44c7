#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace ctfdct {

// Feature rows with integer class ids into class_labels.
struct LabeledData {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<std::string> class_labels;

  std::size_t size() const { return features.size(); }
  std::size_t width() const { return features.empty() ? 0 : features.front().size(); }
  std::size_t class_count() const { return class_labels.size(); }

  LabeledData subset(std::span<const std::size_t> rows) const;
};

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

// ---------------------------------------------------------------------------
// Single-feature logistic probe
// ---------------------------------------------------------------------------

struct LogisticConfig {
  int max_iter = 10000;
  double tol = 1e-8;          // stop when |gradient|_inf drops below
  double learning_rate = 0.5; // on the standardized feature
};

// p(positive | x) = sigmoid(weight * x + bias), x = features[feature_index - 1].
struct LogisticModel {
  double weight = 0.0;
  double bias = 0.0;
  int feature_index = 1;
  std::array<std::string, 2> class_labels;  // (negative, positive)
  int iterations = 0;

  double probability(double x) const;
};

// labels must be 0 (negative) / 1 (positive). Batch gradient descent on the
// mean log-loss of the standardized feature, folded back to raw units.
LogisticModel train_logistic(std::span<const double> x, std::span<const int> labels,
                             const LogisticConfig& config = {});
// Binary data; uses column feature_index - 1.
LogisticModel train_logistic(const LabeledData& data, int feature_index, const LogisticConfig& config = {});

// ---------------------------------------------------------------------------
// Multi-class gradient boosting
// ---------------------------------------------------------------------------

struct TreeNode {
  int feature = -1;       // -1 marks a leaf
  double threshold = 0.0; // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;     // leaf output
};

// Node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
};

struct BoostConfig {
  int n_estimators = 100;
  double learning_rate = 0.6;
  int max_depth = 2;
  std::size_t feature_width = 63;  // 0 accepts any width
  // Leaf values: one Newton step on the softmax loss, (K-1)/K * sum(r) / sum(|r|(1-|r|)),
  // or the plain mean residual when false.
  bool newton_leaves = false;
  std::size_t min_samples_leaf = 1;
  // Fraction of rows drawn (without replacement) to grow each round's trees;
  // 1 uses every row and ignores the seed.
  double subsample = 0.5;
  std::uint64_t seed = 0;
};

struct BoostedEnsemble {
  std::vector<std::string> class_labels;
  std::size_t n_features = 0;
  int n_estimators = 0;
  double learning_rate = 0.0;
  int max_depth = 0;
  std::vector<double> initial_scores;  // log class priors
  // trees[round * classes + k] fits the gradient of class k at that round.
  std::vector<RegressionTree> trees;
  // Mean cross-entropy after initialisation and after every round.
  std::vector<double> loss_history;

  std::vector<double> raw_scores(std::span<const double> x) const;
};

// Softmax objective; one depth-limited least-squares tree per class per round
// fit to the negative gradient y_k - p_k, shrunk by learning_rate.
BoostedEnsemble train_boosted(const LabeledData& data, const BoostConfig& config = {});

using Model = std::variant<LogisticModel, BoostedEnsemble>;

Prediction predict(const BoostedEnsemble& model, std::span<const double> features);
// features is the full 63-wide row; the model reads its own column.
Prediction predict(const LogisticModel& model, std::span<const double> features);
Prediction predict(const Model& model, std::span<const double> features);

std::vector<std::string> model_class_labels(const Model& model);

// Versioned JSON with nested split/leaf tree records.
nlohmann::ordered_json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

}  // namespace ctfdct
