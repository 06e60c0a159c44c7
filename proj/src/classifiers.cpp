#include "ctfdct/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ctfdct/error.hpp"
#include "ctfdct/rng.hpp"

namespace ctfdct {

namespace {

constexpr int kModelVersion = 1;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void softmax_inplace(std::vector<double>& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

void require_width(std::span<const double> x, std::size_t width) {
  if (x.size() != width) {
    throw Error(ErrorCode::Shape, "feature width " + std::to_string(x.size()) + " does not match model width " +
                                      std::to_string(width));
  }
}

// Depth-limited least-squares regression tree on one residual column.
class TreeBuilder {
 public:
  TreeBuilder(const LabeledData& data, const std::vector<std::vector<std::size_t>>& sorted, int max_depth,
              bool newton, std::size_t classes, std::size_t min_leaf)
      : data_(data), sorted_(sorted), max_depth_(max_depth), newton_(newton), classes_(classes),
        min_leaf_(std::max<std::size_t>(min_leaf, 1)), node_of_(data.size()) {}

  // rows: the sample used to grow this tree (sorted ascending). The splits
  // come from the sample; leaf values are then refit on every row, so each
  // round is a full-data step on a fixed partition and the loss cannot rise.
  RegressionTree fit(const std::vector<double>& residual, const std::vector<std::size_t>& rows) {
    residual_ = &residual;
    std::fill(node_of_.begin(), node_of_.end(), -1);
    tree_ = RegressionTree{};
    grow(rows, 0);
    if (rows.size() < data_.size()) refit_leaves();
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(const std::vector<std::size_t>& members, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    double sum = 0.0, hess = 0.0;
    for (std::size_t i : members) {
      const double r = (*residual_)[i];
      sum += r;
      hess += std::abs(r) * (1.0 - std::abs(r));
      node_of_[i] = id;
    }
    tree_.nodes[id].value = leaf_value(sum, hess, members.size());
    if (depth >= max_depth_ || members.size() < 2) return id;
    const Split s = best_split(id, members.size(), sum);
    if (s.feature < 0) return id;
    std::vector<std::size_t> left, right;
    for (std::size_t i : members) {
      (data_.features[i][s.feature] <= s.threshold ? left : right).push_back(i);
    }
    tree_.nodes[id].feature = s.feature;
    tree_.nodes[id].threshold = s.threshold;
    const int l = grow(left, depth + 1);
    tree_.nodes[id].left = l;
    const int r = grow(right, depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  double leaf_value(double sum, double hess, std::size_t count) const {
    if (newton_) {
      const double k = static_cast<double>(classes_);
      return hess < 1e-150 ? 0.0 : (k - 1.0) / k * sum / hess;
    }
    return sum / static_cast<double>(count);
  }

  void refit_leaves() {
    const std::size_t nodes = tree_.nodes.size();
    std::vector<double> sum(nodes, 0.0), hess(nodes, 0.0);
    std::vector<std::size_t> count(nodes, 0);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      int id = 0;
      while (tree_.nodes[id].feature >= 0) {
        const auto& n = tree_.nodes[id];
        id = data_.features[i][n.feature] <= n.threshold ? n.left : n.right;
      }
      const double r = (*residual_)[i];
      sum[id] += r;
      hess[id] += std::abs(r) * (1.0 - std::abs(r));
      ++count[id];
    }
    for (std::size_t id = 0; id < nodes; ++id) {
      if (tree_.nodes[id].feature < 0 && count[id] > 0) tree_.nodes[id].value = leaf_value(sum[id], hess[id], count[id]);
    }
  }

  // Exact scan over sorted unique values. A candidate must beat the best by
  // more than rounding error, so the first (lowest feature, lowest threshold)
  // wins among gains that are equal in exact arithmetic.
  Split best_split(int node, std::size_t count, double total) const {
    Split best;
    best.gain = 1e-12;  // below this a split only reshuffles rounding error
    const double n = static_cast<double>(count);
    const double parent = total * total / n;
    for (std::size_t f = 0; f < sorted_.size(); ++f) {
      double left_sum = 0.0;
      std::size_t left_n = 0;
      double prev = 0.0;
      bool have_prev = false;
      for (std::size_t i : sorted_[f]) {
        if (node_of_[i] != node) continue;
        const double x = data_.features[i][f];
        if (have_prev && x > prev && left_n >= min_leaf_ && count - left_n >= min_leaf_) {
          const double nl = static_cast<double>(left_n), nr = n - nl;
          const double right_sum = total - left_sum;
          const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
          if (gain > best.gain + 1e-9 * best.gain) {
            double t = prev + (x - prev) / 2.0;
            if (!(t < x)) t = prev;
            best = {static_cast<int>(f), t, gain};
          }
        }
        left_sum += (*residual_)[i];
        ++left_n;
        prev = x;
        have_prev = true;
      }
    }
    return best;
  }

  const LabeledData& data_;
  const std::vector<std::vector<std::size_t>>& sorted_;
  int max_depth_;
  bool newton_;
  std::size_t classes_;
  std::size_t min_leaf_;
  std::vector<int> node_of_;
  const std::vector<double>* residual_ = nullptr;
  RegressionTree tree_;
};

// -log softmax(scores)[y] via log-sum-exp, so tiny losses stay exact.
double mean_cross_entropy(const std::vector<std::vector<double>>& scores, const std::vector<int>& labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& s = scores[i];
    const double top = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double v : s) sum += std::exp(v - top);
    loss += top + std::log(sum) - s[labels[i]];
  }
  return loss / static_cast<double>(labels.size());
}

nlohmann::ordered_json tree_to_json(const RegressionTree& tree, int node) {
  const auto& n = tree.nodes.at(node);
  nlohmann::ordered_json j;
  if (n.feature < 0) {
    j["leaf"] = n.value;
    return j;
  }
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["left"] = tree_to_json(tree, n.left);
  j["right"] = tree_to_json(tree, n.right);
  return j;
}

int tree_from_json(const nlohmann::json& j, RegressionTree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({});
  if (j.contains("leaf")) {
    tree.nodes[id].value = j.at("leaf").get<double>();
    return id;
  }
  tree.nodes[id].feature = j.at("feature").get<int>();
  tree.nodes[id].threshold = j.at("threshold").get<double>();
  const int l = tree_from_json(j.at("left"), tree);
  tree.nodes[id].left = l;
  const int r = tree_from_json(j.at("right"), tree);
  tree.nodes[id].right = r;
  return id;
}

void validate_labels(const LabeledData& data) {
  if (data.features.size() != data.labels.size()) throw Error(ErrorCode::Shape, "features and labels differ in length");
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= data.class_count()) throw Error(ErrorCode::Label, "label id out of range");
  }
}

}  // namespace

LabeledData LabeledData::subset(std::span<const std::size_t> rows) const {
  LabeledData out;
  out.class_labels = class_labels;
  out.features.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.features.push_back(features.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

double LogisticModel::probability(double x) const { return sigmoid(weight * x + bias); }

LogisticModel train_logistic(std::span<const double> x, std::span<const int> labels, const LogisticConfig& config) {
  if (x.size() != labels.size()) throw Error(ErrorCode::Shape, "feature and label counts differ");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  const auto negatives = std::count(labels.begin(), labels.end(), 0);
  if (positives + negatives != static_cast<std::ptrdiff_t>(labels.size())) {
    throw Error(ErrorCode::Label, "logistic labels must be 0 or 1");
  }
  if (positives == 0 || negatives == 0) throw Error(ErrorCode::DegenerateData, "logistic training needs both classes");

  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  const double inv_sd = sd > 0.0 ? 1.0 / sd : 0.0;

  double w = 0.0, b = 0.0;
  LogisticModel model;
  for (model.iterations = 0; model.iterations < config.max_iter; ++model.iterations) {
    double gw = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = (x[i] - mean) * inv_sd;
      const double err = sigmoid(w * z + b) - labels[i];
      gw += err * z;
      gb += err;
    }
    gw /= n;
    gb /= n;
    if (std::max(std::abs(gw), std::abs(gb)) < config.tol) break;
    w -= config.learning_rate * gw;
    b -= config.learning_rate * gb;
  }
  model.weight = w * inv_sd;
  model.bias = b - w * mean * inv_sd;
  return model;
}

LogisticModel train_logistic(const LabeledData& data, int feature_index, const LogisticConfig& config) {
  validate_labels(data);
  if (data.class_count() != 2) throw Error(ErrorCode::DegenerateData, "logistic probe needs exactly 2 classes");
  if (feature_index < 1 || static_cast<std::size_t>(feature_index) > data.width()) {
    throw Error(ErrorCode::Bounds, "logistic feature index out of range");
  }
  std::vector<double> x;
  x.reserve(data.size());
  for (const auto& row : data.features) x.push_back(row[feature_index - 1]);
  auto model = train_logistic(x, data.labels, config);
  model.feature_index = feature_index;
  model.class_labels = {data.class_labels[0], data.class_labels[1]};
  return model;
}

double RegressionTree::predict(std::span<const double> x) const {
  int id = 0;
  while (nodes[id].feature >= 0) id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  return nodes[id].value;
}

int RegressionTree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return deepest;
}

std::vector<double> BoostedEnsemble::raw_scores(std::span<const double> x) const {
  std::vector<double> scores = initial_scores;
  const std::size_t k = class_labels.size();
  for (std::size_t t = 0; t < trees.size(); ++t) scores[t % k] += learning_rate * trees[t].predict(x);
  return scores;
}

BoostedEnsemble train_boosted(const LabeledData& data, const BoostConfig& config) {
  validate_labels(data);
  if (data.size() == 0) throw Error(ErrorCode::Data, "no training rows");
  if (config.feature_width != 0 && data.width() != config.feature_width) {
    throw Error(ErrorCode::Shape, "expected feature width " + std::to_string(config.feature_width) + ", got " +
                                      std::to_string(data.width()));
  }
  for (const auto& row : data.features) {
    if (row.size() != data.width()) throw Error(ErrorCode::Shape, "ragged feature rows");
  }
  if (config.n_estimators < 1 || config.max_depth < 1 || !(config.learning_rate > 0.0) ||
      !(config.subsample > 0.0 && config.subsample <= 1.0)) {
    throw Error(ErrorCode::Spec, "boosting needs n_estimators >= 1, max_depth >= 1, learning_rate > 0, "
                                 "0 < subsample <= 1");
  }
  const std::size_t k = data.class_count();
  std::vector<double> counts(k, 0.0);
  for (int y : data.labels) counts[y] += 1.0;
  if (k < 2) throw Error(ErrorCode::DegenerateData, "boosting needs at least 2 classes");
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0.0) {
      throw Error(ErrorCode::DegenerateData, "class '" + data.class_labels[c] + "' has no training rows");
    }
  }

  BoostedEnsemble model;
  model.class_labels = data.class_labels;
  model.n_features = data.width();
  model.n_estimators = config.n_estimators;
  model.learning_rate = config.learning_rate;
  model.max_depth = config.max_depth;
  const double n = static_cast<double>(data.size());
  for (double c : counts) model.initial_scores.push_back(std::log(c / n));

  std::vector<std::vector<std::size_t>> sorted(data.width());
  for (std::size_t f = 0; f < data.width(); ++f) {
    auto& order = sorted[f];
    order.resize(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.features[a][f] < data.features[b][f]; });
  }

  std::vector<std::vector<double>> scores(data.size(), model.initial_scores);
  std::vector<std::vector<double>> probs(data.size());
  auto refresh = [&] {
    for (std::size_t i = 0; i < data.size(); ++i) {
      probs[i] = scores[i];
      softmax_inplace(probs[i]);
    }
    model.loss_history.push_back(mean_cross_entropy(scores, data.labels));
  };
  refresh();

  TreeBuilder builder(data, sorted, config.max_depth, config.newton_leaves, k, config.min_samples_leaf);
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const bool sampling = config.subsample < 1.0;
  const std::size_t draw = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(config.subsample * static_cast<double>(data.size()))));
  Rng rng(config.seed);
  std::vector<double> residual(data.size());
  model.trees.reserve(static_cast<std::size_t>(config.n_estimators) * k);
  for (int round = 0; round < config.n_estimators; ++round) {
    const std::size_t first = model.trees.size();
    if (sampling) {
      rows = rng.permutation(data.size());
      rows.resize(std::min(draw, data.size()));
      std::sort(rows.begin(), rows.end());
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] == static_cast<int>(c)) {
          // 1 - p without the cancellation once p is close to 1
          double rest = 0.0;
          for (std::size_t j = 0; j < k; ++j) {
            if (j != c) rest += probs[i][j];
          }
          residual[i] = rest;
        } else {
          residual[i] = -probs[i][c];
        }
      }
      model.trees.push_back(builder.fit(residual, rows));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        scores[i][c] += config.learning_rate * model.trees[first + c].predict(data.features[i]);
      }
    }
    refresh();
  }
  return model;
}

Prediction predict(const BoostedEnsemble& model, std::span<const double> features) {
  require_width(features, model.n_features);
  Prediction p;
  p.probabilities = model.raw_scores(features);
  softmax_inplace(p.probabilities);
  p.label = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) - p.probabilities.begin());
  return p;
}

Prediction predict(const LogisticModel& model, std::span<const double> features) {
  if (model.feature_index < 1 || static_cast<std::size_t>(model.feature_index) > features.size()) {
    throw Error(ErrorCode::Shape, "feature row too narrow for logistic feature index");
  }
  const double positive = model.probability(features[model.feature_index - 1]);
  Prediction p;
  p.probabilities = {1.0 - positive, positive};
  p.label = positive > 0.5 ? 1 : 0;
  return p;
}

Prediction predict(const Model& model, std::span<const double> features) {
  return std::visit([&](const auto& m) { return predict(m, features); }, model);
}

std::vector<std::string> model_class_labels(const Model& model) {
  if (const auto* l = std::get_if<LogisticModel>(&model)) return {l->class_labels[0], l->class_labels[1]};
  return std::get<BoostedEnsemble>(model).class_labels;
}

nlohmann::ordered_json model_to_json(const Model& model) {
  nlohmann::ordered_json j;
  j["format"] = "ctfdct-model";
  j["version"] = kModelVersion;
  if (const auto* l = std::get_if<LogisticModel>(&model)) {
    j["kind"] = "logistic";
    j["class_labels"] = l->class_labels;
    j["feature_index"] = l->feature_index;
    j["weight"] = l->weight;
    j["bias"] = l->bias;
    j["iterations"] = l->iterations;
    return j;
  }
  const auto& b = std::get<BoostedEnsemble>(model);
  j["kind"] = "boosted";
  j["class_labels"] = b.class_labels;
  j["n_features"] = b.n_features;
  j["n_estimators"] = b.n_estimators;
  j["learning_rate"] = b.learning_rate;
  j["max_depth"] = b.max_depth;
  j["initial_scores"] = b.initial_scores;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : b.trees) trees.push_back(tree_to_json(t, 0));
  j["trees"] = std::move(trees);
  j["loss_history"] = b.loss_history;
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "ctfdct-model") throw Error(ErrorCode::Format, "not a ctfdct model file");
    if (j.at("version").get<int>() != kModelVersion) throw Error(ErrorCode::Format, "unsupported model version");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "logistic") {
      LogisticModel m;
      m.class_labels = j.at("class_labels").get<std::array<std::string, 2>>();
      m.feature_index = j.at("feature_index").get<int>();
      m.weight = j.at("weight").get<double>();
      m.bias = j.at("bias").get<double>();
      m.iterations = j.value("iterations", 0);
      return m;
    }
    if (kind != "boosted") throw Error(ErrorCode::Format, "unknown model kind: " + kind);
    BoostedEnsemble m;
    m.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.n_estimators = j.at("n_estimators").get<int>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.max_depth = j.at("max_depth").get<int>();
    m.initial_scores = j.at("initial_scores").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      tree_from_json(t, tree);
      m.trees.push_back(std::move(tree));
    }
    m.loss_history = j.value("loss_history", std::vector<double>{});
    if (m.initial_scores.size() != m.class_labels.size() || m.trees.size() % m.class_labels.size() != 0) {
      throw Error(ErrorCode::Format, "inconsistent boosted model");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("model json: ") + e.what());
  }
}

}  // namespace ctfdct
