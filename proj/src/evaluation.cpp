#include "ctfdct/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "ctfdct/error.hpp"
#include "ctfdct/rng.hpp"

namespace ctfdct {

namespace {

std::map<int, std::vector<std::size_t>> rows_by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  return by_class;
}

}  // namespace

EvalReport evaluate(std::span<const int> truth, std::span<const int> predicted,
                    const std::vector<std::string>& class_labels) {
  if (truth.empty()) throw Error(ErrorCode::Data, "empty test set");
  if (truth.size() != predicted.size()) throw Error(ErrorCode::Shape, "truth and prediction counts differ");
  const std::size_t k = class_labels.size();
  EvalReport r;
  r.samples = truth.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= static_cast<int>(k) || predicted[i] < 0 || predicted[i] >= static_cast<int>(k)) {
      throw Error(ErrorCode::Label, "label id out of range");
    }
    ++r.confusion[truth[i]][predicted[i]];
  }
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = r.confusion[c][c], row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += r.confusion[c][j];
      col += r.confusion[j][c];
    }
    correct += tp;
    ClassMetrics m;
    m.label = class_labels[c];
    m.support = row;
    m.precision = col ? 100.0 * static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row ? 100.0 * static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    r.classes.push_back(m);
  }
  r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
  return r;
}

EvalReport evaluate(const Model& model, const LabeledData& test) {
  if (test.size() == 0) throw Error(ErrorCode::Data, "empty test set");
  std::vector<int> predicted;
  predicted.reserve(test.size());
  for (const auto& row : test.features) predicted.push_back(predict(model, row).label);
  return evaluate(test.labels, predicted, test.class_labels);
}

Split stratified_split(std::span<const int> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error(ErrorCode::Usage, "train fraction must be in (0, 1)");
  Rng rng(seed);
  Split s;
  for (auto& [label, rows] : rows_by_class(labels)) {
    rng.shuffle(std::span<std::size_t>(rows));
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(rows.size())));
    n_train = std::max<std::size_t>(n_train, 1);
    if (rows.size() > 1) n_train = std::min(n_train, rows.size() - 1);
    s.train.insert(s.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::Usage, "cross-validation needs at least 2 folds");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  std::size_t next = 0;
  for (auto& [label, rows] : rows_by_class(labels)) {
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t r : rows) out[next++ % out.size()].push_back(r);
  }
  for (auto& f : out) {
    if (f.empty()) throw Error(ErrorCode::InsufficientData, "too few rows for the requested fold count");
    std::sort(f.begin(), f.end());
  }
  return out;
}

CrossValidationReport cross_validate(const LabeledData& data, const Trainer& trainer, int folds, std::uint64_t seed) {
  const auto parts = stratified_folds(data.labels, folds, seed);
  CrossValidationReport cv;
  for (std::size_t f = 0; f < parts.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < parts.size(); ++g) {
      if (g != f) train.insert(train.end(), parts[g].begin(), parts[g].end());
    }
    std::sort(train.begin(), train.end());
    const auto model = trainer(data.subset(train));
    auto report = evaluate(model, data.subset(parts[f]));
    cv.folds.push_back(std::move(report));
  }
  const double n = static_cast<double>(cv.folds.size());
  EvalReport& mean = cv.mean;
  mean.folds = static_cast<int>(cv.folds.size());
  mean.classes = cv.folds.front().classes;
  mean.confusion.assign(data.class_count(), std::vector<std::size_t>(data.class_count(), 0));
  for (auto& m : mean.classes) m = {m.label, 0.0, 0.0, 0.0, 0};
  for (const auto& r : cv.folds) {
    mean.accuracy += r.accuracy / n;
    mean.samples += r.samples;
    for (std::size_t c = 0; c < mean.classes.size(); ++c) {
      mean.classes[c].precision += r.classes[c].precision / n;
      mean.classes[c].recall += r.classes[c].recall / n;
      mean.classes[c].f1 += r.classes[c].f1 / n;
      mean.classes[c].support += r.classes[c].support;
      for (std::size_t j = 0; j < mean.classes.size(); ++j) mean.confusion[c][j] += r.confusion[c][j];
    }
  }
  double ss = 0.0;
  for (const auto& r : cv.folds) ss += (r.accuracy - mean.accuracy) * (r.accuracy - mean.accuracy);
  cv.accuracy_stddev = cv.folds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return cv;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["samples"] = report.samples;
  j["folds"] = report.folds;
  j["accuracy"] = report.accuracy;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : report.classes) {
    nlohmann::ordered_json m;
    m["label"] = c.label;
    m["precision"] = c.precision;
    m["recall"] = c.recall;
    m["f1"] = c.f1;
    m["support"] = c.support;
    classes.push_back(std::move(m));
  }
  j["classes"] = std::move(classes);
  j["confusion"] = report.confusion;
  return j;
}

nlohmann::ordered_json report_to_json(const CrossValidationReport& report) {
  nlohmann::ordered_json j;
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) folds.push_back(report_to_json(f));
  j["folds"] = std::move(folds);
  j["mean"] = report_to_json(report.mean);
  j["accuracy_stddev"] = report.accuracy_stddev;
  return j;
}

std::string report_table(const EvalReport& report) {
  std::size_t width = 5;
  for (const auto& c : report.classes) width = std::max(width, c.label.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %9s %9s %9s %9s\n", static_cast<int>(width), "class", "precision", "recall",
                "f1", "support");
  out += line;
  for (const auto& c : report.classes) {
    std::snprintf(line, sizeof line, "%-*s %9.2f %9.2f %9.2f %9zu\n", static_cast<int>(width), c.label.c_str(),
                  c.precision, c.recall, c.f1, c.support);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-*s %39.2f\n", static_cast<int>(width), "accuracy", report.accuracy);
  out += line;
  return out;
}

}  // namespace ctfdct
