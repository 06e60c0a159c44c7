#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctfdct/classifiers.hpp"

namespace ctfdct {

struct ClassMetrics {
  std::string label;
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double f1 = 0.0;         // percent
  std::size_t support = 0;
};

struct EvalReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;  // percent
  // confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t samples = 0;
  int folds = 1;
};

// Precision of a class never predicted is reported as 0.
EvalReport evaluate(std::span<const int> truth, std::span<const int> predicted,
                    const std::vector<std::string>& class_labels);
EvalReport evaluate(const Model& model, const LabeledData& test);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class, round(fraction * n_c) rows (at least 1, at most n_c - 1) go to
// train. Both index lists are ascending.
Split stratified_split(std::span<const int> labels, double train_fraction, std::uint64_t seed);

// Per class, shuffled rows are dealt round-robin into k folds.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

using Trainer = std::function<Model(const LabeledData&)>;

struct CrossValidationReport {
  std::vector<EvalReport> folds;
  EvalReport mean;             // per-class metrics and accuracy averaged over folds
  double accuracy_stddev = 0;  // sample standard deviation across folds, points
};

// Standard k-fold: train on k-1 folds, test on the held-out one.
CrossValidationReport cross_validate(const LabeledData& data, const Trainer& trainer, int folds, std::uint64_t seed);

nlohmann::ordered_json report_to_json(const EvalReport& report);
nlohmann::ordered_json report_to_json(const CrossValidationReport& report);
// Fixed-width table: class, precision, recall, F1, support, plus accuracy.
std::string report_table(const EvalReport& report);

}  // namespace ctfdct
