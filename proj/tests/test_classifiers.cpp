#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctfdct/classifiers.hpp"
#include "ctfdct/evaluation.hpp"
#include "support.hpp"

using namespace ctfdct;
using testing::error_of;

namespace {

// 63-wide rows; only the listed columns carry signal, the rest is noise.
LabeledData blobs(std::size_t per_class, std::uint64_t seed, std::vector<std::pair<double, double>> centers,
                  double spread = 0.3) {
  Rng rng(seed);
  LabeledData d;
  for (std::size_t k = 0; k < centers.size(); ++k) d.class_labels.push_back("c" + std::to_string(k));
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t k = 0; k < centers.size(); ++k) {
      std::vector<double> row(63);
      for (auto& v : row) v = rng.uniform(0.0, 1.0);
      row[4] = centers[k].first + spread * rng.normal();
      row[40] = centers[k].second + spread * rng.normal();
      d.features.push_back(row);
      d.labels.push_back(static_cast<int>(k));
    }
  }
  return d;
}

LabeledData xor_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledData d;
  d.class_labels = {"even", "odd"};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(63);
    // Signal on two columns, the rest constant.
    row[0] = rng.uniform(-1.0, 1.0);
    row[1] = rng.uniform(-1.0, 1.0);
    // Keep a small margin around the axes.
    for (int j : {0, 1})
      if (std::abs(row[j]) < 0.05) row[j] = row[j] < 0 ? -0.05 : 0.05;
    d.features.push_back(row);
    d.labels.push_back((row[0] > 0) != (row[1] > 0) ? 1 : 0);
  }
  return d;
}

double accuracy(const Model& m, const LabeledData& d) { return evaluate(m, d).accuracy; }

// Brute force over single depth-2 trees with axis splits at 0 on features
// 0 and 1: the XOR labels are exactly representable.
bool xor_representable(const LabeledData& d) {
  for (int root : {0, 1}) {
    const int child = 1 - root;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const bool a = d.features[i][root] > 0, b = d.features[i][child] > 0;
      ok += ((a != b) ? 1 : 0) == d.labels[i];
    }
    if (ok == d.size()) return true;
  }
  return false;
}

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1] * (1.0 + 1e-12)) return false;
  return true;
}

}  // namespace

TEST_CASE("logistic probe on separable scalars") {
  Rng rng(1);
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    x.push_back(0.1 + rng.uniform(-0.01, 0.01));
    y.push_back(0);
    x.push_back(0.9 + rng.uniform(-0.01, 0.01));
    y.push_back(1);
  }
  const auto m = train_logistic(x, y);
  CHECK(std::isfinite(m.weight));
  CHECK(std::isfinite(m.bias));
  int correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += (m.probability(x[i]) > 0.5 ? 1 : 0) == y[i];
  CHECK(correct == 200);
  CHECK(m.iterations <= LogisticConfig{}.max_iter);
}

TEST_CASE("logistic probe without signal is at chance") {
  double total = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(100 + s);
    std::vector<double> xtr, xte;
    std::vector<int> ytr, yte;
    for (int i = 0; i < 400; ++i) {
      (i < 200 ? xtr : xte).push_back(rng.uniform(0.0, 1.0));
      (i < 200 ? ytr : yte).push_back(i % 2);
    }
    const auto m = train_logistic(xtr, ytr);
    int ok = 0;
    for (std::size_t i = 0; i < xte.size(); ++i) ok += (m.probability(xte[i]) > 0.5 ? 1 : 0) == yte[i];
    total += 100.0 * ok / xte.size();
  }
  CHECK(std::abs(total / seeds - 50.0) <= 5.0);
}

TEST_CASE("logistic decision is a threshold on the feature") {
  Rng rng(2);
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) {
    const int label = i % 2;
    x.push_back(rng.normal() + 1.5 * label);
    y.push_back(label);
  }
  const auto m = train_logistic(x, y);
  REQUIRE(m.weight > 0);
  const double cut = -m.bias / m.weight;
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-4.0, 6.0);
    CHECK((m.probability(v) >= 0.5) == (v >= cut - 1e-12));
  }
}

TEST_CASE("logistic error contracts") {
  std::vector<double> x = {1, 2, 3};
  std::vector<int> one = {1, 1, 1};
  CHECK(error_of([&] { train_logistic(x, one); }) == ErrorCode::DegenerateData);
  std::vector<int> bad = {0, 2, 1};
  CHECK(error_of([&] { train_logistic(x, bad); }) == ErrorCode::Label);
  std::vector<int> shorter = {0, 1};
  CHECK(error_of([&] { train_logistic(x, shorter); }) == ErrorCode::Shape);

  auto d = blobs(10, 3, {{0, 0}, {3, 3}});
  CHECK(error_of([&] { train_logistic(d, 64); }) == ErrorCode::Bounds);
  const auto m = train_logistic(d, 5);
  CHECK(m.feature_index == 5);
  CHECK(m.class_labels[1] == "c1");
  const auto three = blobs(10, 3, {{0, 0}, {3, 3}, {6, 6}});
  CHECK(error_of([&] { train_logistic(three, 5); }) == ErrorCode::DegenerateData);
}

TEST_CASE("boosting separates four blobs") {
  const auto train = blobs(40, 4, {{0, 0}, {4, 0}, {0, 4}, {4, 4}});
  const auto test = blobs(200, 5, {{0, 0}, {4, 0}, {0, 4}, {4, 4}});
  const auto m = train_boosted(train);
  CHECK(accuracy(m, test) >= 99.0);
  CHECK(m.trees.size() == 100 * 4);
  for (const auto& t : m.trees) CHECK(t.depth() <= 2);
  CHECK(m.learning_rate == 0.6);
  // Memorises a separable training set.
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(predict(m, train.features[i]).label == train.labels[i]);
}

TEST_CASE("boosting learns XOR") {
  const auto train = xor_data(200, 6);
  const auto test = xor_data(200, 7);
  CHECK(xor_representable(train));
  const auto m = train_boosted(train);
  CHECK(accuracy(m, test) >= 95.0);
}

TEST_CASE("training loss never increases") {
  std::vector<LabeledData> fixtures = {
      blobs(40, 8, {{0, 0}, {4, 0}, {0, 4}, {4, 4}}),
      blobs(60, 9, {{0, 0}, {0.5, 0.5}, {1, 0}}, 1.0),  // heavy overlap
      xor_data(200, 10),
  };
  // Label noise.
  auto noisy = blobs(50, 11, {{0, 0}, {2, 2}});
  Rng rng(12);
  for (auto& y : noisy.labels)
    if (rng.uniform() < 0.2) y = 1 - y;
  fixtures.push_back(noisy);

  for (const auto& d : fixtures) {
    for (double sub : {0.5, 1.0}) {
      BoostConfig cfg;
      cfg.subsample = sub;
      cfg.seed = 13;
      const auto m = train_boosted(d, cfg);
      CHECK(m.loss_history.size() == 101);
      CHECK(non_increasing(m.loss_history));
      CHECK(m.loss_history.back() < m.loss_history.front());
    }
  }
}

TEST_CASE("probabilities form a simplex and the label is their argmax") {
  const auto d = blobs(30, 14, {{0, 0}, {2, 0}, {0, 2}});
  const auto m = train_boosted(d);
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(63);
    for (auto& v : x) v = rng.uniform(-10.0, 10.0);
    const auto p = predict(m, x);
    double sum = 0.0;
    for (double q : p.probabilities) {
      CHECK(q >= 0.0);
      sum += q;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(p.label == std::max_element(p.probabilities.begin(), p.probabilities.end()) - p.probabilities.begin());
  }
  std::vector<double> narrow(10);
  CHECK(error_of([&] { predict(m, narrow); }) == ErrorCode::Shape);
}

TEST_CASE("permuting the class order permutes the probabilities") {
  const auto d = blobs(30, 16, {{0, 0}, {1.5, 0}, {0, 1.5}}, 0.6);
  const std::vector<int> perm = {2, 0, 1};  // old id -> new id
  LabeledData p = d;
  p.class_labels = {"c1", "c2", "c0"};
  for (auto& y : p.labels) y = perm[y];
  const auto ma = train_boosted(d), mb = train_boosted(p);
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(63);
    for (auto& v : x) v = rng.uniform(-1.0, 2.5);
    const auto pa = predict(ma, x), pb = predict(mb, x);
    auto sorted = pa.probabilities;
    std::sort(sorted.rbegin(), sorted.rend());
    // Exact argmax ties go to the lowest id, which the relabeling moves.
    if (sorted[0] - sorted[1] > 1e-9) CHECK(d.class_labels[pa.label] == p.class_labels[pb.label]);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(pa.probabilities[k] - pb.probabilities[perm[k]]) < 1e-9);
  }
}

TEST_CASE("boosting is deterministic and round-trips through JSON") {
  const auto d = blobs(30, 18, {{0, 0}, {1, 1}}, 0.7);
  BoostConfig cfg;
  cfg.seed = 99;
  const auto a = train_boosted(d, cfg), b = train_boosted(d, cfg);
  CHECK(model_to_json(a).dump() == model_to_json(b).dump());
  cfg.seed = 100;
  CHECK(model_to_json(train_boosted(d, cfg)).dump() != model_to_json(a).dump());

  const Model back = model_from_json(nlohmann::json::parse(model_to_json(a).dump()));
  for (const auto& row : d.features) CHECK(predict(back, row).probabilities == predict(a, row).probabilities);
  CHECK(model_class_labels(back) == d.class_labels);

  const auto lm = train_logistic(d, 5);
  const Model lback = model_from_json(nlohmann::json::parse(model_to_json(lm).dump()));
  CHECK(std::get<LogisticModel>(lback).weight == lm.weight);
  CHECK(std::get<LogisticModel>(lback).feature_index == 5);

  CHECK(error_of([] { model_from_json(nlohmann::json{{"format", "other"}}); }).has_value());
}

TEST_CASE("tree decisions do not care about feature scale") {
  const auto train = blobs(30, 19, {{0, 0}, {3, 0}, {0, 3}});
  const auto test = blobs(100, 20, {{0, 0}, {3, 0}, {0, 3}});
  auto rescale = [&](LabeledData d) {
    for (std::size_t j = 0; j < 63; ++j) {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto* set : {&train, &test})
        for (const auto& r : set->features) lo = std::min(lo, r[j]), hi = std::max(hi, r[j]);
      for (auto& r : d.features) r[j] = (r[j] - lo) / (hi - lo);
    }
    return d;
  };
  CHECK(accuracy(train_boosted(train), test) == accuracy(train_boosted(rescale(train)), rescale(test)));
}

TEST_CASE("boosting input contracts") {
  LabeledData narrow;
  narrow.class_labels = {"a", "b"};
  narrow.features = {{0.0, 1.0}, {1.0, 0.0}};
  narrow.labels = {0, 1};
  CHECK(error_of([&] { train_boosted(narrow); }) == ErrorCode::Shape);
  BoostConfig any;
  any.feature_width = 0;
  CHECK(error_of([&] { train_boosted(narrow, any); }).has_value() == false);

  auto single = blobs(10, 21, {{0, 0}});
  CHECK(error_of([&] { train_boosted(single); }) == ErrorCode::DegenerateData);
  auto d = blobs(10, 22, {{0, 0}, {2, 2}});
  BoostConfig bad;
  bad.subsample = 0.0;
  CHECK(error_of([&] { train_boosted(d, bad); }) == ErrorCode::Spec);
  d.labels[0] = 7;
  CHECK(error_of([&] { train_boosted(d); }) == ErrorCode::Label);
}
