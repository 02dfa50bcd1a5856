#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "dfamcar/classifiers.hpp"
#include "oracles.hpp"

using namespace dfamcar;

namespace {

// Gaussian blobs with per-class centres.
FeatureDataset blobs(std::size_t n, std::size_t features, std::size_t classes, double spread, std::uint64_t seed) {
  FeatureDataset d;
  for (std::size_t j = 0; j < features; ++j) d.schema.push_back("f" + std::to_string(j));
  for (std::size_t l = 0; l < classes; ++l) d.labels.push_back("c" + std::to_string(l));
  const auto id = schema_hash(d.schema);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i % classes;
    FeatureVector v;
    v.schema_id = id;
    for (std::size_t j = 0; j < features; ++j) {
      v.values.push_back(static_cast<double>((l * 7 + j * 3) % 5) + spread * rng.normal() * (1.0 + 0.3 * j));
    }
    d.rows.push_back(v);
    d.targets.push_back(l);
  }
  return d;
}

std::size_t nb_oracle(const FeatureDataset& d, const std::vector<double>& x) {
  const std::size_t f = d.feature_count();
  long double best = -INFINITY;
  std::size_t arg = 0;
  for (std::size_t l = 0; l < d.labels.size(); ++l) {
    std::vector<long double> mu(f, 0), var(f, 0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.targets[i] != l) continue;
      ++n;
      for (std::size_t j = 0; j < f; ++j) mu[j] += d.rows[i].values[j];
    }
    for (auto& m : mu) m /= n;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.targets[i] != l) continue;
      for (std::size_t j = 0; j < f; ++j) var[j] += (d.rows[i].values[j] - mu[j]) * (d.rows[i].values[j] - mu[j]);
    }
    long double lp = std::log(static_cast<long double>(n) / d.size());
    for (std::size_t j = 0; j < f; ++j) {
      const long double v = std::max<long double>(var[j] / n, 1e-9L);
      lp += std::log(std::exp(-(x[j] - mu[j]) * (x[j] - mu[j]) / (2 * v)) / std::sqrt(2 * std::numbers::pi_v<long double> * v));
    }
    if (lp > best) {
      best = lp;
      arg = l;
    }
  }
  return arg;
}

std::size_t knn_oracle(const FeatureDataset& d, const std::vector<double>& x, std::size_t k) {
  const std::size_t f = d.feature_count();
  std::vector<double> mean(f, 0), sd(f, 0);
  for (const auto& r : d.rows) {
    for (std::size_t j = 0; j < f; ++j) mean[j] += r.values[j] / d.size();
  }
  for (const auto& r : d.rows) {
    for (std::size_t j = 0; j < f; ++j) sd[j] += (r.values[j] - mean[j]) * (r.values[j] - mean[j]);
  }
  for (auto& s : sd) s = std::sqrt(s / d.size());
  std::vector<std::tuple<double, std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double dist = 0;
    for (std::size_t j = 0; j < f; ++j) {
      const double s = sd[j] > 0 ? sd[j] : 1.0;
      const double a = (x[j] - mean[j]) / s, b = (d.rows[i].values[j] - mean[j]) / s;
      dist += (a - b) * (a - b);
    }
    all.emplace_back(dist, d.targets[i], i);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> votes(d.labels.size(), 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[std::get<1>(all[i])];
  const auto top = *std::max_element(votes.begin(), votes.end());
  for (std::size_t i = 0; i < k; ++i) {
    if (votes[std::get<1>(all[i])] == top) return std::get<1>(all[i]);
  }
  return 0;
}

FeatureVector vec(const FeatureDataset& d, std::vector<double> v) { return {std::move(v), schema_hash(d.schema)}; }

std::string saved(const FeatureModel& m) {
  std::ostringstream out;
  m.save(out);
  return out.str();
}

}  // namespace

TEST_CASE("naive bayes agrees with the direct gaussian formula") {
  const auto d = blobs(120, 4, 3, 1.0, 1);
  const auto m = train_nb(d);
  const auto q = blobs(200, 4, 3, 1.5, 2);
  for (const auto& r : q.rows) CHECK(m.predict(r) == nb_oracle(d, r.values));
  const auto p = m.posterior(q.rows[0]);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("naive bayes variance floor keeps constant features finite") {
  auto d = blobs(30, 3, 2, 0.5, 3);
  for (auto& r : d.rows) r.values[1] = 4.0;
  const auto m = train_nb(d);
  const auto& nb = std::get<NaiveBayes>(m.state());
  CHECK(nb.var[0][1] == NaiveBayes::kVarianceFloor);
  const auto p = m.posterior(vec(d, {0.0, 4.0, 1.0}));
  for (double v : p) CHECK(std::isfinite(v));
}

TEST_CASE("knn matches the brute-force oracle") {
  const auto d = blobs(90, 5, 3, 1.2, 4);
  const auto q = blobs(100, 5, 3, 1.5, 5);
  for (std::size_t k : {1u, 3u, 5u, 8u}) {
    const auto m = train_knn(d, k);
    for (const auto& r : q.rows) CHECK(m.predict(r) == knn_oracle(d, r.values, k));
  }
}

TEST_CASE("1-NN reproduces its training labels") {
  const auto d = blobs(80, 6, 4, 0.8, 6);
  const auto m = train_knn(d, 1);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(m.predict(d.rows[i]) == d.targets[i]);
}

TEST_CASE("knn vote ties go to the label with the nearest neighbour") {
  FeatureDataset d;
  d.schema = {"x"};
  d.labels = {"a", "b"};
  for (double x : {0.0, 10.0}) d.rows.push_back({{x}, schema_hash(d.schema)});
  d.targets = {0, 1};
  const auto m = train_knn(d, 2);
  CHECK(m.predict(vec(d, {9.0})) == 1);
  CHECK(m.predict(vec(d, {1.0})) == 0);
}

TEST_CASE("decision tree fits separable data and respects depth") {
  const auto d = blobs(150, 3, 3, 0.05, 7);
  const auto m = train_dt(d, 12, 1);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(m.predict(d.rows[i]) == d.targets[i]);
  const auto stump = train_dt(d, 1, 1);
  CHECK(std::get<DecisionTree>(stump.state()).depth() <= 1);
}

TEST_CASE("decision tree leaves are pure on distinct points") {
  FeatureDataset d;
  d.schema = {"x"};
  d.labels = {"a", "b"};
  for (int i = 0; i < 8; ++i) {
    d.rows.push_back({{static_cast<double>(i)}, schema_hash(d.schema)});
    d.targets.push_back(i < 3 ? 0 : 1);
  }
  const auto m = train_dt(d, 4, 1);
  const auto& t = std::get<DecisionTree>(m.state());
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == doctest::Approx(2.5));
  CHECK(m.predict(vec(d, {2.5})) == 0);
  CHECK(m.predict(vec(d, {2.6})) == 1);
}

TEST_CASE("random forest is seeded and reports out-of-bag accuracy") {
  const auto d = blobs(120, 4, 3, 0.6, 8);
  const auto a = train_rf(d, 15, 8, 42);
  const auto b = train_rf(d, 15, 8, 42);
  CHECK(saved(a) == saved(b));
  const auto& f = std::get<RandomForest>(a.state());
  CHECK(f.trees.size() == 15);
  CHECK(f.oob_accuracy > 0.8);
  CHECK(forest_bootstrap(50, 42, 3) == forest_bootstrap(50, 42, 3));
  CHECK(forest_bootstrap(50, 42, 3) != forest_bootstrap(50, 42, 4));
  CHECK(forest_bootstrap(50, 42, 3).size() == 50);
}

TEST_CASE("linear svm separates blobs") {
  const auto d = blobs(150, 4, 3, 0.3, 9);
  const auto m = train_svm(d, 1e-3, 40, 1);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += m.predict(d.rows[i]) == d.targets[i];
  CHECK(ok >= 140);
  CHECK(m.decision_values(d.rows[0]).size() == 3);
}

TEST_CASE("serialization round trips every kind exactly") {
  const auto d = blobs(60, 4, 3, 0.7, 10);
  const auto q = blobs(40, 4, 3, 1.0, 11);
  ClassifierParams p;
  p.rf_trees = 5;
  for (auto kind : {ModelKind::naive_bayes, ModelKind::knn, ModelKind::decision_tree, ModelKind::random_forest,
                    ModelKind::svm}) {
    const auto m = train_feature_model(kind, d, p);
    std::istringstream in(saved(m));
    const auto back = FeatureModel::load(in);
    CHECK(back.kind() == kind);
    CHECK(back.labels() == m.labels());
    CHECK(saved(back) == saved(m));
    for (const auto& r : q.rows) CHECK(back.predict(r) == m.predict(r));
  }
}

TEST_CASE("schema mismatch is a shape error") {
  const auto d = blobs(20, 3, 2, 1.0, 12);
  const auto m = train_nb(d);
  CHECK_THROWS_AS(m.predict(FeatureVector{{1.0, 2.0, 3.0}, 99}), ShapeError);
  CHECK_THROWS_AS(m.predict(FeatureVector{{1.0, 2.0}, schema_hash(d.schema)}), ShapeError);
  CHECK_THROWS_AS(m.decision_values(d.rows[0]), ConfigError);
}

TEST_CASE("training errors") {
  auto d = blobs(10, 2, 2, 1.0, 13);
  FeatureDataset empty = d.subset(std::vector<std::size_t>{});
  CHECK_THROWS_AS(train_nb(empty), TrainingError);
  CHECK_THROWS_AS(train_knn(d, 0), ConfigError);
  std::vector<std::size_t> only0 = {0, 2, 4};
  CHECK_THROWS_AS(train_nb(d.subset(only0)), TrainingError);
  std::istringstream bad("MODEL v1 kind=tree\n");
  CHECK_THROWS_AS(FeatureModel::load(bad), ParseError);
}
