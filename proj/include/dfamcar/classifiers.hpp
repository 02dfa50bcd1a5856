#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dfamcar/features.hpp"

namespace dfamcar {

enum class ModelKind { naive_bayes, knn, decision_tree, random_forest, svm };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

/// Labeled feature matrix shared by all baseline classifiers.
struct FeatureDataset {
  FeatureSchema schema;
  std::vector<std::string> labels;
  std::vector<FeatureVector> rows;
  std::vector<std::size_t> targets;  // index into labels, one per row

  std::size_t size() const { return rows.size(); }
  std::size_t feature_count() const { return schema.size(); }
  /// Copy restricted to the given row indices.
  FeatureDataset subset(std::span<const std::size_t> indices) const;
};

/// Per-feature z-score parameters; constant features get unit scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const FeatureDataset& data);
  std::vector<double> apply(std::span<const double> x) const;
};

struct NaiveBayes {
  static constexpr double kVarianceFloor = 1e-9;
  std::vector<double> log_prior;       // per label
  std::vector<std::vector<double>> mu;  // [label][feature]
  std::vector<std::vector<double>> var;
};

struct Knn {
  std::size_t k = 3;
  Standardizer standardizer;
  std::vector<std::vector<double>> points;  // standardized
  std::vector<std::size_t> targets;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::size_t label = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t predict(std::span<const double> x) const;
  int depth() const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  double oob_accuracy = 0.0;  // NaN when no row was ever out of bag
};

struct LinearSvm {
  Standardizer standardizer;
  std::vector<std::vector<double>> weights;  // [label][feature]
  std::vector<double> bias;
};

struct ClassifierParams {
  std::size_t knn_k = 3;
  int dt_max_depth = 12;
  std::size_t dt_min_leaf = 2;
  std::size_t rf_trees = 50;
  int rf_max_depth = 12;
  std::size_t rf_min_leaf = 2;
  std::size_t rf_max_features = 0;  // 0 = floor(sqrt(F))
  bool rf_bootstrap = true;
  double svm_lambda = 1e-3;
  int svm_epochs = 40;
  std::uint64_t seed = 7;
};

/// A trained baseline bound to the schema and label set it was trained on.
class FeatureModel {
 public:
  using State = std::variant<NaiveBayes, Knn, DecisionTree, RandomForest, LinearSvm>;

  FeatureModel(FeatureSchema schema, std::vector<std::string> labels, State state);

  ModelKind kind() const;
  const FeatureSchema& schema() const { return schema_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const State& state() const { return state_; }

  /// Throws ShapeError when the vector was produced under another schema.
  std::size_t predict(const FeatureVector& x) const;
  /// Normalised posterior, naive Bayes only.
  std::vector<double> posterior(const FeatureVector& x) const;
  /// One-vs-rest decision values, linear SVM only.
  std::vector<double> decision_values(const FeatureVector& x) const;

  void save(std::ostream& out) const;
  static FeatureModel load(std::istream& in);

 private:
  void check_schema(const FeatureVector& x) const;

  FeatureSchema schema_;
  std::uint64_t schema_id_ = 0;
  std::vector<std::string> labels_;
  State state_;
};

FeatureModel train_nb(const FeatureDataset& data);
FeatureModel train_knn(const FeatureDataset& data, std::size_t k);

struct TreeParams {
  int max_depth = 12;
  std::size_t min_leaf = 2;
  std::size_t max_features = 0;  // 0 = all features
  std::uint64_t seed = 7;        // drives feature subsampling only
};
FeatureModel train_dt(const FeatureDataset& data, int max_depth, std::size_t min_leaf);
DecisionTree grow_tree(const FeatureDataset& data, std::span<const std::size_t> rows, const TreeParams& params);

FeatureModel train_rf(const FeatureDataset& data, std::size_t n_trees, int max_depth, std::uint64_t seed,
                      std::size_t min_leaf = 2, bool bootstrap = true, std::size_t max_features = 0);
/// Bootstrap rows and tree seed used for tree `t` of a forest with `seed`.
std::vector<std::size_t> forest_bootstrap(std::size_t rows, std::uint64_t seed, std::size_t tree);
std::uint64_t forest_tree_seed(std::uint64_t seed, std::size_t tree);

FeatureModel train_svm(const FeatureDataset& data, double lambda, int epochs, std::uint64_t seed);

FeatureModel train_feature_model(ModelKind kind, const FeatureDataset& data, const ClassifierParams& params);

}  // namespace dfamcar
