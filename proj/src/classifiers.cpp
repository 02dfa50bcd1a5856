#include "dfamcar/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "dfamcar/rng.hpp"
#include "dfamcar/text.hpp"

namespace dfamcar {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::naive_bayes: return "nb";
    case ModelKind::knn: return "knn";
    case ModelKind::decision_tree: return "dt";
    case ModelKind::random_forest: return "rf";
    case ModelKind::svm: return "svm";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "nb") return ModelKind::naive_bayes;
  if (s == "knn") return ModelKind::knn;
  if (s == "dt") return ModelKind::decision_tree;
  if (s == "rf") return ModelKind::random_forest;
  if (s == "svm") return ModelKind::svm;
  throw ConfigError("unknown classifier kind '" + std::string(s) + "'");
}

FeatureDataset FeatureDataset::subset(std::span<const std::size_t> indices) const {
  FeatureDataset out{schema, labels, {}, {}};
  out.rows.reserve(indices.size());
  out.targets.reserve(indices.size());
  for (auto i : indices) {
    out.rows.push_back(rows[i]);
    out.targets.push_back(targets[i]);
  }
  return out;
}

namespace {

void check_dataset(const FeatureDataset& data) {
  if (data.rows.empty()) throw TrainingError("empty training set");
  if (data.rows.size() != data.targets.size()) throw TrainingError("rows and targets differ in length");
  if (data.labels.empty()) throw TrainingError("no labels");
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    if (data.rows[i].values.size() != data.schema.size()) throw TrainingError("row width differs from schema");
    if (data.targets[i] >= data.labels.size()) throw TrainingError("target index out of range");
  }
}

std::vector<std::size_t> label_counts(const FeatureDataset& data, std::span<const std::size_t> rows) {
  std::vector<std::size_t> counts(data.labels.size(), 0);
  for (auto r : rows) ++counts[data.targets[r]];
  return counts;
}

std::size_t argmax_count(std::span<const std::size_t> counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::size_t argmax_value(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Standardizer Standardizer::fit(const FeatureDataset& data) {
  const std::size_t f = data.feature_count();
  Standardizer s;
  s.mean.assign(f, 0.0);
  s.scale.assign(f, 1.0);
  const double n = static_cast<double>(data.rows.size());
  for (const auto& r : data.rows) {
    for (std::size_t j = 0; j < f; ++j) s.mean[j] += r.values[j];
  }
  for (auto& m : s.mean) m /= n;
  std::vector<double> ss(f, 0.0);
  for (const auto& r : data.rows) {
    for (std::size_t j = 0; j < f; ++j) ss[j] += (r.values[j] - s.mean[j]) * (r.values[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < f; ++j) {
    const double sd = std::sqrt(ss[j] / n);
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / scale[j];
  return z;
}

// ---------------------------------------------------------------- model

FeatureModel::FeatureModel(FeatureSchema schema, std::vector<std::string> labels, State state)
    : schema_(std::move(schema)), schema_id_(schema_hash(schema_)), labels_(std::move(labels)), state_(std::move(state)) {}

ModelKind FeatureModel::kind() const { return static_cast<ModelKind>(state_.index()); }

void FeatureModel::check_schema(const FeatureVector& x) const {
  if (x.values.size() != schema_.size() || x.schema_id != schema_id_) {
    throw ShapeError("feature vector schema does not match the model schema");
  }
}

std::size_t DecisionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].label;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

std::vector<double> nb_log_joint(const NaiveBayes& nb, std::span<const double> x) {
  std::vector<double> out(nb.log_prior.size());
  for (std::size_t l = 0; l < out.size(); ++l) {
    double s = nb.log_prior[l];
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = nb.var[l][j];
      const double d = x[j] - nb.mu[l][j];
      s += -0.5 * std::log(2.0 * std::numbers::pi * v) - d * d / (2.0 * v);
    }
    out[l] = s;
  }
  return out;
}

std::size_t knn_predict(const Knn& m, std::span<const double> x, std::size_t label_count) {
  const auto z = m.standardizer.apply(x);
  struct Cand {
    double dist;
    std::size_t label;
    std::size_t index;
  };
  std::vector<Cand> cands(m.points.size());
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    double d = 0.0;
    const auto& p = m.points[i];
    for (std::size_t j = 0; j < z.size(); ++j) d += (z[j] - p[j]) * (z[j] - p[j]);
    cands[i] = {d, m.targets[i], i};
  }
  auto less = [](const Cand& a, const Cand& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.label != b.label) return a.label < b.label;
    return a.index < b.index;
  };
  const std::size_t k = std::min(m.k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(), less);
  std::vector<std::size_t> votes(label_count, 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[cands[i].label];
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  // Among tied labels the one holding the nearest neighbour wins.
  for (std::size_t i = 0; i < k; ++i) {
    if (votes[cands[i].label] == top) return cands[i].label;
  }
  return cands.front().label;
}

std::vector<double> svm_values(const LinearSvm& m, std::span<const double> x) {
  const auto z = m.standardizer.apply(x);
  std::vector<double> out(m.weights.size());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = dot(m.weights[l], z) + m.bias[l];
  return out;
}

std::size_t forest_vote(const RandomForest& f, std::span<const double> x, std::size_t label_count) {
  std::vector<std::size_t> votes(label_count, 0);
  for (const auto& t : f.trees) ++votes[t.predict(x)];
  return argmax_count(votes);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::size_t FeatureModel::predict(const FeatureVector& x) const {
  check_schema(x);
  const auto& v = x.values;
  return std::visit(Overloaded{
                        [&](const NaiveBayes& m) { return argmax_value(nb_log_joint(m, v)); },
                        [&](const Knn& m) { return knn_predict(m, v, labels_.size()); },
                        [&](const DecisionTree& m) { return m.predict(v); },
                        [&](const RandomForest& m) { return forest_vote(m, v, labels_.size()); },
                        [&](const LinearSvm& m) { return argmax_value(svm_values(m, v)); },
                    },
                    state_);
}

std::vector<double> FeatureModel::posterior(const FeatureVector& x) const {
  check_schema(x);
  const auto* nb = std::get_if<NaiveBayes>(&state_);
  if (!nb) throw ConfigError("posterior is only defined for naive Bayes");
  auto lj = nb_log_joint(*nb, x.values);
  const double top = *std::max_element(lj.begin(), lj.end());
  double total = 0.0;
  for (auto& v : lj) total += (v = std::exp(v - top));
  for (auto& v : lj) v /= total;
  return lj;
}

std::vector<double> FeatureModel::decision_values(const FeatureVector& x) const {
  check_schema(x);
  const auto* svm = std::get_if<LinearSvm>(&state_);
  if (!svm) throw ConfigError("decision values are only defined for the SVM");
  return svm_values(*svm, x.values);
}

// ---------------------------------------------------------------- training

FeatureModel train_nb(const FeatureDataset& data) {
  check_dataset(data);
  const std::size_t nl = data.labels.size();
  const std::size_t f = data.feature_count();
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const auto counts = label_counts(data, all);
  for (std::size_t l = 0; l < nl; ++l) {
    if (counts[l] == 0) throw TrainingError("label '" + data.labels[l] + "' has no training rows");
  }
  NaiveBayes nb;
  nb.log_prior.resize(nl);
  nb.mu.assign(nl, std::vector<double>(f, 0.0));
  nb.var.assign(nl, std::vector<double>(f, 0.0));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < f; ++j) nb.mu[data.targets[i]][j] += data.rows[i].values[j];
  }
  for (std::size_t l = 0; l < nl; ++l) {
    nb.log_prior[l] = std::log(static_cast<double>(counts[l]) / static_cast<double>(data.size()));
    for (auto& m : nb.mu[l]) m /= static_cast<double>(counts[l]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto t = data.targets[i];
    for (std::size_t j = 0; j < f; ++j) {
      const double d = data.rows[i].values[j] - nb.mu[t][j];
      nb.var[t][j] += d * d;
    }
  }
  for (std::size_t l = 0; l < nl; ++l) {
    for (auto& v : nb.var[l]) v = std::max(v / static_cast<double>(counts[l]), NaiveBayes::kVarianceFloor);
  }
  return FeatureModel(data.schema, data.labels, std::move(nb));
}

FeatureModel train_knn(const FeatureDataset& data, std::size_t k) {
  check_dataset(data);
  if (k < 1) throw ConfigError("k must be at least 1");
  if (k > data.size()) throw TrainingError("k exceeds the number of training rows");
  Knn m;
  m.k = k;
  m.standardizer = Standardizer::fit(data);
  m.points.reserve(data.size());
  for (const auto& r : data.rows) m.points.push_back(m.standardizer.apply(r.values));
  m.targets = data.targets;
  return FeatureModel(data.schema, data.labels, std::move(m));
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const FeatureDataset& data, const TreeParams& params)
      : data_(data), params_(params), rng_(params.seed) {}

  DecisionTree build(std::span<const std::size_t> rows) {
    std::vector<std::size_t> r(rows.begin(), rows.end());
    grow(r, 0);
    return std::move(tree_);
  }

 private:
  // Sum over labels of count^2 / n subtracted from n: n * gini.
  static double weighted_gini(std::span<const std::size_t> counts, double n) {
    if (n <= 0.0) return 0.0;
    double sq = 0.0;
    for (auto c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
    return n - sq / n;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t f = data_.feature_count();
    std::vector<std::size_t> feats(f);
    std::iota(feats.begin(), feats.end(), 0);
    if (params_.max_features == 0 || params_.max_features >= f) return feats;
    for (std::size_t i = 0; i < params_.max_features; ++i) {
      std::swap(feats[i], feats[i + rng_.index(f - i)]);
    }
    feats.resize(params_.max_features);
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    const auto counts = label_counts(data_, rows);
    tree_.nodes[static_cast<std::size_t>(id)].label = argmax_count(counts);

    const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= params_.max_depth || rows.size() < params_.min_leaf) return id;

    const double n = static_cast<double>(rows.size());
    const double parent = weighted_gini(counts, n);
    double best = parent;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::size_t> order(rows);
    std::vector<std::size_t> left(counts.size());
    std::vector<std::size_t> right(counts.size());
    for (auto f : candidate_features()) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = data_.rows[a].values[f];
        const double vb = data_.rows[b].values[f];
        return va != vb ? va < vb : a < b;
      });
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto t = data_.targets[order[i]];
        ++left[t];
        --right[t];
        const double a = data_.rows[order[i]].values[f];
        const double b = data_.rows[order[i + 1]].values[f];
        if (!(a < b)) continue;
        const double nl = static_cast<double>(i + 1);
        const double impurity = weighted_gini(left, nl) + weighted_gini(right, n - nl);
        if (impurity < best - 1e-12) {
          best = impurity;
          best_feature = static_cast<int>(f);
          const double mid = 0.5 * (a + b);
          best_threshold = (mid < b) ? mid : a;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) {
      (data_.rows[r].values[static_cast<std::size_t>(best_feature)] <= best_threshold ? lrows : rrows).push_back(r);
    }
    const int l = grow(lrows, depth + 1);
    const int r = grow(rrows, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const FeatureDataset& data_;
  TreeParams params_;
  Rng rng_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree grow_tree(const FeatureDataset& data, std::span<const std::size_t> rows, const TreeParams& params) {
  if (rows.empty()) throw TrainingError("empty training set");
  return TreeBuilder(data, params).build(rows);
}

FeatureModel train_dt(const FeatureDataset& data, int max_depth, std::size_t min_leaf) {
  check_dataset(data);
  if (max_depth < 0) throw ConfigError("max_depth must be non-negative");
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return FeatureModel(data.schema, data.labels, grow_tree(data, rows, TreeParams{max_depth, min_leaf, 0, 0}));
}

std::uint64_t forest_tree_seed(std::uint64_t seed, std::size_t tree) { return derive_seed(seed, tree); }

std::vector<std::size_t> forest_bootstrap(std::size_t rows, std::uint64_t seed, std::size_t tree) {
  Rng rng(derive_seed(forest_tree_seed(seed, tree), 0xb007));
  std::vector<std::size_t> out(rows);
  for (auto& r : out) r = rng.index(rows);
  return out;
}

FeatureModel train_rf(const FeatureDataset& data, std::size_t n_trees, int max_depth, std::uint64_t seed,
                      std::size_t min_leaf, bool bootstrap, std::size_t max_features) {
  check_dataset(data);
  if (n_trees < 1) throw ConfigError("a forest needs at least one tree");
  const std::size_t n = data.size();
  const std::size_t f = data.feature_count();
  const std::size_t mtry =
      max_features ? max_features : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(f))));

  RandomForest forest;
  std::vector<std::vector<std::size_t>> oob_votes(n, std::vector<std::size_t>(data.labels.size(), 0));
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t t = 0; t < n_trees; ++t) {
    const auto rows = bootstrap ? forest_bootstrap(n, seed, t) : all;
    forest.trees.push_back(grow_tree(data, rows, TreeParams{max_depth, min_leaf, mtry, forest_tree_seed(seed, t)}));
    if (!bootstrap) continue;
    std::vector<bool> in_bag(n, false);
    for (auto r : rows) in_bag[r] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_bag[i]) ++oob_votes[i][forest.trees.back().predict(data.rows[i].values)];
    }
  }
  std::size_t seen = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::all_of(oob_votes[i].begin(), oob_votes[i].end(), [](std::size_t v) { return v == 0; })) continue;
    ++seen;
    correct += argmax_count(oob_votes[i]) == data.targets[i] ? 1 : 0;
  }
  forest.oob_accuracy =
      seen ? static_cast<double>(correct) / static_cast<double>(seen) : std::numeric_limits<double>::quiet_NaN();
  return FeatureModel(data.schema, data.labels, std::move(forest));
}

FeatureModel train_svm(const FeatureDataset& data, double lambda, int epochs, std::uint64_t seed) {
  check_dataset(data);
  if (data.labels.size() < 2) throw TrainingError("SVM needs at least two labels");
  if (!(lambda > 0.0) || epochs < 1) throw ConfigError("SVM needs lambda > 0 and epochs >= 1");
  const std::size_t n = data.size();
  const std::size_t f = data.feature_count();

  LinearSvm m;
  m.standardizer = Standardizer::fit(data);
  std::vector<std::vector<double>> z;
  z.reserve(n);
  for (const auto& r : data.rows) z.push_back(m.standardizer.apply(r.values));

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> orders(static_cast<std::size_t>(epochs));
  for (auto& o : orders) {
    o.resize(n);
    std::iota(o.begin(), o.end(), 0);
    rng.shuffle(std::span<std::size_t>(o));
  }

  // Pegasos on the augmented vector [w, b] with projection onto the
  // 1/sqrt(lambda) ball.
  const double radius = 1.0 / std::sqrt(lambda);
  for (std::size_t c = 0; c < data.labels.size(); ++c) {
    std::vector<double> w(f + 1, 0.0);
    std::size_t t = 0;
    for (const auto& order : orders) {
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double y = data.targets[i] == c ? 1.0 : -1.0;
        const double margin = y * (dot(std::span<const double>(w).first(f), z[i]) + w[f]);
        for (auto& v : w) v *= 1.0 - eta * lambda;
        if (margin < 1.0) {
          for (std::size_t j = 0; j < f; ++j) w[j] += eta * y * z[i][j];
          w[f] += eta * y;
        }
        const double norm = std::sqrt(dot(w, w));
        if (norm > radius) {
          for (auto& v : w) v *= radius / norm;
        }
      }
    }
    m.bias.push_back(w[f]);
    w.pop_back();
    m.weights.push_back(std::move(w));
  }
  return FeatureModel(data.schema, data.labels, std::move(m));
}

FeatureModel train_feature_model(ModelKind kind, const FeatureDataset& data, const ClassifierParams& p) {
  switch (kind) {
    case ModelKind::naive_bayes: return train_nb(data);
    case ModelKind::knn: return train_knn(data, p.knn_k);
    case ModelKind::decision_tree: return train_dt(data, p.dt_max_depth, p.dt_min_leaf);
    case ModelKind::random_forest:
      return train_rf(data, p.rf_trees, p.rf_max_depth, p.seed, p.rf_min_leaf, p.rf_bootstrap, p.rf_max_features);
    case ModelKind::svm: return train_svm(data, p.svm_lambda, p.svm_epochs, p.seed);
  }
  throw ConfigError("unknown classifier kind");
}

// ---------------------------------------------------------------- persistence

namespace {

void write_row(std::ostream& out, std::string_view tag, std::span<const double> v) {
  out << tag;
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

void write_tree(std::ostream& out, const DecisionTree& t) {
  out << "nodes " << t.nodes.size() << '\n';
  for (const auto& n : t.nodes) {
    out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' ' << n.label << '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string_view> tokens(std::string_view expect_tag = {}) {
    std::string_view l = next();
    auto toks = split(l, ' ');
    if (!expect_tag.empty() && toks.front() != expect_tag) fail("expected '" + std::string(expect_tag) + "'");
    return toks;
  }
  std::string_view next() {
    if (!std::getline(in_, line_)) fail("unexpected end of model file");
    ++line_no_;
    strip_cr(line_);
    return line_;
  }
  double num(std::string_view s) {
    auto v = try_parse_double(s);
    if (!v) fail("invalid number '" + std::string(s) + "'");
    return *v;
  }
  long long integer(std::string_view s) {
    auto v = try_parse_int(s);
    if (!v) fail("invalid integer '" + std::string(s) + "'");
    return *v;
  }
  std::size_t count(std::string_view tag) {
    auto t = tokens(tag);
    if (t.size() != 2) fail("expected '" + std::string(tag) + " <n>'");
    const auto v = integer(t[1]);
    if (v < 0) fail("negative count");
    return static_cast<std::size_t>(v);
  }
  std::vector<double> row(std::string_view tag, std::size_t width) {
    auto t = tokens(tag);
    if (t.size() != width + 1) fail("expected " + std::to_string(width) + " values after '" + std::string(tag) + "'");
    std::vector<double> v(width);
    for (std::size_t i = 0; i < width; ++i) v[i] = num(t[i + 1]);
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_no_, what); }
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

DecisionTree read_tree(LineReader& r, std::size_t features, std::size_t labels) {
  DecisionTree t;
  const auto n = r.count("nodes");
  for (std::size_t i = 0; i < n; ++i) {
    auto tok = split(r.next(), ' ');
    if (tok.size() != 5) r.fail("expected 5 fields per tree node");
    TreeNode node;
    node.feature = static_cast<int>(r.integer(tok[0]));
    node.threshold = r.num(tok[1]);
    node.left = static_cast<int>(r.integer(tok[2]));
    node.right = static_cast<int>(r.integer(tok[3]));
    node.label = static_cast<std::size_t>(r.integer(tok[4]));
    const auto in_range = [n](int c) { return c >= 0 && static_cast<std::size_t>(c) < n; };
    if (node.feature >= static_cast<int>(features) || node.label >= labels ||
        (node.feature >= 0 && (!in_range(node.left) || !in_range(node.right) ||
                               node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i)))) {
      r.fail("corrupt tree node");
    }
    t.nodes.push_back(node);
  }
  if (t.nodes.empty()) r.fail("tree without nodes");
  return t;
}

}  // namespace

void FeatureModel::save(std::ostream& out) const {
  out << "MODEL v1 kind=" << to_string(kind()) << '\n';
  out << "labels " << labels_.size() << '\n';
  for (const auto& l : labels_) out << l << '\n';
  out << "schema " << schema_.size() << '\n';
  for (const auto& s : schema_) out << s << '\n';
  std::visit(Overloaded{
                 [&](const NaiveBayes& m) {
                   for (std::size_t l = 0; l < labels_.size(); ++l) {
                     out << "prior " << format_double(m.log_prior[l]) << '\n';
                     write_row(out, "mu", m.mu[l]);
                     write_row(out, "var", m.var[l]);
                   }
                 },
                 [&](const Knn& m) {
                   out << "k " << m.k << '\n';
                   write_row(out, "mean", m.standardizer.mean);
                   write_row(out, "scale", m.standardizer.scale);
                   out << "points " << m.points.size() << '\n';
                   for (std::size_t i = 0; i < m.points.size(); ++i) write_row(out, std::to_string(m.targets[i]), m.points[i]);
                 },
                 [&](const DecisionTree& m) { write_tree(out, m); },
                 [&](const RandomForest& m) {
                   out << "oob " << format_double(m.oob_accuracy) << '\n';
                   out << "trees " << m.trees.size() << '\n';
                   for (const auto& t : m.trees) write_tree(out, t);
                 },
                 [&](const LinearSvm& m) {
                   write_row(out, "mean", m.standardizer.mean);
                   write_row(out, "scale", m.standardizer.scale);
                   for (std::size_t l = 0; l < m.weights.size(); ++l) {
                     out << "bias " << format_double(m.bias[l]) << '\n';
                     write_row(out, "w", m.weights[l]);
                   }
                 },
             },
             state_);
}

FeatureModel FeatureModel::load(std::istream& in) {
  LineReader r(in);
  const auto head = r.tokens("MODEL");
  if (head.size() != 3 || head[1] != "v1" || head[2].substr(0, 5) != "kind=") r.fail("not a MODEL v1 file");
  ModelKind kind;
  try {
    kind = parse_model_kind(head[2].substr(5));
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  std::vector<std::string> labels(r.count("labels"));
  for (auto& l : labels) l = std::string(r.next());
  FeatureSchema schema(r.count("schema"));
  for (auto& s : schema) s = std::string(r.next());
  const std::size_t f = schema.size();
  const std::size_t nl = labels.size();

  State state;
  switch (kind) {
    case ModelKind::naive_bayes: {
      NaiveBayes m;
      for (std::size_t l = 0; l < nl; ++l) {
        m.log_prior.push_back(r.row("prior", 1)[0]);
        m.mu.push_back(r.row("mu", f));
        m.var.push_back(r.row("var", f));
      }
      state = std::move(m);
      break;
    }
    case ModelKind::knn: {
      Knn m;
      m.k = r.count("k");
      m.standardizer.mean = r.row("mean", f);
      m.standardizer.scale = r.row("scale", f);
      const auto n = r.count("points");
      for (std::size_t i = 0; i < n; ++i) {
        auto t = r.tokens();
        if (t.size() != f + 1) r.fail("point row has wrong width");
        const auto target = r.integer(t[0]);
        if (target < 0 || static_cast<std::size_t>(target) >= nl) r.fail("point label out of range");
        m.targets.push_back(static_cast<std::size_t>(target));
        std::vector<double> p(f);
        for (std::size_t j = 0; j < f; ++j) p[j] = r.num(t[j + 1]);
        m.points.push_back(std::move(p));
      }
      state = std::move(m);
      break;
    }
    case ModelKind::decision_tree: state = read_tree(r, f, nl); break;
    case ModelKind::random_forest: {
      RandomForest m;
      m.oob_accuracy = r.row("oob", 1)[0];
      const auto n = r.count("trees");
      for (std::size_t i = 0; i < n; ++i) m.trees.push_back(read_tree(r, f, nl));
      state = std::move(m);
      break;
    }
    case ModelKind::svm: {
      LinearSvm m;
      m.standardizer.mean = r.row("mean", f);
      m.standardizer.scale = r.row("scale", f);
      for (std::size_t l = 0; l < nl; ++l) {
        m.bias.push_back(r.row("bias", 1)[0]);
        m.weights.push_back(r.row("w", f));
      }
      state = std::move(m);
      break;
    }
  }
  return FeatureModel(std::move(schema), std::move(labels), std::move(state));
}

}  // namespace dfamcar
