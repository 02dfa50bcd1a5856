#include "dfamcar/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "dfamcar/common.hpp"
#include "dfamcar/parallel.hpp"
#include "dfamcar/rng.hpp"
#include "json.hpp"

namespace dfamcar {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t n) {
  if (truth >= size() || predicted >= size()) throw ShapeError("confusion matrix label index out of range");
  counts_[truth * size() + predicted] += n;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.labels_ != labels_) throw ShapeError("cannot merge confusion matrices over different labels");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

namespace {
double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }
}  // namespace

EvaluationReport metrics(const ConfusionMatrix& confusion) {
  const std::size_t n = confusion.size();
  const std::size_t total = confusion.total();
  if (n == 0 || total == 0) throw EmptyResultError("metrics need a non-empty confusion matrix");

  EvaluationReport rep;
  rep.confusion = confusion;
  rep.per_class.resize(n);
  double tp_sum = 0.0, fp_sum = 0.0, fn_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += static_cast<double>(confusion.at(i, j));
      col += static_cast<double>(confusion.at(j, i));
    }
    const double tp = static_cast<double>(confusion.at(i, i));
    auto& m = rep.per_class[i];
    m.support = static_cast<std::size_t>(row);
    m.precision = ratio(tp, col);
    m.recall = ratio(tp, row);
    m.f1 = harmonic(m.precision, m.recall);
    tp_sum += tp;
    fp_sum += col - tp;
    fn_sum += row - tp;
  }
  const double t = static_cast<double>(total);
  rep.accuracy = tp_sum / t;
  for (const auto& m : rep.per_class) {
    const double w = static_cast<double>(m.support) / t;
    rep.weighted.precision += w * m.precision;
    rep.weighted.recall += w * m.recall;
    rep.weighted.f1 += w * m.f1;
    rep.macro.precision += m.precision / static_cast<double>(n);
    rep.macro.recall += m.recall / static_cast<double>(n);
    rep.macro.f1 += m.f1 / static_cast<double>(n);
  }
  rep.micro.precision = ratio(tp_sum, tp_sum + fp_sum);
  rep.micro.recall = ratio(tp_sum, tp_sum + fn_sum);
  rep.micro.f1 = harmonic(rep.micro.precision, rep.micro.recall);
  return rep;
}

namespace {

std::vector<std::size_t> canonical_order(std::span<const InstanceMeta> instances) {
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return instances[a].key < instances[b].key; });
  return order;
}

ProtocolResult run_groups(std::span<const InstanceMeta> instances, const std::vector<std::string>& labels,
                          const std::vector<std::size_t>& group_of, const FitPredict& fit_predict,
                          ProtocolOptions options) {
  for (const auto& m : instances) {
    if (m.label >= labels.size()) throw ShapeError("instance label out of range");
  }
  const auto order = canonical_order(instances);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (auto i : order) groups[group_of[i]].push_back(i);

  ProtocolResult result;
  result.tested_count.assign(instances.size(), 0);
  for (auto& [g, members] : groups) {
    result.round_group.push_back(g);
    result.round_test_sets.push_back(members);
  }

  const std::size_t rounds = result.round_test_sets.size();
  std::vector<ConfusionMatrix> round_cm(rounds, ConfusionMatrix(labels));
  parallel_for(rounds, options.threads, [&](std::size_t r) {
    const auto& test = result.round_test_sets[r];
    const std::size_t g = result.round_group[r];
    std::vector<std::size_t> train;
    train.reserve(instances.size() - test.size());
    for (auto i : order) {
      if (group_of[i] != g) train.push_back(i);
    }
    const auto predicted = fit_predict(train, test);
    if (predicted.size() != test.size()) throw ShapeError("learner returned the wrong number of predictions");
    for (std::size_t t = 0; t < test.size(); ++t) round_cm[r].add(instances[test[t]].label, predicted[t]);
  });

  ConfusionMatrix pooled(labels);
  for (std::size_t r = 0; r < rounds; ++r) {
    pooled.merge(round_cm[r]);
    for (auto i : result.round_test_sets[r]) ++result.tested_count[i];
    const auto rep = metrics(round_cm[r]);
    result.round_accuracy.push_back(rep.accuracy);
    result.round_reports.push_back(rep);
  }
  result.pooled = metrics(pooled);
  result.mean_round_accuracy =
      std::accumulate(result.round_accuracy.begin(), result.round_accuracy.end(), 0.0) / static_cast<double>(rounds);
  return result;
}

std::size_t distinct(std::span<const std::size_t> ids) {
  std::vector<std::size_t> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

ProtocolResult loocv_blocks(std::span<const InstanceMeta> instances, const std::vector<std::string>& labels,
                            const FitPredict& fit_predict, ProtocolOptions options) {
  std::vector<std::size_t> group(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) group[i] = instances[i].block;
  if (distinct(group) < 2) throw ConfigError("leave-one-block-out needs at least two blocks");
  return run_groups(instances, labels, group, fit_predict, options);
}

std::vector<std::size_t> kfold_assignment(std::span<const InstanceMeta> instances, std::size_t label_count,
                                          std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (instances.size() < k) throw ConfigError("k-fold needs at least k instances");
  const auto order = canonical_order(instances);
  std::vector<std::vector<std::size_t>> by_label(label_count);
  for (auto i : order) by_label.at(instances[i].label).push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> fold(instances.size(), 0);
  std::size_t dealt = 0;
  for (auto& members : by_label) {
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) fold[i] = dealt++ % k;
  }
  return fold;
}

ProtocolResult kfold(std::span<const InstanceMeta> instances, const std::vector<std::string>& labels,
                     const FitPredict& fit_predict, std::size_t k, std::uint64_t seed, ProtocolOptions options) {
  const auto fold = kfold_assignment(instances, labels.size(), k, seed);
  return run_groups(instances, labels, fold, fit_predict, options);
}

ProtocolResult loso(std::span<const InstanceMeta> instances, const std::vector<std::string>& labels,
                    const FitPredict& fit_predict, ProtocolOptions options) {
  std::vector<std::size_t> group(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) group[i] = instances[i].participant;
  if (distinct(group) < 2) throw ConfigError("leave-one-subject-out needs at least two participants");
  return run_groups(instances, labels, group, fit_predict, options);
}

std::string report_to_json(const EvaluationReport& report, int indent) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["accuracy"] = report.accuracy;
  j["total"] = report.confusion.total();
  auto avg = [](const AveragedMetrics& a) {
    return ordered_json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
  };
  j["weighted"] = avg(report.weighted);
  j["micro"] = avg(report.micro);
  j["macro"] = avg(report.macro);
  ordered_json classes = ordered_json::array();
  for (std::size_t i = 0; i < report.per_class.size(); ++i) {
    const auto& m = report.per_class[i];
    classes.push_back({{"label", report.confusion.labels()[i]},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support}});
  }
  j["per_class"] = classes;
  ordered_json cm = ordered_json::array();
  for (std::size_t r = 0; r < report.confusion.size(); ++r) {
    ordered_json row = ordered_json::array();
    for (std::size_t c = 0; c < report.confusion.size(); ++c) row.push_back(report.confusion.at(r, c));
    cm.push_back(row);
  }
  j["labels"] = report.confusion.labels();
  j["confusion"] = cm;
  return j.dump(indent);
}

}  // namespace dfamcar
