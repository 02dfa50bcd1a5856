#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dfamcar {

/// Rows are truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * size() + predicted]; }
  void add(std::size_t truth, std::size_t predicted, std::size_t n = 1);
  void merge(const ConfusionMatrix& other);
  std::size_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct AveragedMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvaluationReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  AveragedMetrics weighted;
  AveragedMetrics micro;
  AveragedMetrics macro;
};

/// Precision/recall/F1 per class and averaged three ways. A zero
/// denominator yields 0 for that class, and the class still counts toward
/// the macro mean.
EvaluationReport metrics(const ConfusionMatrix& confusion);

/// Grouping information for one evaluation instance.
struct InstanceMeta {
  std::size_t label = 0;
  std::size_t participant = 0;
  std::size_t block = 0;
  std::uint64_t key = 0;  // stable identity, e.g. (recording << 32) | window
};

/// Trains on `train` and returns one predicted label per `test` instance.
/// Both index lists refer to the evaluated instance table and are sorted by
/// instance key.
using FitPredict =
    std::function<std::vector<std::size_t>(std::span<const std::size_t> train, std::span<const std::size_t> test)>;

struct ProtocolResult {
  EvaluationReport pooled;
  std::vector<std::size_t> tested_count;                 // per instance
  std::vector<std::vector<std::size_t>> round_test_sets;  // instance indices
  std::vector<std::size_t> round_group;                  // block / fold / participant id
  std::vector<double> round_accuracy;
  double mean_round_accuracy = 0.0;
  std::vector<EvaluationReport> round_reports;
};

struct ProtocolOptions {
  std::size_t threads = 1;
};

/// Each block is the test set once; all others train.
ProtocolResult loocv_blocks(std::span<const InstanceMeta> instances, const std::vector<std::string>& labels,
                            const FitPredict& fit_predict, ProtocolOptions options = {});

/// Seeded, label-stratified k-fold cross validation.
ProtocolResult kfold(std::span<const InstanceMeta> instances, const std::vector<std::string>& labels,
                     const FitPredict& fit_predict, std::size_t k, std::uint64_t seed, ProtocolOptions options = {});
/// Fold id per instance as kfold assigns it.
std::vector<std::size_t> kfold_assignment(std::span<const InstanceMeta> instances, std::size_t label_count,
                                          std::size_t k, std::uint64_t seed);

/// Leave-one-subject-out; round_reports hold one report per participant.
ProtocolResult loso(std::span<const InstanceMeta> instances, const std::vector<std::string>& labels,
                    const FitPredict& fit_predict, ProtocolOptions options = {});

std::string report_to_json(const EvaluationReport& report, int indent = 2);

}  // namespace dfamcar
