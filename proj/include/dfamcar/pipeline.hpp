#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfamcar/classifiers.hpp"
#include "dfamcar/dfam.hpp"
#include "dfamcar/eval.hpp"
#include "dfamcar/synth.hpp"

namespace dfamcar {

/// Signal-processing configuration shared by training and classification.
struct PipelineConfig {
  std::size_t window_size = 128;
  double sample_rate_hz = kDefaultSampleRateHz;
  double cutoff_hz = kDefaultCutoffHz;
  std::vector<Device> devices = {Device::phone, Device::watch};
  std::vector<Sensor> sensors = {Sensor::accelerometer, Sensor::gyroscope};
  int g = 3;
  std::vector<double> boundaries;  // empty = equal-width bins

  /// Selected channels in canonical (device, sensor, axis) order.
  std::vector<Channel> channels() const;
  BinLayout layout() const;
  void validate(bool allow_any_window_size = false) const;
};

/// Filters each channel of a recording, then cuts aligned windows. Result
/// is indexed [window][channel]; windows that do not fit on every channel
/// are dropped.
std::vector<std::vector<std::vector<double>>> window_sets(const Recording& rec, const std::vector<Channel>& channels,
                                                          std::size_t window_size, double cutoff_hz);

/// Which classifier a run uses. Text forms: dfam, nb, knn<k>, dt, rf, svm.
struct ModelSpec {
  bool dfam = true;
  ModelKind kind = ModelKind::knn;
  std::size_t knn_k = 3;

  static ModelSpec parse(std::string_view text);
  bool operator==(const ModelSpec&) const = default;
  std::string name() const;
};

/// Windowed instances of a corpus under one pipeline configuration.
struct InstanceTable {
  std::vector<std::string> labels;  // canonical activity order
  std::vector<InstanceMeta> meta;
  std::vector<std::size_t> recording;  // corpus recording index per instance
  std::vector<std::vector<std::vector<double>>> windows;  // [instance][channel]
};

/// Groups consecutive windows of a recording into LOOCV blocks of
/// `block_size` windows (0 = one block per recording).
InstanceTable build_instances(const Corpus& corpus, const PipelineConfig& config, std::size_t block_size = 0,
                              const std::vector<Placement>& placements = {});

std::vector<Signature> instance_signatures(const InstanceTable& table, const BinLayout& layout);
FeatureDataset instance_features(const InstanceTable& table, const PipelineConfig& config);

struct LearnerOptions {
  ClassifierParams params;
  std::uint64_t seed = kDefaultSeed;
};

FitPredict dfam_learner(const std::vector<Signature>& signatures, const InstanceTable& table, const BinLayout& layout,
                        std::size_t window_size, std::uint64_t seed);
FitPredict feature_learner(const FeatureDataset& features, ModelKind kind, const ClassifierParams& params);

enum class Protocol { loocv, kfold, loso };
Protocol parse_protocol(std::string_view s);
std::string_view to_string(Protocol p);

struct GridRequest {
  Protocol protocol = Protocol::kfold;
  std::size_t k = 10;
  std::size_t block_size = 0;
  std::vector<std::size_t> window_sizes = {128};
  std::vector<int> gs = {3};
  std::vector<ModelSpec> models = {ModelSpec{}};
  PipelineConfig base;  // window_size and g are overridden per cell
  std::vector<Placement> placements;  // empty = all
  ClassifierParams params;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
};

struct GridCell {
  Protocol protocol = Protocol::kfold;
  std::string model;
  std::size_t window_size = 0;
  std::optional<int> g;  // DFAM cells only
  std::string sensors;
  ProtocolResult result;
};

/// Evaluates every (W, g, model) cell. Cells come back ordered by
/// (W, model position, g) regardless of worker scheduling.
std::vector<GridCell> evaluate_grid(const Corpus& corpus, const GridRequest& request);

inline constexpr const char* kGridCsvHeader =
    "protocol,model,W,g,sensors,total,accuracy,weighted_precision,weighted_recall,weighted_f1,"
    "micro_precision,micro_recall,micro_f1,macro_precision,macro_recall,macro_f1,mean_round_accuracy";
std::string grid_csv_row(const GridCell& cell);
std::string grid_json(const std::vector<GridCell>& cells);

/// Either kind of trained model plus the label list it predicts over.
struct TrainedModel {
  std::optional<DfamModel> dfam;
  std::optional<FeatureModel> features;

  const std::vector<std::string>& labels() const;
  /// Predicted label name and a score (DFAM aggregate; 1 for baselines).
  std::pair<std::string, double> classify(const std::vector<std::vector<double>>& windows,
                                          const PipelineConfig& config) const;
  void save(std::ostream& out) const;
  static TrainedModel load(std::istream& in);
};

/// Training targets: the full activity label, or the two binary tasks of
/// the hierarchical recogniser.
enum class TrainTask { full, moving, distracted };
TrainTask parse_train_task(std::string_view s);
inline constexpr const char* kMovingLabel = "moving";
inline constexpr const char* kStillLabel = "not_moving";
inline constexpr const char* kDistractedLabel = "distracted";
inline constexpr const char* kUndistractedLabel = "none";

TrainedModel train_model(const Corpus& corpus, const PipelineConfig& config, const ModelSpec& spec, TrainTask task,
                         const ClassifierParams& params, std::uint64_t seed,
                         const std::vector<Placement>& placements = {});

}  // namespace dfamcar
