#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dfamcar/pipeline.hpp"

namespace dfamcar {

enum class HState { S1, S2, S3 };
std::string_view to_string(HState s);

inline constexpr std::size_t kDefaultResetPeriod = 30;

struct HierarchicalState {
  HState state = HState::S1;
  std::size_t windows_since_reset = 0;
  std::size_t reset_period = kDefaultResetPeriod;
};

struct ContextFlags {
  bool smartphone_in_use = false;
};

enum class EventType { smartphone_distraction, distraction };
std::string_view to_string(EventType e);

struct DistractionEvent {
  std::size_t window_index = 0;
  HState state = HState::S1;
  EventType type = EventType::distraction;
  std::string label;
  double score = 0.0;
};

/// A binary model bound to one state, with the pipeline it was trained on.
/// `positive` is the label that advances the machine.
struct StageModel {
  const TrainedModel* model = nullptr;
  PipelineConfig config;
  std::string positive;
};

struct HierarchyModels {
  StageModel s1;  // moving vs not_moving
  StageModel s3;  // distracted vs none
};

struct InvocationCounts {
  std::size_t s1_calls = 0;
  std::size_t s3_calls = 0;
  std::size_t watch_windows_processed = 0;
  bool operator==(const InvocationCounts&) const = default;
};

/// All 12 channels of one window, indexed by Channel::canonical_index().
using WindowBundle = std::vector<std::vector<double>>;

/// Checks that both stage models exist and are binary with the expected
/// positive label.
void validate_models(const HierarchyModels& models);

/// Consumes one window. S1 classifies locomotion on its channels; S2 checks
/// the smartphone flag; S3 classifies distraction and stays in S3 until the
/// periodic reset. A smartphone flag seen in S3 also returns to S1.
std::optional<DistractionEvent> step(HierarchicalState& state, const WindowBundle& bundle, ContextFlags context,
                                     const HierarchyModels& models, std::size_t window_index,
                                     InvocationCounts& counts);

struct ReplayResult {
  std::vector<HState> trace;  // state in which each window was consumed
  std::vector<DistractionEvent> events;
  InvocationCounts counts;
};

ReplayResult replay(const Recording& recording, const std::vector<bool>& context, const HierarchyModels& models,
                    std::size_t window_size, double cutoff_hz, std::size_t reset_period = kDefaultResetPeriod);

std::string event_json(const DistractionEvent& e);
void write_event_log(std::ostream& out, const std::vector<DistractionEvent>& events);

inline constexpr const char* kContextCsvHeader = "window_index,smartphone_in_use";
std::vector<bool> read_context_csv(std::istream& in);
std::vector<bool> read_context_csv(const std::filesystem::path& path);
void write_context_csv(std::ostream& out, const std::vector<bool>& context);

}  // namespace dfamcar
