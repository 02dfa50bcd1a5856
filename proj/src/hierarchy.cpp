#include "dfamcar/hierarchy.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "dfamcar/text.hpp"
#include "json.hpp"

namespace dfamcar {

std::string_view to_string(HState s) {
  switch (s) {
    case HState::S1: return "S1";
    case HState::S2: return "S2";
    case HState::S3: return "S3";
  }
  return "?";
}

std::string_view to_string(EventType e) {
  return e == EventType::smartphone_distraction ? "smartphone_distraction" : "distraction";
}

namespace {

void validate_stage(const StageModel& m, std::string_view name) {
  if (!m.model) throw ConfigError("missing model for state " + std::string(name));
  const auto& labels = m.model->labels();
  if (labels.size() != 2) {
    throw ConfigError("model for state " + std::string(name) + " must be binary, has " +
                      std::to_string(labels.size()) + " labels");
  }
  if (std::find(labels.begin(), labels.end(), m.positive) == labels.end()) {
    throw ConfigError("model for state " + std::string(name) + " lacks label '" + m.positive + "'");
  }
}

std::pair<std::string, double> run_stage(const StageModel& m, const WindowBundle& bundle) {
  std::vector<std::vector<double>> windows;
  for (const auto& c : m.config.channels()) windows.push_back(bundle.at(c.canonical_index()));
  return m.model->classify(windows, m.config);
}

bool uses_watch(const StageModel& m) {
  return std::find(m.config.devices.begin(), m.config.devices.end(), Device::watch) != m.config.devices.end();
}

}  // namespace

void validate_models(const HierarchyModels& models) {
  validate_stage(models.s1, "S1");
  validate_stage(models.s3, "S3");
}

std::optional<DistractionEvent> step(HierarchicalState& state, const WindowBundle& bundle, ContextFlags context,
                                     const HierarchyModels& models, std::size_t window_index,
                                     InvocationCounts& counts) {
  if (bundle.size() != static_cast<std::size_t>(kChannelCount)) {
    throw ShapeError("window bundle must hold all 12 channels");
  }
  if (state.reset_period == 0) throw ConfigError("reset period must be positive");
  std::optional<DistractionEvent> event;
  switch (state.state) {
    case HState::S1: {
      validate_stage(models.s1, "S1");
      ++counts.s1_calls;
      if (uses_watch(models.s1)) ++counts.watch_windows_processed;
      if (run_stage(models.s1, bundle).first == models.s1.positive) state.state = HState::S2;
      break;
    }
    case HState::S2:
      if (context.smartphone_in_use) {
        event = DistractionEvent{window_index, HState::S2, EventType::smartphone_distraction, "using_smartphone", 1.0};
        state.state = HState::S1;
      } else {
        state.state = HState::S3;
      }
      break;
    case HState::S3: {
      if (context.smartphone_in_use) {
        event = DistractionEvent{window_index, HState::S3, EventType::smartphone_distraction, "using_smartphone", 1.0};
        state.state = HState::S1;
        break;
      }
      validate_stage(models.s3, "S3");
      ++counts.s3_calls;
      if (uses_watch(models.s3)) ++counts.watch_windows_processed;
      auto [label, score] = run_stage(models.s3, bundle);
      if (label == models.s3.positive) {
        event = DistractionEvent{window_index, HState::S3, EventType::distraction, label, score};
      }
      break;
    }
  }
  if (++state.windows_since_reset >= state.reset_period) {
    state.state = HState::S1;
    state.windows_since_reset = 0;
  }
  return event;
}

ReplayResult replay(const Recording& recording, const std::vector<bool>& context, const HierarchyModels& models,
                    std::size_t window_size, double cutoff_hz, std::size_t reset_period) {
  validate_models(models);
  std::vector<Channel> all;
  for (int i = 0; i < kChannelCount; ++i) all.push_back(channel_from_index(i));
  const auto sets = window_sets(recording, all, window_size, cutoff_hz);
  if (context.size() != sets.size()) {
    throw AlignmentError("context has " + std::to_string(context.size()) + " rows but recording has " +
                         std::to_string(sets.size()) + " windows");
  }
  ReplayResult out;
  HierarchicalState state;
  state.reset_period = reset_period;
  for (std::size_t w = 0; w < sets.size(); ++w) {
    out.trace.push_back(state.state);
    if (auto e = step(state, sets[w], ContextFlags{context[w]}, models, w, out.counts)) out.events.push_back(*e);
  }
  return out;
}

std::string event_json(const DistractionEvent& e) {
  nlohmann::ordered_json j;
  j["window_index"] = e.window_index;
  j["state"] = to_string(e.state);
  j["event_type"] = to_string(e.type);
  j["label"] = e.label;
  j["score"] = e.score;
  return j.dump();
}

void write_event_log(std::ostream& out, const std::vector<DistractionEvent>& events) {
  for (const auto& e : events) out << event_json(e) << '\n';
}

std::vector<bool> read_context_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty context file");
  ++line_no;
  strip_cr(line);
  if (trim(line) != kContextCsvHeader) {
    throw ParseError(line_no, std::string("expected header '") + kContextCsvHeader + "'");
  }
  std::vector<bool> out;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields");
    const auto idx = try_parse_int(fields[0]);
    if (!idx || *idx != static_cast<long long>(out.size())) {
      throw ParseError(line_no, "window_index must count up from 0");
    }
    const auto flag = trim(fields[1]);
    if (flag == "1" || flag == "true") out.push_back(true);
    else if (flag == "0" || flag == "false") out.push_back(false);
    else throw ParseError(line_no, "smartphone_in_use must be 0 or 1");
  }
  return out;
}

std::vector<bool> read_context_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_context_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.line(), e.detail());
  }
}

void write_context_csv(std::ostream& out, const std::vector<bool>& context) {
  out << kContextCsvHeader << '\n';
  for (std::size_t i = 0; i < context.size(); ++i) out << i << ',' << (context[i] ? 1 : 0) << '\n';
}

}  // namespace dfamcar
