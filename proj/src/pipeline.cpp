#include "dfamcar/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "dfamcar/parallel.hpp"
#include "dfamcar/text.hpp"
#include "json.hpp"

namespace dfamcar {

std::vector<Channel> PipelineConfig::channels() const {
  std::vector<Channel> out;
  for (int ci = 0; ci < kChannelCount; ++ci) {
    const Channel c = channel_from_index(ci);
    if (std::find(devices.begin(), devices.end(), c.device) == devices.end()) continue;
    if (std::find(sensors.begin(), sensors.end(), c.sensor) == sensors.end()) continue;
    out.push_back(c);
  }
  return out;
}

BinLayout PipelineConfig::layout() const {
  if (boundaries.empty()) return BinLayout::equal_width(g, sample_rate_hz);
  BinLayout l{g, boundaries, sample_rate_hz};
  l.validate();
  return l;
}

void PipelineConfig::validate(bool allow_any_window_size) const {
  static constexpr std::size_t kStudySizes[] = {32, 64, 128, 256, 512};
  if (!allow_any_window_size && std::find(std::begin(kStudySizes), std::end(kStudySizes), window_size) == std::end(kStudySizes)) {
    throw ConfigError("W must be one of 32, 64, 128, 256, 512");
  }
  if (!is_power_of_two(window_size) || window_size < 2) throw ConfigError("W must be a power of two");
  if (g < 1) throw ConfigError("g must be at least 1");
  if (sensors.empty()) throw ConfigError("sensor set must not be empty");
  if (devices.empty()) throw ConfigError("device set must not be empty");
  Biquad::butterworth_low_pass(cutoff_hz, sample_rate_hz);
  layout().index_ranges(window_size);
}

std::vector<std::vector<std::vector<double>>> window_sets(const Recording& rec, const std::vector<Channel>& channels,
                                                          std::size_t window_size, double cutoff_hz) {
  for (const auto& c : channels) {
    if (!rec.has(c)) throw AlignmentError("recording has no samples for channel " + c.name());
  }
  const std::size_t n = rec.common_length(channels);
  const std::size_t count = n / window_size;
  std::vector<std::vector<std::vector<double>>> sets(count, std::vector<std::vector<double>>(channels.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    TimeSeries ts = rec.series(channels[c]);
    ts.values.resize(n);
    const auto filtered = low_pass_filter(ts, cutoff_hz);
    if (count == 0) continue;
    auto windows = segment(filtered, window_size);
    for (std::size_t w = 0; w < count; ++w) sets[w][c] = std::move(windows[w].values);
  }
  return sets;
}

ModelSpec ModelSpec::parse(std::string_view text) {
  ModelSpec s;
  if (text == "dfam") return s;
  s.dfam = false;
  if (text.substr(0, 3) == "knn") {
    s.kind = ModelKind::knn;
    if (text.size() > 3) {
      const auto k = try_parse_int(text.substr(3));
      if (!k || *k < 1) throw ConfigError("invalid k-NN model '" + std::string(text) + "'");
      s.knn_k = static_cast<std::size_t>(*k);
    }
    return s;
  }
  s.kind = parse_model_kind(text);
  return s;
}

std::string ModelSpec::name() const {
  if (dfam) return "dfam";
  if (kind == ModelKind::knn) return "knn" + std::to_string(knn_k);
  return std::string(to_string(kind));
}

InstanceTable build_instances(const Corpus& corpus, const PipelineConfig& config, std::size_t block_size,
                              const std::vector<Placement>& placements) {
  const auto channels = config.channels();
  std::set<ActivityLabel> label_set;
  std::vector<std::size_t> selected;
  for (std::size_t r = 0; r < corpus.recordings.size(); ++r) {
    const auto& rec = corpus.recordings[r];
    if (!placements.empty() && std::find(placements.begin(), placements.end(), rec.placement) == placements.end()) {
      continue;
    }
    selected.push_back(r);
    label_set.insert(rec.label);
  }
  InstanceTable table;
  std::map<ActivityLabel, std::size_t> label_index;
  for (const auto& l : label_set) {
    label_index[l] = table.labels.size();
    table.labels.push_back(l.name());
  }

  std::size_t next_block = 0;
  for (auto r : selected) {
    const auto& rec = corpus.recordings[r];
    auto sets = window_sets(rec.recording, channels, config.window_size, config.cutoff_hz);
    std::size_t first_block = next_block;
    for (std::size_t w = 0; w < sets.size(); ++w) {
      InstanceMeta m;
      m.label = label_index.at(rec.label);
      m.participant = rec.participant;
      m.block = first_block + (block_size ? w / block_size : 0);
      m.key = (static_cast<std::uint64_t>(r) << 32) | w;
      next_block = std::max(next_block, m.block + 1);
      table.meta.push_back(m);
      table.recording.push_back(r);
      table.windows.push_back(std::move(sets[w]));
    }
  }
  if (table.meta.empty()) throw EmptyResultError("corpus yields no complete windows");
  return table;
}

std::vector<Signature> instance_signatures(const InstanceTable& table, const BinLayout& layout) {
  std::vector<Signature> out;
  out.reserve(table.windows.size());
  for (const auto& w : table.windows) out.push_back(signature_of(w, layout));
  return out;
}

FeatureDataset instance_features(const InstanceTable& table, const PipelineConfig& config) {
  const auto channels = config.channels();
  FeatureDataset d;
  d.schema = feature_schema(channels);
  d.labels = table.labels;
  d.rows.reserve(table.windows.size());
  for (std::size_t i = 0; i < table.windows.size(); ++i) {
    d.rows.push_back(extract_features(ChannelWindows{channels, table.windows[i]}, config.sample_rate_hz));
    d.targets.push_back(table.meta[i].label);
  }
  return d;
}

namespace {

// Labels present in the training rows, in global order, plus the map from
// global to local index.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> present_labels(std::span<const std::size_t> train,
                                                                         const std::vector<std::size_t>& target,
                                                                         std::size_t label_count) {
  std::vector<bool> seen(label_count, false);
  for (auto i : train) seen[target[i]] = true;
  std::vector<std::size_t> local_to_global, global_to_local(label_count, label_count);
  for (std::size_t l = 0; l < label_count; ++l) {
    if (!seen[l]) continue;
    global_to_local[l] = local_to_global.size();
    local_to_global.push_back(l);
  }
  return {local_to_global, global_to_local};
}

}  // namespace

FitPredict dfam_learner(const std::vector<Signature>& signatures, const InstanceTable& table, const BinLayout& layout,
                        std::size_t window_size, std::uint64_t seed) {
  std::vector<std::size_t> target;
  for (const auto& m : table.meta) target.push_back(m.label);
  return [&signatures, &table, layout, window_size, seed, target](std::span<const std::size_t> train,
                                                                  std::span<const std::size_t> test) {
    const auto [to_global, to_local] = present_labels(train, target, table.labels.size());
    std::vector<std::string> names;
    for (auto g : to_global) names.push_back(table.labels[g]);
    std::vector<LabeledSignature> data;
    data.reserve(train.size());
    for (auto i : train) data.push_back({to_local[target[i]], signatures[i]});
    const DfamModel model = train_dfam(data, std::move(names), layout, window_size, seed);
    std::vector<std::size_t> out;
    out.reserve(test.size());
    for (auto i : test) out.push_back(to_global[model.classify(signatures[i]).label]);
    return out;
  };
}

FitPredict feature_learner(const FeatureDataset& features, ModelKind kind, const ClassifierParams& params) {
  return [&features, kind, params](std::span<const std::size_t> train, std::span<const std::size_t> test) {
    const auto [to_global, to_local] = present_labels(train, features.targets, features.labels.size());
    FeatureDataset sub = features.subset(train);
    sub.labels.clear();
    for (auto g : to_global) sub.labels.push_back(features.labels[g]);
    for (auto& t : sub.targets) t = to_local[t];
    ClassifierParams p = params;
    p.knn_k = std::min(p.knn_k, sub.size());
    const FeatureModel model = train_feature_model(kind, sub, p);
    std::vector<std::size_t> out;
    out.reserve(test.size());
    for (auto i : test) out.push_back(to_global[model.predict(features.rows[i])]);
    return out;
  };
}

Protocol parse_protocol(std::string_view s) {
  if (s == "loocv") return Protocol::loocv;
  if (s == "kfold") return Protocol::kfold;
  if (s == "loso") return Protocol::loso;
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::loocv: return "loocv";
    case Protocol::kfold: return "kfold";
    case Protocol::loso: return "loso";
  }
  return "?";
}

namespace {

std::string sensor_text(const PipelineConfig& c) {
  std::vector<std::string> parts;
  for (auto s : c.sensors) parts.emplace_back(to_string(s));
  return join(parts, "+");
}

ProtocolResult run_protocol(const GridRequest& req, const InstanceTable& table, const FitPredict& fp) {
  const ProtocolOptions opts{1};
  switch (req.protocol) {
    case Protocol::loocv: return loocv_blocks(table.meta, table.labels, fp, opts);
    case Protocol::kfold: return kfold(table.meta, table.labels, fp, req.k, req.seed, opts);
    case Protocol::loso: return loso(table.meta, table.labels, fp, opts);
  }
  throw ConfigError("unknown protocol");
}

}  // namespace

std::vector<GridCell> evaluate_grid(const Corpus& corpus, const GridRequest& req) {
  std::vector<GridCell> cells;
  for (auto w : req.window_sizes) {
    PipelineConfig cfg = req.base;
    cfg.window_size = w;
    for (const auto& m : req.models) {
      if (m.dfam) {
        for (int g : req.gs) {
          cfg.g = g;
          cfg.validate();
          cells.push_back({req.protocol, m.name(), w, g, sensor_text(cfg), {}});
        }
      } else {
        cfg.validate();
        cells.push_back({req.protocol, m.name(), w, std::nullopt, sensor_text(cfg), {}});
      }
    }
  }

  for (auto w : req.window_sizes) {
    PipelineConfig cfg = req.base;
    cfg.window_size = w;
    const InstanceTable table = build_instances(corpus, cfg, req.block_size, req.placements);
    std::optional<FeatureDataset> features;
    std::vector<std::size_t> todo;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].window_size != w) continue;
      todo.push_back(c);
      if (!cells[c].g && !features) features = instance_features(table, cfg);
    }
    std::map<int, std::vector<Signature>> sigs;
    for (auto c : todo) {
      if (cells[c].g && !sigs.count(*cells[c].g)) {
        PipelineConfig gc = cfg;
        gc.g = *cells[c].g;
        sigs[*cells[c].g] = instance_signatures(table, gc.layout());
      }
    }
    parallel_for(todo.size(), req.threads, [&](std::size_t t) {
      auto& cell = cells[todo[t]];
      if (cell.g) {
        PipelineConfig gc = cfg;
        gc.g = *cell.g;
        cell.result = run_protocol(req, table, dfam_learner(sigs.at(*cell.g), table, gc.layout(), w, req.seed));
      } else {
        const ModelSpec spec = ModelSpec::parse(cell.model);
        ClassifierParams p = req.params;
        p.knn_k = spec.knn_k;
        cell.result = run_protocol(req, table, feature_learner(*features, spec.kind, p));
      }
    });
  }
  return cells;
}

std::string grid_csv_row(const GridCell& cell) {
  const auto& r = cell.result.pooled;
  std::ostringstream out;
  out << to_string(cell.protocol) << ',' << cell.model << ',' << cell.window_size << ','
      << (cell.g ? std::to_string(*cell.g) : std::string()) << ',' << cell.sensors << ',' << r.confusion.total();
  for (double v : {r.accuracy, r.weighted.precision, r.weighted.recall, r.weighted.f1, r.micro.precision,
                   r.micro.recall, r.micro.f1, r.macro.precision, r.macro.recall, r.macro.f1,
                   cell.result.mean_round_accuracy}) {
    out << ',' << format_double(v);
  }
  return out.str();
}

std::string grid_json(const std::vector<GridCell>& cells) {
  using nlohmann::ordered_json;
  ordered_json arr = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json j;
    j["protocol"] = to_string(c.protocol);
    j["model"] = c.model;
    j["W"] = c.window_size;
    j["g"] = c.g ? ordered_json(*c.g) : ordered_json(nullptr);
    j["sensors"] = c.sensors;
    j["report"] = ordered_json::parse(report_to_json(c.result.pooled, -1));
    j["round_groups"] = c.result.round_group;
    j["round_accuracy"] = c.result.round_accuracy;
    j["mean_round_accuracy"] = c.result.mean_round_accuracy;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

const std::vector<std::string>& TrainedModel::labels() const {
  if (dfam) return dfam->labels;
  if (features) return features->labels();
  throw ConfigError("no model loaded");
}

std::pair<std::string, double> TrainedModel::classify(const std::vector<std::vector<double>>& windows,
                                                      const PipelineConfig& config) const {
  if (dfam) {
    const auto res = dfam->classify(signature_of(windows, dfam->layout));
    return {dfam->labels[res.label], res.scores[res.label]};
  }
  if (features) {
    const auto fv = extract_features(ChannelWindows{config.channels(), windows}, config.sample_rate_hz);
    return {features->labels()[features->predict(fv)], 1.0};
  }
  throw ConfigError("no model loaded");
}

void TrainedModel::save(std::ostream& out) const {
  if (dfam) dfam->save(out);
  else if (features) features->save(out);
  else throw ConfigError("no model to save");
}

TrainedModel TrainedModel::load(std::istream& in) {
  std::string head;
  const auto pos = in.tellg();
  in >> head;
  in.seekg(pos);
  TrainedModel m;
  if (head == "DFAM") m.dfam = DfamModel::load(in);
  else if (head == "MODEL") m.features = FeatureModel::load(in);
  else throw ParseError(1, "unrecognised model header");
  return m;
}

TrainTask parse_train_task(std::string_view s) {
  if (s == "full") return TrainTask::full;
  if (s == "moving" || s == "s1") return TrainTask::moving;
  if (s == "distracted" || s == "s3") return TrainTask::distracted;
  throw ConfigError("unknown training task '" + std::string(s) + "'");
}

TrainedModel train_model(const Corpus& corpus, const PipelineConfig& config, const ModelSpec& spec, TrainTask task,
                         const ClassifierParams& params, std::uint64_t seed,
                         const std::vector<Placement>& placements) {
  InstanceTable table = build_instances(corpus, config, 0, placements);
  if (task != TrainTask::full) {
    InstanceTable binary;
    binary.labels = task == TrainTask::moving ? std::vector<std::string>{kStillLabel, kMovingLabel}
                                              : std::vector<std::string>{kUndistractedLabel, kDistractedLabel};
    for (std::size_t i = 0; i < table.meta.size(); ++i) {
      const auto label = ActivityLabel::parse(table.labels[table.meta[i].label]);
      InstanceMeta m = table.meta[i];
      if (task == TrainTask::moving) {
        m.label = label.is_moving() ? 1 : 0;
      } else {
        if (!label.is_moving() || label.distraction == Distraction::using_smartphone) continue;
        m.label = label.distraction ? 1 : 0;
      }
      binary.meta.push_back(m);
      binary.recording.push_back(table.recording[i]);
      binary.windows.push_back(std::move(table.windows[i]));
    }
    table = std::move(binary);
  }

  std::vector<std::size_t> all(table.meta.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  TrainedModel out;
  if (spec.dfam) {
    const auto layout = config.layout();
    const auto sigs = instance_signatures(table, layout);
    std::vector<LabeledSignature> data;
    for (auto i : all) data.push_back({table.meta[i].label, sigs[i]});
    out.dfam = train_dfam(data, table.labels, layout, config.window_size, seed);
  } else {
    ClassifierParams p = params;
    p.knn_k = spec.knn_k;
    p.seed = seed;
    out.features = train_feature_model(spec.kind, instance_features(table, config), p);
  }
  return out;
}

}  // namespace dfamcar
