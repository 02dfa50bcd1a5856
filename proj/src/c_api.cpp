#include "dfamcar/dfamcar.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <new>
#include <sstream>

#include "dfamcar/bench.hpp"
#include "dfamcar/hierarchy.hpp"
#include "dfamcar/parallel.hpp"
#include "dfamcar/pipeline.hpp"
#include "dfamcar/text.hpp"

namespace fs = std::filesystem;
using namespace dfamcar;

struct dfc_config {
  PipelineConfig pipeline;
  std::vector<std::size_t> window_sizes = {128};
  std::vector<int> gs = {3};
  std::vector<ModelSpec> models = {ModelSpec{}};
  std::uint64_t seed = kDefaultSeed;
  Protocol protocol = Protocol::kfold;
  std::size_t k = 10;
  std::size_t block_size = 0;
  TrainTask task = TrainTask::full;
  std::vector<Placement> placements;
  CorpusSpec corpus;
  ClassifierParams params;
  std::size_t train_size = 500;
  std::size_t queries = 50;
  std::size_t reps = 10;
  std::size_t reset = kDefaultResetPeriod;
  std::size_t stream_windows = 1000;
  std::vector<Device> s1_devices = {Device::phone};
  std::vector<Device> s3_devices = {Device::phone, Device::watch};
  std::size_t threads = 0;  // 0 = worker_count()
  bool allow_any_window_size = false;
  bool bench_window_set = false;
};

struct dfc_model {
  TrainedModel model;
};

namespace {

thread_local std::string g_last_error;
std::mutex g_log_mutex;
dfc_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

void log_message(const std::string& msg) {
  std::lock_guard lock(g_log_mutex);
  if (g_log_fn) g_log_fn(msg.c_str(), g_log_user);
}

dfc_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return DFC_ERR_CONFIG;
    case ErrorKind::data_quality: return DFC_ERR_DATA_QUALITY;
    case ErrorKind::alignment: return DFC_ERR_ALIGNMENT;
    case ErrorKind::shape: return DFC_ERR_SHAPE;
    case ErrorKind::training: return DFC_ERR_TRAINING;
    case ErrorKind::parse: return DFC_ERR_PARSE;
    case ErrorKind::io: return DFC_ERR_IO;
    case ErrorKind::empty_result: return DFC_ERR_EMPTY_RESULT;
  }
  return DFC_ERR_INTERNAL;
}

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
dfc_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return DFC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const ArgumentError& e) {
    g_last_error = e.what();
    return DFC_ERR_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DFC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DFC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DFC_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) throw ArgumentError(std::string(name) + " must not be null");
}

std::size_t parse_size(std::string_view v, std::string_view key, long long min = 0) {
  const auto n = try_parse_int(v);
  if (!n || *n < min) throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key));
  return static_cast<std::size_t>(*n);
}

double parse_real(std::string_view v, std::string_view key) {
  const auto d = try_parse_double(v);
  if (!d) throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key));
  return *d;
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view v, F&& item) {
  std::vector<T> out;
  for (auto part : split(v, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    T x = item(part);
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  if (out.empty()) throw ConfigError("empty list '" + std::string(v) + "'");
  return out;
}

std::vector<Sensor> parse_sensors(std::string_view v) {
  auto s = parse_list<Sensor>(v, parse_sensor);
  std::sort(s.begin(), s.end());
  return s;
}

std::vector<Device> parse_devices(std::string_view v) {
  auto d = parse_list<Device>(v, parse_device);
  std::sort(d.begin(), d.end());
  return d;
}

void set_key(dfc_config& c, std::string_view key, std::string_view v) {
  if (key == "W") {
    c.window_sizes = parse_list<std::size_t>(v, [&](std::string_view s) { return parse_size(s, key, 2); });
    c.pipeline.window_size = c.window_sizes.front();
    c.bench_window_set = true;
  } else if (key == "g") {
    c.gs = parse_list<int>(v, [&](std::string_view s) { return static_cast<int>(parse_size(s, key, 1)); });
    c.pipeline.g = c.gs.front();
  } else if (key == "fs") {
    c.pipeline.sample_rate_hz = parse_real(v, key);
    c.corpus.sample_rate_hz = c.pipeline.sample_rate_hz;
    if (!(c.pipeline.sample_rate_hz > 0)) throw ConfigError("fs must be positive");
  } else if (key == "cutoff") {
    c.pipeline.cutoff_hz = parse_real(v, key);
  } else if (key == "boundaries") {
    c.pipeline.boundaries = v.empty() ? std::vector<double>{}
                                      : parse_list<double>(v, [&](std::string_view s) { return parse_real(s, key); });
  } else if (key == "sensors") {
    c.pipeline.sensors = parse_sensors(v);
  } else if (key == "devices") {
    c.pipeline.devices = parse_devices(v);
  } else if (key == "seed") {
    c.seed = parse_size(v, key);
    c.corpus.seed = c.seed;
    c.params.seed = c.seed;
  } else if (key == "model" || key == "models") {
    c.models = parse_list<ModelSpec>(v, ModelSpec::parse);
  } else if (key == "protocol") {
    c.protocol = parse_protocol(v);
  } else if (key == "k") {
    c.k = parse_size(v, key, 2);
  } else if (key == "block_size") {
    c.block_size = parse_size(v, key);
  } else if (key == "task") {
    c.task = parse_train_task(v);
  } else if (key == "placements") {
    c.placements = parse_list<Placement>(v, parse_placement);
  } else if (key == "noise") {
    c.corpus.noise_std = parse_real(v, key);
    if (!(c.corpus.noise_std >= 0)) throw ConfigError("noise must be non-negative");
  } else if (key == "participants") {
    c.corpus.participants = parse_size(v, key, 1);
  } else if (key == "duration") {
    c.corpus.duration_s = parse_real(v, key);
    if (!(c.corpus.duration_s > 0)) throw ConfigError("duration must be positive");
  } else if (key == "train_size") {
    c.train_size = parse_size(v, key, 1);
  } else if (key == "queries") {
    c.queries = parse_size(v, key, 1);
  } else if (key == "reps") {
    c.reps = parse_size(v, key, 1);
  } else if (key == "reset") {
    c.reset = parse_size(v, key, 1);
  } else if (key == "stream_windows") {
    c.stream_windows = parse_size(v, key, 1);
  } else if (key == "s1_devices") {
    c.s1_devices = parse_devices(v);
  } else if (key == "s3_devices") {
    c.s3_devices = parse_devices(v);
  } else if (key == "threads") {
    c.threads = parse_size(v, key);
  } else if (key == "allow_any_W") {
    c.allow_any_window_size = v == "1" || v == "true";
  } else if (key == "knn_k") {
    const auto kk = parse_size(v, key, 1);
    for (auto& m : c.models) m.knn_k = kk;
    c.params.knn_k = kk;
  } else if (key == "dt_max_depth") {
    c.params.dt_max_depth = static_cast<int>(parse_size(v, key, 1));
  } else if (key == "dt_min_leaf") {
    c.params.dt_min_leaf = parse_size(v, key, 1);
  } else if (key == "rf_trees") {
    c.params.rf_trees = parse_size(v, key, 1);
  } else if (key == "rf_max_depth") {
    c.params.rf_max_depth = static_cast<int>(parse_size(v, key, 1));
  } else if (key == "rf_min_leaf") {
    c.params.rf_min_leaf = parse_size(v, key, 1);
  } else if (key == "rf_max_features") {
    c.params.rf_max_features = parse_size(v, key);
  } else if (key == "svm_lambda") {
    c.params.svm_lambda = parse_real(v, key);
    if (!(c.params.svm_lambda > 0)) throw ConfigError("svm_lambda must be positive");
  } else if (key == "svm_epochs") {
    c.params.svm_epochs = static_cast<int>(parse_size(v, key, 1));
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

std::size_t threads_of(const dfc_config& c) { return c.threads ? c.threads : worker_count(); }

// Streams to a sibling temporary file and renames on success so a failed
// call never leaves a partial artifact behind.
void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    try {
      body(out);
    } catch (...) {
      out.close();
      fs::remove(tmp);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw IoError("write to " + path.string() + " failed");
    }
  }
  fs::rename(tmp, path);
}

PipelineConfig checked_pipeline(const dfc_config& c) {
  c.pipeline.validate(c.allow_any_window_size);
  return c.pipeline;
}

Corpus load_or_generate(const dfc_config& c, const char* corpus_dir) {
  if (corpus_dir) return read_corpus(corpus_dir, c.pipeline.sample_rate_hz);
  log_message("generating synthetic corpus");
  return generate_corpus(c.corpus);
}

}  // namespace

extern "C" {

const char* dfc_version(void) { return "0.1.0"; }

const char* dfc_status_name(dfc_status s) {
  switch (s) {
    case DFC_OK: return "ok";
    case DFC_ERR_CONFIG: return "config_error";
    case DFC_ERR_DATA_QUALITY: return "data_quality_error";
    case DFC_ERR_ALIGNMENT: return "alignment_error";
    case DFC_ERR_SHAPE: return "shape_error";
    case DFC_ERR_TRAINING: return "training_error";
    case DFC_ERR_PARSE: return "parse_error";
    case DFC_ERR_IO: return "io_error";
    case DFC_ERR_EMPTY_RESULT: return "empty_result";
    case DFC_ERR_ARGUMENT: return "invalid_argument";
    case DFC_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* dfc_last_error(void) { return g_last_error.c_str(); }

void dfc_set_log_callback(dfc_log_fn fn, void* user) {
  std::lock_guard lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

dfc_status dfc_config_create(dfc_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dfc_config();
  });
}

void dfc_config_destroy(dfc_config* config) { delete config; }

dfc_status dfc_config_set(dfc_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    dfc_config next = *config;
    set_key(next, key, value);
    *config = std::move(next);
  });
}

dfc_status dfc_generate_corpus(const dfc_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    const Corpus corpus = generate_corpus(config->corpus);
    write_corpus(corpus, out_dir);
  });
}

dfc_status dfc_generate_stream(const dfc_config* config, const char* recording_path, const char* context_path,
                               const char* truth_path) {
  return guarded([&] {
    require(config, "config");
    require(recording_path, "recording_path");
    require(context_path, "context_path");
    const auto& c = *config;
    checked_pipeline(c);
    const auto segments = random_segments(c.stream_windows, c.seed);
    const Stream stream = generate_stream(segments, c.pipeline.window_size, 1, c.corpus.noise_std,
                                          c.pipeline.sample_rate_hz, c.seed);
    write_atomically(recording_path, [&](std::ostream& o) { write_recording_csv(o, stream.recording); });
    write_atomically(context_path, [&](std::ostream& o) { write_context_csv(o, stream.smartphone_in_use); });
    if (truth_path) {
      write_atomically(truth_path, [&](std::ostream& o) {
        o << "window_index,label\n";
        for (std::size_t i = 0; i < stream.truth.size(); ++i) o << i << ',' << stream.truth[i].name() << '\n';
      });
    }
  });
}

dfc_status dfc_model_train(const dfc_config* config, const char* corpus_dir, dfc_model** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    const auto& c = *config;
    const auto pipeline = checked_pipeline(c);
    const Corpus corpus = load_or_generate(c, corpus_dir);
    auto model = std::make_unique<dfc_model>();
    model->model = train_model(corpus, pipeline, c.models.front(), c.task, c.params, c.seed, c.placements);
    *out = model.release();
  });
}

dfc_status dfc_model_load(const char* path, dfc_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open ") + path);
    auto model = std::make_unique<dfc_model>();
    try {
      model->model = TrainedModel::load(in);
    } catch (const ParseError& e) {
      throw ParseError(path, e.line(), e.detail());
    }
    *out = model.release();
  });
}

dfc_status dfc_model_save(const dfc_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    write_atomically(path, [&](std::ostream& o) { model->model.save(o); });
  });
}

void dfc_model_destroy(dfc_model* model) { delete model; }

dfc_status dfc_model_label_count(const dfc_model* model, size_t* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->model.labels().size();
  });
}

dfc_status dfc_model_label(const dfc_model* model, size_t i, char* buf, size_t len) {
  return guarded([&] {
    require(model, "model");
    require(buf, "buf");
    const auto& labels = model->model.labels();
    if (i >= labels.size()) throw ArgumentError("label index out of range");
    if (labels[i].size() + 1 > len) throw ArgumentError("buffer too small");
    std::memcpy(buf, labels[i].c_str(), labels[i].size() + 1);
  });
}

dfc_status dfc_classify_recording(const dfc_model* model, const dfc_config* config, const char* recording_path,
                                  const char* out_csv) {
  return guarded([&] {
    require(model, "model");
    require(config, "config");
    require(recording_path, "recording_path");
    require(out_csv, "out_csv");
    PipelineConfig p = config->pipeline;
    if (model->model.dfam) {
      p.window_size = model->model.dfam->window_size;
      p.sample_rate_hz = model->model.dfam->layout.sample_rate_hz;
    }
    p.validate(true);
    const Recording rec = read_recording_csv(fs::path(recording_path), p.sample_rate_hz);
    const auto sets = window_sets(rec, p.channels(), p.window_size, p.cutoff_hz);
    if (sets.empty()) throw EmptyResultError("recording is shorter than one window");
    write_atomically(out_csv, [&](std::ostream& o) {
      o << "window_index,label,score\n";
      for (std::size_t w = 0; w < sets.size(); ++w) {
        const auto [label, score] = model->model.classify(sets[w], p);
        o << w << ',' << label << ',' << format_double(score) << '\n';
      }
    });
  });
}

dfc_status dfc_evaluate(const dfc_config* config, const char* corpus_dir, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    const auto& c = *config;
    checked_pipeline(c);
    const Corpus corpus = load_or_generate(c, corpus_dir);
    GridRequest req;
    req.protocol = c.protocol;
    req.k = c.k;
    req.block_size = c.block_size;
    req.window_sizes = c.window_sizes;
    req.gs = c.gs;
    req.models = c.models;
    req.base = c.pipeline;
    req.placements = c.placements;
    req.params = c.params;
    req.seed = c.seed;
    req.threads = threads_of(c);
    if (c.allow_any_window_size) {
      for (auto w : req.window_sizes) {
        PipelineConfig p = c.pipeline;
        p.window_size = w;
        p.validate(true);
      }
    }
    log_message("evaluating " + std::to_string(req.window_sizes.size() * req.models.size()) + " model/W pairs");
    const auto cells = evaluate_grid(corpus, req);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_atomically(dir / "cells.csv", [&](std::ostream& o) {
      o << kGridCsvHeader << '\n';
      for (const auto& cell : cells) o << grid_csv_row(cell) << '\n';
    });
    write_atomically(dir / "report.json", [&](std::ostream& o) { o << grid_json(cells) << '\n'; });
  });
}

dfc_status dfc_replay(const dfc_config* config, const dfc_model* s1, const dfc_model* s3, const char* recording_path,
                      const char* context_path, const char* events_path, dfc_counts* counts) {
  return guarded([&] {
    require(config, "config");
    require(recording_path, "recording_path");
    require(context_path, "context_path");
    require(events_path, "events_path");
    const auto& c = *config;
    HierarchyModels models;
    if (s1) models.s1 = {&s1->model, c.pipeline, kMovingLabel};
    if (s3) models.s3 = {&s3->model, c.pipeline, kDistractedLabel};
    models.s1.config.devices = c.s1_devices;
    models.s3.config.devices = c.s3_devices;
    for (auto* stage : {&models.s1, &models.s3}) {
      if (stage->model && stage->model->dfam) {
        stage->config.window_size = stage->model->dfam->window_size;
        stage->config.sample_rate_hz = stage->model->dfam->layout.sample_rate_hz;
      }
    }
    validate_models(models);
    if (models.s1.config.window_size != models.s3.config.window_size) {
      throw ConfigError("S1 and S3 models use different window sizes");
    }
    const std::size_t w = models.s1.config.window_size;
    const Recording rec = read_recording_csv(fs::path(recording_path), c.pipeline.sample_rate_hz);
    const auto context = read_context_csv(fs::path(context_path));
    const auto result = replay(rec, context, models, w, c.pipeline.cutoff_hz, c.reset);
    write_atomically(events_path, [&](std::ostream& o) { write_event_log(o, result.events); });
    if (counts) {
      counts->windows = result.trace.size();
      counts->events = result.events.size();
      counts->s1_calls = result.counts.s1_calls;
      counts->s3_calls = result.counts.s3_calls;
      counts->watch_windows_processed = result.counts.watch_windows_processed;
    }
  });
}

dfc_status dfc_bench(const dfc_config* config, const char* out_json, const char* out_csv) {
  return guarded([&] {
    require(config, "config");
    const auto& c = *config;
    BenchRequest req;
    req.models = c.models;
    req.train_size = c.train_size;
    req.queries = c.queries;
    req.reps = c.reps;
    req.config = c.pipeline;
    if (!c.bench_window_set) req.config.window_size = 512;
    req.noise_std = c.corpus.noise_std;
    req.seed = c.seed;
    const auto results = run_bench(req);
    if (out_json) {
      write_atomically(out_json, [&](std::ostream& o) { o << bench_json(results, req.config.window_size) << '\n'; });
    }
    if (out_csv) {
      write_atomically(out_csv, [&](std::ostream& o) {
        o << kBenchCsvHeader << '\n';
        for (const auto& r : results) o << bench_csv_row(r, req.config.window_size) << '\n';
      });
    }
  });
}

}  // extern "C"
