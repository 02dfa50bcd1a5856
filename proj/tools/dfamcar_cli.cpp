// Command-line front end. Talks to the library only through dfamcar.h.
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfamcar/dfamcar.h"

namespace {

struct ConfigDeleter {
  void operator()(dfc_config* c) const { dfc_config_destroy(c); }
};
struct ModelDeleter {
  void operator()(dfc_model* m) const { dfc_model_destroy(m); }
};
using ConfigPtr = std::unique_ptr<dfc_config, ConfigDeleter>;
using ModelPtr = std::unique_ptr<dfc_model, ModelDeleter>;

struct Failure {
  dfc_status status;
};

void check(dfc_status s) {
  if (s != DFC_OK) throw Failure{s};
}

// Flags forwarded verbatim to configuration keys when present.
class Forwarded {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& slot = values_[app][key];
    app->add_option(flag, slot, help);
  }

  void apply(CLI::App* app, dfc_config* config) const {
    auto it = values_.find(app);
    if (it == values_.end()) return;
    for (const auto& [key, value] : it->second) {
      if (value.empty()) continue;
      check(dfc_config_set(config, key.c_str(), value.c_str()));
    }
  }

 private:
  std::map<CLI::App*, std::map<std::string, std::string>> values_;
};

void add_pipeline_flags(Forwarded& fw, CLI::App* app) {
  fw.add(app, "--W", "W", "window size in samples");
  fw.add(app, "--g", "g", "number of frequency bins");
  fw.add(app, "--fs", "fs", "sampling rate in Hz");
  fw.add(app, "--cutoff", "cutoff", "low-pass cutoff in Hz");
  fw.add(app, "--boundaries", "boundaries", "comma-separated bin boundaries in Hz");
  fw.add(app, "--sensors", "sensors", "sensor set, e.g. acc,gyr");
  fw.add(app, "--devices", "devices", "device set, e.g. phone,watch");
  fw.add(app, "--seed", "seed", "random seed");
  fw.add(app, "--threads", "threads", "worker threads (default DFAM_CAR_THREADS or hardware)");
}

void add_corpus_flags(Forwarded& fw, CLI::App* app) {
  fw.add(app, "--participants", "participants", "synthetic participants");
  fw.add(app, "--duration", "duration", "seconds per synthetic recording");
  fw.add(app, "--noise", "noise", "Gaussian noise std of the synthetic corpus");
}

void add_classifier_flags(Forwarded& fw, CLI::App* app) {
  for (const char* k : {"dt_max_depth", "dt_min_leaf", "rf_trees", "rf_max_depth", "rf_min_leaf", "rf_max_features",
                        "svm_lambda", "svm_epochs"}) {
    std::string flag = std::string("--") + k;
    for (auto& ch : flag) {
      if (ch == '_') ch = '-';
    }
    fw.add(app, flag, k, std::string(k));
  }
}

void log_to_stderr(const char* message, void*) { std::fprintf(stderr, "%s\n", message); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dominant-frequency concurrent activity recognition toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  bool allow_any_w = false;
  app.add_flag("-v,--verbose", verbose, "log progress to stderr");
  app.add_flag("--allow-any-W", allow_any_w, "accept any power-of-two window size");
  Forwarded fw;

  std::string out;
  std::string corpus;

  auto* gen = app.add_subcommand("gen", "write a synthetic corpus or activity stream");
  bool stream = false;
  add_pipeline_flags(fw, gen);
  add_corpus_flags(fw, gen);
  gen->add_flag("--stream", stream, "write a mixed stream (recording.csv, context.csv, truth.csv)");
  fw.add(gen, "--stream-windows", "stream_windows", "windows in the stream");
  gen->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model and write it to a file");
  add_pipeline_flags(fw, train);
  add_corpus_flags(fw, train);
  add_classifier_flags(fw, train);
  train->add_option("--corpus", corpus, "corpus directory (default: generated)");
  fw.add(train, "--model", "model", "dfam, nb, knn<k>, dt, rf or svm");
  fw.add(train, "--task", "task", "full, moving (S1) or distracted (S3)");
  fw.add(train, "--placements", "placements", "placement filter, e.g. RR,LL");
  train->add_option("--out", out, "model file")->required();

  auto* classify = app.add_subcommand("classify", "label a recording window by window");
  std::string model_path, recording;
  add_pipeline_flags(fw, classify);
  classify->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
  classify->add_option("--recording", recording, "recording CSV")->required()->check(CLI::ExistingFile);
  classify->add_option("--out", out, "output CSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "run a validation protocol over a (W, g, model) grid");
  add_pipeline_flags(fw, evaluate);
  add_corpus_flags(fw, evaluate);
  add_classifier_flags(fw, evaluate);
  evaluate->add_option("--corpus", corpus, "corpus directory (default: generated)");
  fw.add(evaluate, "--protocol", "protocol", "loocv, kfold or loso");
  fw.add(evaluate, "--k", "k", "folds for kfold");
  fw.add(evaluate, "--model", "model", "model list, e.g. dfam,knn3,nb");
  fw.add(evaluate, "--models", "models", "alias of --model");
  fw.add(evaluate, "--block-size", "block_size", "LOOCV block length in windows (0 = recording)");
  fw.add(evaluate, "--placements", "placements", "placement filter");
  evaluate->add_option("--out", out, "output directory")->required();

  auto* replay = app.add_subcommand("replay", "run the hierarchical recogniser over a stream");
  std::string s1_path, s3_path, context;
  add_pipeline_flags(fw, replay);
  replay->add_option("--s1-model", s1_path, "moving/not_moving model")->required()->check(CLI::ExistingFile);
  replay->add_option("--s3-model", s3_path, "distracted/none model")->required()->check(CLI::ExistingFile);
  replay->add_option("--recording", recording, "recording CSV")->required()->check(CLI::ExistingFile);
  replay->add_option("--context", context, "context CSV")->required()->check(CLI::ExistingFile);
  fw.add(replay, "--reset", "reset", "periodic reset in windows");
  fw.add(replay, "--s1-devices", "s1_devices", "devices read by S1");
  fw.add(replay, "--s3-devices", "s3_devices", "devices read by S3");
  replay->add_option("--out", out, "event log (JSON lines)")->required();

  auto* bench = app.add_subcommand("bench", "per-window classification latency");
  std::string csv_out;
  add_pipeline_flags(fw, bench);
  add_corpus_flags(fw, bench);
  fw.add(bench, "--models", "models", "models to time, e.g. dfam,knn3");
  fw.add(bench, "--model", "model", "alias of --models");
  fw.add(bench, "--train-size", "train_size", "training instances");
  fw.add(bench, "--queries", "queries", "query windows per repetition");
  fw.add(bench, "--reps", "reps", "repetitions");
  bench->add_option("--csv", csv_out, "also write a CSV summary");
  bench->add_option("--out", out, "JSON output")->required();

  CLI11_PARSE(app, argc, argv);
  if (verbose) dfc_set_log_callback(log_to_stderr, nullptr);

  try {
    dfc_config* raw = nullptr;
    check(dfc_config_create(&raw));
    ConfigPtr config(raw);
    if (allow_any_w) check(dfc_config_set(config.get(), "allow_any_W", "1"));
    auto* sub = app.get_subcommands().front();
    fw.apply(sub, config.get());
    const char* corpus_arg = corpus.empty() ? nullptr : corpus.c_str();

    if (sub == gen) {
      if (stream) {
        const std::filesystem::path dir(out);
        std::filesystem::create_directories(dir);
        check(dfc_generate_stream(config.get(), (dir / "recording.csv").c_str(), (dir / "context.csv").c_str(),
                                  (dir / "truth.csv").c_str()));
      } else {
        check(dfc_generate_corpus(config.get(), out.c_str()));
      }
    } else if (sub == train) {
      dfc_model* m = nullptr;
      check(dfc_model_train(config.get(), corpus_arg, &m));
      ModelPtr model(m);
      check(dfc_model_save(model.get(), out.c_str()));
    } else if (sub == classify) {
      dfc_model* m = nullptr;
      check(dfc_model_load(model_path.c_str(), &m));
      ModelPtr model(m);
      check(dfc_classify_recording(model.get(), config.get(), recording.c_str(), out.c_str()));
    } else if (sub == evaluate) {
      check(dfc_evaluate(config.get(), corpus_arg, out.c_str()));
    } else if (sub == replay) {
      dfc_model *a = nullptr, *b = nullptr;
      check(dfc_model_load(s1_path.c_str(), &a));
      ModelPtr s1(a);
      check(dfc_model_load(s3_path.c_str(), &b));
      ModelPtr s3(b);
      dfc_counts counts{};
      check(dfc_replay(config.get(), s1.get(), s3.get(), recording.c_str(), context.c_str(), out.c_str(), &counts));
      std::printf(
          "{\"windows\":%zu,\"events\":%zu,\"s1_calls\":%zu,\"s3_calls\":%zu,\"watch_windows_processed\":%zu}\n",
          counts.windows, counts.events, counts.s1_calls, counts.s3_calls, counts.watch_windows_processed);
    } else if (sub == bench) {
      check(dfc_bench(config.get(), out.c_str(), csv_out.empty() ? nullptr : csv_out.c_str()));
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", dfc_status_name(f.status), dfc_last_error());
    return f.status == DFC_ERR_CONFIG || f.status == DFC_ERR_ARGUMENT ? 2 : 1;
  }
  return 0;
}
