#include <sstream>

#include "doctest.h"
#include "dfamcar/bench.hpp"
#include "dfamcar/pipeline.hpp"
#include "json.hpp"

using namespace dfamcar;

namespace {

Corpus small_corpus(double noise = 0.0) {
  CorpusSpec spec;
  spec.participants = 2;
  spec.duration_s = 21.0;
  spec.noise_std = noise;
  spec.activities = {ActivityLabel::parse("standing"), ActivityLabel::parse("walking"),
                     ActivityLabel::parse("walking+eating"), ActivityLabel::parse("running+using_smartphone")};
  return generate_corpus(spec);
}

}  // namespace

TEST_CASE("config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.window_size = 100;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.window_size = 1024;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(c.validate(true));
  c.window_size = 128;
  c.g = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.g = 3;
  c.sensors.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("channel selection is canonical") {
  PipelineConfig c;
  c.devices = {Device::watch};
  c.sensors = {Sensor::gyroscope};
  const auto ch = c.channels();
  REQUIRE(ch.size() == 3);
  CHECK(ch[0].name() == "watch.gyr.x");
  c.devices = {Device::phone, Device::watch};
  c.sensors = {Sensor::accelerometer, Sensor::gyroscope};
  CHECK(c.channels().size() == 12);
}

TEST_CASE("model spec text") {
  CHECK(ModelSpec::parse("dfam").dfam);
  const auto k = ModelSpec::parse("knn5");
  CHECK_FALSE(k.dfam);
  CHECK(k.knn_k == 5);
  CHECK(k.name() == "knn5");
  CHECK(ModelSpec::parse("rf").kind == ModelKind::random_forest);
  CHECK_THROWS_AS(ModelSpec::parse("knn0"), ConfigError);
  CHECK_THROWS_AS(ModelSpec::parse("lstm"), ConfigError);
}

TEST_CASE("instance table counts windows per recording") {
  const auto corpus = small_corpus();
  PipelineConfig c;
  c.window_size = 64;
  const auto t = build_instances(corpus, c, 3);
  CHECK(t.labels.size() == 4);
  CHECK(t.meta.size() == corpus.recordings.size() * (1050 / 64));
  CHECK(t.meta[0].block == 0);
  CHECK(t.meta[3].block == 1);
  CHECK(t.meta[15].block == 5);
  CHECK(t.meta[16].block == 6);  // a new recording starts a new block
  const auto only = build_instances(corpus, c, 0, {Placement::LL});
  for (auto r : only.recording) CHECK(corpus.recordings[r].placement == Placement::LL);
}

TEST_CASE("grid evaluation counts every window once") {
  const auto corpus = small_corpus();
  GridRequest req;
  req.k = 4;
  req.window_sizes = {32, 64};
  req.gs = {1, 3};
  req.models = {ModelSpec::parse("dfam"), ModelSpec::parse("knn3")};
  req.threads = 2;
  const auto cells = evaluate_grid(corpus, req);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].window_size == 32);
  CHECK(cells[0].g == 1);
  CHECK(cells[1].g == 3);
  CHECK_FALSE(cells[2].g.has_value());
  for (const auto& cell : cells) {
    const std::size_t per = 1050 / cell.window_size;
    CHECK(cell.result.pooled.confusion.total() == corpus.recordings.size() * per);
  }
  const auto row = grid_csv_row(cells[2]);
  CHECK(row.rfind("kfold,knn3,32,,acc+gyr,", 0) == 0);
  req.threads = 1;
  const auto again = evaluate_grid(corpus, req);
  CHECK(grid_json(again) == grid_json(cells));
  const auto j = nlohmann::json::parse(grid_json(cells));
  CHECK(j.size() == 6);
  CHECK(j[2]["g"].is_null());
}

TEST_CASE("trained models save, load and classify") {
  const auto corpus = small_corpus();
  PipelineConfig c;
  c.window_size = 64;
  for (auto spec : {ModelSpec::parse("dfam"), ModelSpec::parse("nb")}) {
    const auto m = train_model(corpus, c, spec, TrainTask::full, {}, 7);
    std::stringstream ss;
    m.save(ss);
    const auto back = TrainedModel::load(ss);
    CHECK(back.labels() == m.labels());
    const auto t = build_instances(corpus, c);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < t.windows.size(); ++i) ok += back.classify(t.windows[i], c).first == t.labels[t.meta[i].label];
    CHECK(static_cast<double>(ok) / static_cast<double>(t.windows.size()) > 0.9);
  }
  std::stringstream junk("hello\n");
  CHECK_THROWS_AS(TrainedModel::load(junk), ParseError);
}

TEST_CASE("binary training tasks") {
  const auto corpus = small_corpus();
  PipelineConfig c;
  c.window_size = 64;
  const auto s1 = train_model(corpus, c, ModelSpec{}, TrainTask::moving, {}, 7);
  CHECK(s1.labels() == std::vector<std::string>{kStillLabel, kMovingLabel});
  const auto s3 = train_model(corpus, c, ModelSpec{}, TrainTask::distracted, {}, 7);
  CHECK(s3.labels() == std::vector<std::string>{kUndistractedLabel, kDistractedLabel});
  CHECK(s3.dfam->instances.size() == 2 * 2 * (1050 / 64));
}

TEST_CASE("bench reports deterministic counts") {
  BenchRequest req;
  req.models = {ModelSpec::parse("dfam"), ModelSpec::parse("knn3")};
  req.train_size = 60;
  req.queries = 10;
  req.reps = 2;
  req.config.window_size = 64;
  const auto a = run_bench(req);
  const auto b = run_bench(req);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].correct == b[i].correct);
    CHECK(a[i].queries == 10);
    CHECK(a[i].rep_medians_us.size() == 2);
    CHECK(a[i].min_us <= a[i].median_us);
    CHECK(a[i].median_us <= a[i].p95_us);
  }
  CHECK(percentile({5, 1, 3, 2, 4}, 0.5) == 3);
  CHECK(percentile({5, 1, 3, 2, 4}, 0.95) == 5);
  req.reps = 0;
  CHECK_THROWS_AS(run_bench(req), ConfigError);
}
