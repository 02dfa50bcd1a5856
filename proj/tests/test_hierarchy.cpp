#include <sstream>

#include "doctest.h"
#include "dfamcar/hierarchy.hpp"
#include "json.hpp"

using namespace dfamcar;

namespace {

struct Fixture {
  PipelineConfig s1_cfg, s3_cfg;
  TrainedModel s1, s3;

  Fixture() {
    CorpusSpec spec;
    spec.participants = 2;
    spec.duration_s = 21.0;
    const auto corpus = generate_corpus(spec);
    s1_cfg.window_size = 64;
    s1_cfg.devices = {Device::phone};
    s3_cfg.window_size = 64;
    s1 = train_model(corpus, s1_cfg, ModelSpec{}, TrainTask::moving, {}, 7);
    s3 = train_model(corpus, s3_cfg, ModelSpec{}, TrainTask::distracted, {}, 7);
  }

  HierarchyModels models() const { return {{&s1, s1_cfg, kMovingLabel}, {&s3, s3_cfg, kDistractedLabel}}; }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<StreamSegment> segs(std::initializer_list<std::pair<const char*, std::size_t>> parts) {
  std::vector<StreamSegment> out;
  for (auto [name, n] : parts) {
    const auto l = ActivityLabel::parse(name);
    out.push_back({l, n, l.distraction == Distraction::using_smartphone});
  }
  return out;
}

ReplayResult run(const Stream& st, std::size_t reset = kDefaultResetPeriod) {
  return replay(st.recording, st.smartphone_in_use, fixture().models(), 64, kDefaultCutoffHz, reset);
}

}  // namespace

TEST_CASE("standing keeps the machine in S1") {
  const auto st = generate_stream(segs({{"standing", 40}}), 64, 1, 0.0, 50.0, 1);
  const auto r = run(st);
  CHECK(r.events.empty());
  CHECK(r.counts.s3_calls == 0);
  CHECK(r.counts.s1_calls == 40);
  for (auto s : r.trace) CHECK(s == HState::S1);
}

TEST_CASE("smartphone use while walking is reported from S2") {
  const auto st = generate_stream(segs({{"walking+using_smartphone", 10}}), 64, 1, 0.0, 50.0, 2);
  const auto r = run(st);
  REQUIRE_FALSE(r.events.empty());
  CHECK(r.events[0].type == EventType::smartphone_distraction);
  CHECK(r.events[0].state == HState::S2);
  CHECK(r.counts.s3_calls == 0);
  CHECK(r.trace[0] == HState::S1);
  CHECK(r.trace[1] == HState::S2);
  CHECK(r.trace[2] == HState::S1);
}

TEST_CASE("walking while eating enters S3 and stays until reset") {
  const auto st = generate_stream(segs({{"walking+eating", 40}}), 64, 1, 0.0, 50.0, 3);
  const auto r = run(st, 10);
  CHECK(r.trace[0] == HState::S1);
  CHECK(r.trace[1] == HState::S2);
  for (int w = 2; w < 10; ++w) CHECK(r.trace[w] == HState::S3);
  CHECK(r.trace[10] == HState::S1);
  CHECK(r.counts.s3_calls == 4 * 8);
  CHECK(r.counts.s3_calls < 40);
  CHECK(r.events.size() <= r.counts.s3_calls);
  std::vector<Channel> all;
  for (int i = 0; i < kChannelCount; ++i) all.push_back(channel_from_index(i));
  const auto sets = window_sets(st.recording, all, 64, kDefaultCutoffHz);
  std::size_t expected = 0;
  for (std::size_t w = 0; w < sets.size(); ++w) {
    if (r.trace[w] == HState::S3) expected += fixture().s3.classify(sets[w], fixture().s3_cfg).first == kDistractedLabel;
  }
  CHECK(r.events.size() == expected);
  for (const auto& e : r.events) CHECK(e.type == EventType::distraction);
}

TEST_CASE("trace oracle agrees on a mixed stream") {
  const auto segments = random_segments(300, 9);
  const auto st = generate_stream(segments, 64, 1, 0.2, 50.0, 9);
  const auto& f = fixture();
  std::vector<Channel> all;
  for (int i = 0; i < kChannelCount; ++i) all.push_back(channel_from_index(i));
  const auto sets = window_sets(st.recording, all, 64, kDefaultCutoffHz);
  const auto models = f.models();
  std::vector<bool> moving, distracted;
  for (const auto& b : sets) {
    std::vector<std::vector<double>> phone(b.begin(), b.begin() + 6);
    moving.push_back(f.s1.classify(phone, f.s1_cfg).first == kMovingLabel);
    distracted.push_back(f.s3.classify(b, f.s3_cfg).first == kDistractedLabel);
  }
  // Hand replay of the state machine.
  int state = 1;
  std::size_t since = 0, s3_calls = 0, events = 0;
  for (std::size_t w = 0; w < sets.size(); ++w) {
    const bool phone_flag = st.smartphone_in_use[w];
    if (state == 1) {
      if (moving[w]) state = 2;
    } else if (state == 2) {
      if (phone_flag) {
        ++events;
        state = 1;
      } else {
        state = 3;
      }
    } else if (phone_flag) {
      ++events;
      state = 1;
    } else {
      ++s3_calls;
      events += distracted[w] ? 1 : 0;
    }
    if (++since == 30) {
      since = 0;
      state = 1;
    }
  }
  const auto r = run(st);
  CHECK(r.counts.s3_calls == s3_calls);
  CHECK(r.events.size() == events);
  CHECK(r.counts.watch_windows_processed == s3_calls);
  const auto again = run(st);
  CHECK(again.trace == r.trace);
}

TEST_CASE("missing or non-binary models are errors") {
  const auto& f = fixture();
  auto m = f.models();
  m.s3.model = nullptr;
  CHECK_THROWS_AS(validate_models(m), ConfigError);
  m = f.models();
  m.s1.positive = "walking";
  CHECK_THROWS_AS(validate_models(m), ConfigError);
  CorpusSpec spec;
  spec.participants = 1;
  spec.duration_s = 21.0;
  spec.activities = {ActivityLabel::parse("standing"), ActivityLabel::parse("walking"), ActivityLabel::parse("running")};
  PipelineConfig c;
  c.window_size = 64;
  const auto three = train_model(generate_corpus(spec), c, ModelSpec{}, TrainTask::full, {}, 7);
  m = f.models();
  m.s1.model = &three;
  CHECK_THROWS_AS(validate_models(m), ConfigError);
}

TEST_CASE("context length must match the window count") {
  const auto st = generate_stream(segs({{"standing", 5}}), 64, 1, 0.0, 50.0, 1);
  CHECK_THROWS_AS(replay(st.recording, std::vector<bool>(4, false), fixture().models(), 64, 10.0), AlignmentError);
}

TEST_CASE("event log and context csv formats") {
  DistractionEvent e{7, HState::S3, EventType::distraction, "distracted", 0.5};
  const auto j = nlohmann::json::parse(event_json(e));
  CHECK(j["window_index"] == 7);
  CHECK(j["state"] == "S3");
  CHECK(j["event_type"] == "distraction");
  CHECK(j["label"] == "distracted");
  CHECK(j["score"] == 0.5);
  std::stringstream ss;
  write_context_csv(ss, {true, false, true});
  CHECK(read_context_csv(ss) == std::vector<bool>{true, false, true});
  std::stringstream bad("window_index,smartphone_in_use\n0,1\n2,0\n");
  try {
    read_context_csv(bad);
    FAIL("expected parse error");
  } catch (const ParseError& err) {
    CHECK(err.line() == 3);
  }
}
