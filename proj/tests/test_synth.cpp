#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dfamcar/dfam.hpp"
#include "dfamcar/features.hpp"
#include "dfamcar/pipeline.hpp"
#include "dfamcar/synth.hpp"

using namespace dfamcar;
namespace fs = std::filesystem;

namespace {

std::string csv_of(const Recording& r) {
  std::ostringstream out;
  write_recording_csv(out, r);
  return out.str();
}

double mean_of_stream(const Recording& r, int ci) { return mean_of(r.streams[ci]); }

}  // namespace

TEST_CASE("study activities are 6 simple and 18 concurrent in canonical order") {
  const auto& a = study_activities();
  REQUIRE(a.size() == 24);
  std::size_t simple = 0;
  for (const auto& l : a) simple += l.distraction ? 0 : 1;
  CHECK(simple == 6);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(a.front().name() == "standing");
  CHECK(ActivityLabel::parse("walking+eating").name() == "walking+eating");
  CHECK_THROWS_AS(ActivityLabel::parse("flying"), ConfigError);
  CHECK(ActivityLabel::parse("running+reading").is_distracted_pedestrian());
  CHECK_FALSE(ActivityLabel::parse("sitting+eating").is_distracted_pedestrian());
}

TEST_CASE("same seed gives an identical recording") {
  const auto p = default_profile(ActivityLabel::parse("walking+drinking"), 2, 0.3);
  CHECK(csv_of(generate(p, 12.0, 50.0, 5)) == csv_of(generate(p, 12.0, 50.0, 5)));
  CHECK(csv_of(generate(p, 12.0, 50.0, 5)) != csv_of(generate(p, 12.0, 50.0, 6)));
}

TEST_CASE("a single walking tone dominates every phone axis") {
  ActivityProfile p;
  p.label = ActivityLabel::parse("walking");
  for (int ci = 0; ci < 6; ++ci) p.components[ci] = {{2.0, 1.0, 0.0}};
  const auto rec = generate(p, 30.0, 50.0, 1);
  const auto layout = BinLayout::equal_width(1, 50.0);
  for (int ci = 0; ci < 6; ++ci) {
    const auto ws = segment(rec.series(channel_from_index(ci)), 128);
    for (const auto& w : ws) {
      const Spectrum s = spectrum(w, 50.0);
      const auto sig = extract_signature(std::span<const Spectrum>(&s, 1), layout);
      CHECK(sig.axis(0)[0] == 5);  // 2 Hz * 128 / 50 = 5.12
    }
  }
}

TEST_CASE("components at or above nyquist are rejected") {
  ActivityProfile p;
  p.components[0] = {{25.0, 1.0, 0.0}};
  CHECK_THROWS_AS(generate(p, 30.0, 50.0, 1), ConfigError);
  ActivityProfile ok;
  CHECK_THROWS_AS(generate(ok, 0.0, 50.0, 1), ConfigError);
}

TEST_CASE("mirrored placements swap channel statistics") {
  const auto label = ActivityLabel::parse("walking+eating");
  const auto rl = generate(default_profile(label, 1, 0.0, Placement::RL), 20.0, 50.0, 3);
  const auto lr = generate(default_profile(label, 1, 0.0, Placement::LR), 20.0, 50.0, 3);
  const auto rr = generate(default_profile(label, 1, 0.0, Placement::RR), 20.0, 50.0, 3);
  // Watch on the left in LR: acceleration x flips.
  const int watch_acc_x = Channel{Device::watch, Sensor::accelerometer, Axis::x}.canonical_index();
  const int phone_gyr_y = Channel{Device::phone, Sensor::gyroscope, Axis::y}.canonical_index();
  for (std::size_t i = 0; i < rr.streams[watch_acc_x].size(); ++i) {
    CHECK(lr.streams[watch_acc_x][i] == -rr.streams[watch_acc_x][i]);
    CHECK(rl.streams[phone_gyr_y][i] == -rr.streams[phone_gyr_y][i]);
  }
  CHECK(mean_of_stream(rl, watch_acc_x) == doctest::Approx(-mean_of_stream(lr, watch_acc_x)));
  CHECK(mirrored(Placement::RL) == Placement::LR);
  CHECK(mirrored(Placement::RR) == Placement::LL);
}

TEST_CASE("default corpus shape and determinism") {
  CorpusSpec spec;
  spec.duration_s = 21.0;
  const auto a = generate_corpus(spec);
  CHECK(a.recordings.size() == 5 * 24);
  CHECK(a.recordings.front().id == "rec0001");
  CHECK(a.recordings.front().participant == 1);
  CHECK(a.recordings[24].placement == Placement::LL);
  CHECK(a.recordings[0].placement == Placement::RR);
  const auto b = generate_corpus(spec);
  for (std::size_t i = 0; i < a.recordings.size(); i += 17) {
    CHECK(csv_of(a.recordings[i].recording) == csv_of(b.recordings[i].recording));
  }
}

TEST_CASE("class signatures rarely collide on the noise-free corpus") {
  CorpusSpec spec;
  spec.duration_s = 21.0;
  const auto corpus = generate_corpus(spec);
  const auto layout = BinLayout::equal_width(3, 50.0);
  std::map<std::vector<std::uint32_t>, std::set<std::string>> owners;
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> all;
  for (const auto& r : corpus.recordings) {
    std::vector<std::vector<double>> chans;
    for (int ci = 0; ci < kChannelCount; ++ci) chans.push_back(low_pass_filter(r.recording.series(channel_from_index(ci))).values);
    for (std::size_t w = 0; (w + 1) * 128 <= chans[0].size(); ++w) {
      std::vector<std::vector<double>> win;
      for (auto& c : chans) win.emplace_back(c.begin() + w * 128, c.begin() + (w + 1) * 128);
      const auto s = signature_of(win, layout);
      std::vector<std::uint32_t> flat;
      for (std::size_t a = 0; a < s.axes(); ++a) flat.insert(flat.end(), s.axis(a).begin(), s.axis(a).end());
      owners[flat].insert(r.label.name());
      all.emplace_back(r.label.name(), flat);
    }
  }
  std::size_t collide = 0;
  for (const auto& [label, flat] : all) collide += owners[flat].size() > 1 ? 1 : 0;
  CHECK(static_cast<double>(collide) / static_cast<double>(all.size()) < 0.01);
}

TEST_CASE("class feature means differ") {
  CorpusSpec spec;
  spec.duration_s = 21.0;
  spec.participants = 2;
  const auto corpus = generate_corpus(spec);
  PipelineConfig c;
  const auto table = build_instances(corpus, c);
  const auto data = instance_features(table, c);
  const std::size_t f = data.feature_count(), nl = data.labels.size();
  std::vector<std::vector<double>> mu(nl, std::vector<double>(f, 0.0));
  std::vector<std::size_t> n(nl, 0);
  std::vector<double> all_mean(f, 0.0), sd(f, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++n[data.targets[i]];
    for (std::size_t j = 0; j < f; ++j) {
      mu[data.targets[i]][j] += data.rows[i].values[j];
      all_mean[j] += data.rows[i].values[j] / static_cast<double>(data.size());
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < f; ++j) sd[j] += std::pow(data.rows[i].values[j] - all_mean[j], 2) / static_cast<double>(data.size());
  }
  for (std::size_t l = 0; l < nl; ++l) {
    for (auto& m : mu[l]) m /= static_cast<double>(n[l]);
  }
  for (std::size_t a = 0; a < nl; ++a) {
    for (std::size_t b = a + 1; b < nl; ++b) {
      double gap = 0;
      for (std::size_t j = 0; j < f; ++j) {
        if (sd[j] > 0) gap = std::max(gap, std::abs(mu[a][j] - mu[b][j]) / std::sqrt(sd[j]));
      }
      CHECK(gap > 0.5);
    }
  }
}

TEST_CASE("corpus round trips through disk") {
  CorpusSpec spec;
  spec.duration_s = 21.0;
  spec.participants = 1;
  spec.activities = {ActivityLabel::parse("walking"), ActivityLabel::parse("sitting+reading")};
  const auto corpus = generate_corpus(spec);
  const auto dir = fs::temp_directory_path() / "dfamcar_corpus_rt";
  fs::remove_all(dir);
  write_corpus(corpus, dir);
  const auto back = read_corpus(dir);
  REQUIRE(back.recordings.size() == 2);
  CHECK(back.recordings[1].label.name() == "sitting+reading");
  CHECK(csv_of(back.recordings[1].recording) == csv_of(corpus.recordings[1].recording));
  {
    std::ofstream bad(dir / "labels.csv");
    bad << "recording_id,participant_id,label,placement\nrec0001,1,walking\n";
  }
  try {
    read_corpus(dir);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  fs::remove_all(dir);
}

TEST_CASE("streams carry per-window truth and context") {
  const auto segs = random_segments(200, 4);
  std::size_t total = 0;
  for (const auto& s : segs) {
    total += s.windows;
    CHECK(s.smartphone_in_use == (s.label.distraction == Distraction::using_smartphone));
  }
  CHECK(total == 200);
  const auto st = generate_stream(segs, 64, 1, 0.0, 50.0, 4);
  CHECK(st.truth.size() == 200);
  CHECK(st.smartphone_in_use.size() == 200);
  CHECK(st.recording.streams[0].size() == 200 * 64);
}
