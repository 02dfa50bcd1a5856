#include "dfamcar/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "dfamcar/rng.hpp"
#include "dfamcar/text.hpp"

namespace dfamcar {

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::RR: return "RR";
    case Placement::LL: return "LL";
    case Placement::RL: return "RL";
    case Placement::LR: return "LR";
  }
  return "?";
}

Placement parse_placement(std::string_view s) {
  if (s == "RR") return Placement::RR;
  if (s == "LL") return Placement::LL;
  if (s == "RL") return Placement::RL;
  if (s == "LR") return Placement::LR;
  throw ConfigError("unknown placement '" + std::string(s) + "'");
}

Placement mirrored(Placement p) {
  switch (p) {
    case Placement::RR: return Placement::LL;
    case Placement::LL: return Placement::RR;
    case Placement::RL: return Placement::LR;
    case Placement::LR: return Placement::RL;
  }
  return p;
}

namespace {

bool on_left(Placement p, Device d) {
  const auto text = to_string(p);
  return text[d == Device::watch ? 0 : 1] == 'L';
}

bool flips_when_mirrored(const Channel& c) {
  return c.sensor == Sensor::accelerometer ? c.axis == Axis::x : c.axis != Axis::x;
}

}  // namespace

Recording generate(const ActivityProfile& profile, double duration_s, double sample_rate_hz, std::uint64_t seed) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (!(duration_s > 0.0)) throw ConfigError("duration must be positive");
  if (!(profile.noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
  for (const auto& comps : profile.components) {
    for (const auto& c : comps) {
      if (!(c.frequency_hz >= 0.0 && c.frequency_hz < sample_rate_hz / 2.0)) {
        throw ConfigError("component at " + format_double(c.frequency_hz) + " Hz is not below the Nyquist frequency " +
                          format_double(sample_rate_hz / 2.0) + " Hz");
      }
    }
  }

  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  const std::size_t knots = static_cast<std::size_t>(std::ceil(duration_s)) + 2;
  Rng rng(seed);
  Recording rec;
  rec.sample_rate_hz = sample_rate_hz;
  for (int ci = 0; ci < kChannelCount; ++ci) {
    auto& values = rec.streams[static_cast<std::size_t>(ci)];
    values.assign(n, profile.offset[static_cast<std::size_t>(ci)]);
    for (const auto& comp : profile.components[static_cast<std::size_t>(ci)]) {
      const double phase0 = 2.0 * std::numbers::pi * rng.uniform();
      std::vector<double> jitter(knots);
      for (auto& j : jitter) j = comp.phase_jitter_std * rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        const auto k = static_cast<std::size_t>(t);
        const double frac = t - static_cast<double>(k);
        const double phase = phase0 + jitter[k] + frac * (jitter[k + 1] - jitter[k]);
        values[i] += comp.amplitude * std::sin(2.0 * std::numbers::pi * comp.frequency_hz * t + phase);
      }
    }
    if (profile.noise_std > 0.0) {
      for (auto& v : values) v += profile.noise_std * rng.normal();
    }
    const Channel ch = channel_from_index(ci);
    if (on_left(profile.placement, ch.device) && flips_when_mirrored(ch)) {
      for (auto& v : values) v = -v;
    }
  }
  return rec;
}

namespace {

struct Tones {
  std::array<double, 3> freq;
  std::array<double, 3> amp;
};

// One dominant tone per equal-width band of (0, 25] Hz: a fundamental plus
// two higher components standing in for impact harmonics.
Tones locomotion_tones(Locomotion l) {
  switch (l) {
    case Locomotion::standing: return {{0.4, 9.5, 17.0}, {0.3, 0.15, 0.12}};
    case Locomotion::walking: return {{2.0, 10.0, 18.0}, {2.5, 1.5, 1.2}};
    case Locomotion::climbing_stairs: return {{1.6, 11.2, 19.2}, {2.5, 1.5, 1.2}};
    case Locomotion::descending_stairs: return {{1.8, 14.4, 23.4}, {2.5, 1.5, 1.2}};
    case Locomotion::sitting: return {{0.7, 12.5, 22.5}, {0.3, 0.15, 0.12}};
    case Locomotion::running: return {{3.0, 12.0, 21.0}, {4.0, 2.4, 1.9}};
  }
  return {};
}

Tones distraction_tones(Distraction d) {
  constexpr std::array<double, 3> amp = {2.0, 1.2, 1.0};
  switch (d) {
    case Distraction::using_smartphone: return {{0.5, 9.0, 17.5}, amp};
    case Distraction::reading: return {{0.3, 13.0, 22.0}, amp};
    case Distraction::eating: return {{1.2, 15.5, 20.0}, amp};
    case Distraction::drinking: return {{0.8, 8.9, 24.2}, amp};
  }
  return {};
}

constexpr std::array<double, 3> kAxisGain = {1.0, 0.7, 0.85};
constexpr double kGravity = 9.81;
constexpr double kPhaseJitter = 0.2;

}  // namespace

ActivityProfile default_profile(const ActivityLabel& label, std::size_t participant, double noise_std,
                                Placement placement) {
  ActivityProfile p;
  p.label = label;
  p.noise_std = noise_std;
  p.placement = placement;

  const double pi = static_cast<double>(participant % 5);
  const double freq_scale = 1.0 + 0.01 * (pi - 2.0);
  const double amp_scale = 1.0 + 0.025 * (static_cast<double>((participant * 7) % 5) - 2.0);

  const Tones loc = locomotion_tones(label.locomotion);
  for (int ci = 0; ci < kChannelCount; ++ci) {
    const Channel ch = channel_from_index(ci);
    const double sensor_gain = ch.sensor == Sensor::accelerometer ? 1.0 : 0.6;
    const double device_gain = ch.device == Device::phone ? 1.0 : 0.6;
    const auto axis = static_cast<std::size_t>(ch.axis);
    auto& comps = p.components[static_cast<std::size_t>(ci)];
    for (std::size_t b = 0; b < 3; ++b) {
      comps.push_back({loc.freq[b] * freq_scale, loc.amp[b] * sensor_gain * device_gain * kAxisGain[axis] * amp_scale,
                       kPhaseJitter});
    }
    if (label.distraction && ch.device == Device::watch) {
      const Tones dis = distraction_tones(*label.distraction);
      for (std::size_t b = 0; b < 3; ++b) {
        comps.push_back({dis.freq[b] * freq_scale, dis.amp[b] * sensor_gain * kAxisGain[(axis + 1) % 3] * amp_scale,
                         kPhaseJitter});
      }
    }
    if (ch.sensor == Sensor::accelerometer) {
      const Axis down = ch.device == Device::watch      ? Axis::z
                        : label.locomotion == Locomotion::sitting ? Axis::z
                                                                  : Axis::y;
      if (ch.axis == down) p.offset[static_cast<std::size_t>(ci)] = kGravity;
    }
  }
  return p;
}

Placement participant_placement(std::size_t participant) {
  constexpr Placement cycle[] = {Placement::RR, Placement::LL, Placement::RL, Placement::LR};
  return cycle[(participant + 3) % 4];
}

Corpus generate_corpus(const CorpusSpec& spec) {
  if (spec.participants < 1) throw ConfigError("corpus needs at least one participant");
  if (spec.duration_s < 2.0 * static_cast<double>(kMaxWindowSize) / spec.sample_rate_hz) {
    throw ConfigError("recording duration must cover two windows of the largest size");
  }
  Corpus corpus;
  std::size_t index = 0;
  for (std::size_t p = 0; p < spec.participants; ++p) {
    for (const auto& label : spec.activities) {
      CorpusRecording r;
      char id[32];
      std::snprintf(id, sizeof id, "rec%04zu", index + 1);
      r.id = id;
      r.participant = p + 1;
      r.label = label;
      r.placement = participant_placement(p + 1);
      r.recording = generate(default_profile(label, p + 1, spec.noise_std, r.placement), spec.duration_s,
                             spec.sample_rate_hz, derive_seed(spec.seed, index));
      corpus.recordings.push_back(std::move(r));
      ++index;
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "recordings", ec);
  if (ec) throw IoError("cannot create " + (dir / "recordings").string() + ": " + ec.message());
  std::ofstream labels(dir / "labels.csv", std::ios::binary);
  if (!labels) throw IoError("cannot write " + (dir / "labels.csv").string());
  labels << kLabelsCsvHeader << '\n';
  for (const auto& r : corpus.recordings) {
    labels << r.id << ',' << r.participant << ',' << r.label.name() << ',' << to_string(r.placement) << '\n';
    write_recording_csv(dir / "recordings" / (r.id + ".csv"), r.recording);
  }
  if (!labels) throw IoError("write failed for labels.csv");
}

Corpus read_corpus(const std::filesystem::path& dir, double sample_rate_hz) {
  const auto path = dir / "labels.csv";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing header");
  strip_cr(line);
  if (line != kLabelsCsvHeader) throw ParseError(path.string(), 1, "expected header '" + std::string(kLabelsCsvHeader) + "'");
  Corpus corpus;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw ParseError(path.string(), line_no, "expected 4 fields");
    CorpusRecording r;
    r.id = std::string(f[0]);
    const auto pid = try_parse_int(f[1]);
    if (!pid || *pid < 0) throw ParseError(path.string(), line_no, "invalid participant id");
    r.participant = static_cast<std::size_t>(*pid);
    try {
      r.label = ActivityLabel::parse(f[2]);
      r.placement = parse_placement(f[3]);
    } catch (const ConfigError& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    r.recording = read_recording_csv(dir / "recordings" / (r.id + ".csv"), sample_rate_hz);
    corpus.recordings.push_back(std::move(r));
  }
  return corpus;
}

Stream generate_stream(const std::vector<StreamSegment>& segments, std::size_t window_size, std::size_t participant,
                       double noise_std, double sample_rate_hz, std::uint64_t seed) {
  Stream s;
  s.recording.sample_rate_hz = sample_rate_hz;
  const Placement placement = participant_placement(participant);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    const double duration = static_cast<double>(seg.windows * window_size) / sample_rate_hz;
    const Recording part = generate(default_profile(seg.label, participant, noise_std, placement), duration,
                                    sample_rate_hz, derive_seed(seed, i));
    for (int c = 0; c < kChannelCount; ++c) {
      auto& dst = s.recording.streams[static_cast<std::size_t>(c)];
      const auto& src = part.streams[static_cast<std::size_t>(c)];
      dst.insert(dst.end(), src.begin(), src.end());
    }
    s.smartphone_in_use.insert(s.smartphone_in_use.end(), seg.windows, seg.smartphone_in_use);
    s.truth.insert(s.truth.end(), seg.windows, seg.label);
  }
  return s;
}

std::vector<StreamSegment> random_segments(std::size_t windows, std::uint64_t seed) {
  Rng rng(seed);
  const auto& acts = study_activities();
  std::vector<StreamSegment> out;
  std::size_t used = 0;
  while (used < windows) {
    StreamSegment seg;
    seg.label = acts[rng.index(acts.size())];
    seg.windows = std::min<std::size_t>(windows - used, 3 + rng.index(13));
    seg.smartphone_in_use = seg.label.distraction == Distraction::using_smartphone;
    used += seg.windows;
    out.push_back(seg);
  }
  return out;
}

}  // namespace dfamcar
