#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dfamcar/activity.hpp"
#include "dfamcar/recording.hpp"

namespace dfamcar {

/// Device placement: first letter is the watch wrist, second the phone
/// pocket (R = right, L = left).
enum class Placement { RR, LL, RL, LR };
std::string_view to_string(Placement p);
Placement parse_placement(std::string_view s);
/// Same scenario seen in a mirror: RL <-> LR, RR <-> LL.
Placement mirrored(Placement p);

struct Component {
  double frequency_hz = 0.0;
  double amplitude = 0.0;
  double phase_jitter_std = 0.0;  // radians
};

struct ActivityProfile {
  ActivityLabel label;
  std::array<std::vector<Component>, kChannelCount> components;  // by canonical channel index
  std::array<double, kChannelCount> offset{};                     // constant term, e.g. gravity
  double noise_std = 0.0;
  Placement placement = Placement::RR;
};

inline constexpr std::size_t kMaxWindowSize = 512;

/// Sum of sinusoids plus Gaussian noise on all twelve channels. Phase jitter
/// is drawn once per second and linearly interpolated. Devices worn on the
/// left side are mirrored: acceleration x and angular velocity y, z flip sign.
Recording generate(const ActivityProfile& profile, double duration_s, double sample_rate_hz, std::uint64_t seed);

/// Default profile bank entry for an activity and synthetic participant.
ActivityProfile default_profile(const ActivityLabel& label, std::size_t participant, double noise_std = 0.0,
                                Placement placement = Placement::RR);

struct CorpusSpec {
  std::size_t participants = 5;
  double duration_s = 30.0;
  double sample_rate_hz = kDefaultSampleRateHz;
  double noise_std = 0.0;
  std::uint64_t seed = 7;
  std::vector<ActivityLabel> activities = study_activities();
};

struct CorpusRecording {
  std::string id;
  std::size_t participant = 0;
  ActivityLabel label;
  Placement placement = Placement::RR;
  Recording recording;
};

struct Corpus {
  std::vector<CorpusRecording> recordings;
};

/// Placement assigned to synthetic participant 1, 2, ... (cycles RR, LL, RL, LR).
Placement participant_placement(std::size_t participant);

Corpus generate_corpus(const CorpusSpec& spec);

inline constexpr const char* kLabelsCsvHeader = "recording_id,participant_id,label,placement";

/// Writes labels.csv and recordings/<id>.csv under `dir`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus(const std::filesystem::path& dir, double sample_rate_hz = kDefaultSampleRateHz);

struct StreamSegment {
  ActivityLabel label;
  std::size_t windows = 1;
  bool smartphone_in_use = false;
};

struct Stream {
  Recording recording;
  std::vector<bool> smartphone_in_use;  // per window
  std::vector<ActivityLabel> truth;     // per window
};

/// Concatenates segments of whole windows of size W.
Stream generate_stream(const std::vector<StreamSegment>& segments, std::size_t window_size, std::size_t participant,
                       double noise_std, double sample_rate_hz, std::uint64_t seed);

/// Seeded mixed stream of `windows` windows drawn from the study activities.
std::vector<StreamSegment> random_segments(std::size_t windows, std::uint64_t seed);

}  // namespace dfamcar
