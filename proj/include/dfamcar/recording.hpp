#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dfamcar/common.hpp"
#include "dfamcar/signal.hpp"

namespace dfamcar {

/// One timestamped three-axis sample from a (device, sensor) stream.
struct SensorRecord {
  double timestamp_ms = 0.0;
  Device device = Device::phone;
  Sensor sensor = Sensor::accelerometer;
  double x = 0.0, y = 0.0, z = 0.0;
};

/// A recording session: up to twelve axis streams sampled at one rate.
/// Streams are indexed by Channel::canonical_index().
struct Recording {
  double sample_rate_hz = kDefaultSampleRateHz;
  std::array<std::vector<double>, kChannelCount> streams;

  bool has(Channel c) const { return !streams[static_cast<std::size_t>(c.canonical_index())].empty(); }
  const std::vector<double>& stream(Channel c) const {
    return streams[static_cast<std::size_t>(c.canonical_index())];
  }
  std::vector<double>& stream(Channel c) { return streams[static_cast<std::size_t>(c.canonical_index())]; }
  TimeSeries series(Channel c) const { return TimeSeries{c, sample_rate_hz, stream(c)}; }
  /// Samples available on every one of the given channels.
  std::size_t common_length(std::span<const Channel> channels) const;
};

inline constexpr const char* kRecordingCsvHeader = "timestamp_ms,device,sensor,x,y,z";

/// Reads the recording CSV format. Timestamps must be non-decreasing per
/// (device, sensor) stream; samples are taken as uniformly spaced at
/// `sample_rate_hz` regardless of timestamp jitter.
Recording read_recording_csv(std::istream& in, double sample_rate_hz = kDefaultSampleRateHz);
Recording read_recording_csv(const std::filesystem::path& path, double sample_rate_hz = kDefaultSampleRateHz);

/// Writes every present stream, interleaved by sample index in the order
/// phone.acc, phone.gyr, watch.acc, watch.gyr.
void write_recording_csv(std::ostream& out, const Recording& rec);
void write_recording_csv(const std::filesystem::path& path, const Recording& rec);

}  // namespace dfamcar
