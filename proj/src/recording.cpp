#include "dfamcar/recording.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dfamcar/text.hpp"

namespace dfamcar {

std::size_t Recording::common_length(std::span<const Channel> channels) const {
  std::size_t n = std::numeric_limits<std::size_t>::max();
  for (const auto& c : channels) n = std::min(n, stream(c).size());
  return channels.empty() ? 0 : n;
}

Recording read_recording_csv(std::istream& in, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  Recording rec;
  rec.sample_rate_hz = sample_rate_hz;

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  strip_cr(line);
  if (line != kRecordingCsvHeader) {
    throw ParseError(line_no, "expected header '" + std::string(kRecordingCsvHeader) + "'");
  }

  std::array<double, 4> last_ts;
  last_ts.fill(-std::numeric_limits<double>::infinity());
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 6) throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));

    const auto ts = try_parse_double(fields[0]);
    if (!ts) throw ParseError(line_no, "invalid timestamp '" + std::string(fields[0]) + "'");
    Device device;
    Sensor sensor;
    try {
      device = parse_device(fields[1]);
      sensor = parse_sensor(fields[2]);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    std::array<double, 3> xyz{};
    for (int a = 0; a < 3; ++a) {
      const auto v = try_parse_double(fields[static_cast<std::size_t>(3 + a)]);
      if (!v) throw ParseError(line_no, "invalid sample value '" + std::string(fields[static_cast<std::size_t>(3 + a)]) + "'");
      if (!std::isfinite(*v)) throw DataQualityError("line " + std::to_string(line_no) + ": non-finite sample value");
      xyz[static_cast<std::size_t>(a)] = *v;
    }
    const std::size_t stream_id = static_cast<std::size_t>(device) * 2 + static_cast<std::size_t>(sensor);
    if (*ts < last_ts[stream_id]) throw ParseError(line_no, "timestamps decrease within a stream");
    last_ts[stream_id] = *ts;
    for (int a = 0; a < 3; ++a) {
      rec.stream(Channel{device, sensor, static_cast<Axis>(a)}).push_back(xyz[static_cast<std::size_t>(a)]);
    }
  }
  return rec;
}

Recording read_recording_csv(const std::filesystem::path& path, double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_recording_csv(in, sample_rate_hz);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.line(), e.detail());
  }
}

void write_recording_csv(std::ostream& out, const Recording& rec) {
  out << kRecordingCsvHeader << '\n';
  std::size_t n = 0;
  for (const auto& s : rec.streams) n = std::max(n, s.size());
  const double dt_ms = 1000.0 / rec.sample_rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    const double ts = static_cast<double>(i) * dt_ms;
    for (int d = 0; d < 2; ++d) {
      for (int s = 0; s < 2; ++s) {
        const Channel cx{static_cast<Device>(d), static_cast<Sensor>(s), Axis::x};
        if (rec.stream(cx).size() <= i) continue;
        out << format_double(ts) << ',' << to_string(cx.device) << ',' << to_string(cx.sensor);
        for (int a = 0; a < 3; ++a) {
          const auto& st = rec.stream(Channel{cx.device, cx.sensor, static_cast<Axis>(a)});
          out << ',' << format_double(i < st.size() ? st[i] : 0.0);
        }
        out << '\n';
      }
    }
  }
}

void write_recording_csv(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_recording_csv(out, rec);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace dfamcar
