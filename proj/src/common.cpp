#include "dfamcar/common.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace dfamcar {

std::string_view to_string(Device d) { return d == Device::phone ? "phone" : "watch"; }
std::string_view to_string(Sensor s) { return s == Sensor::accelerometer ? "acc" : "gyr"; }
std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

Device parse_device(std::string_view s) {
  if (s == "phone") return Device::phone;
  if (s == "watch") return Device::watch;
  throw ConfigError("unknown device '" + std::string(s) + "'");
}

Sensor parse_sensor(std::string_view s) {
  if (s == "acc") return Sensor::accelerometer;
  if (s == "gyr") return Sensor::gyroscope;
  throw ConfigError("unknown sensor '" + std::string(s) + "'");
}

std::string Channel::name() const {
  std::string out(to_string(device));
  out += '.';
  out += to_string(sensor);
  out += '.';
  out += to_string(axis);
  return out;
}

int Channel::canonical_index() const {
  return static_cast<int>(device) * 6 + static_cast<int>(sensor) * 3 + static_cast<int>(axis);
}

Channel channel_from_index(int i) {
  if (i < 0 || i >= kChannelCount) throw ConfigError("channel index out of range");
  return Channel{static_cast<Device>(i / 6), static_cast<Sensor>((i / 3) % 2), static_cast<Axis>(i % 3)};
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error(ErrorKind::io, "cannot format number");
  return std::string(buf.data(), ptr);
}

std::optional<double> try_parse_double(std::string_view s) {
  // from_chars rejects a leading '+', accept it for hand-written files.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> try_parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

double parse_double(std::string_view s) {
  auto v = try_parse_double(s);
  if (!v) throw ConfigError("invalid number '" + std::string(s) + "'");
  return *v;
}

long long parse_int(std::string_view s) {
  auto v = try_parse_int(s);
  if (!v) throw ConfigError("invalid integer '" + std::string(s) + "'");
  return *v;
}

}  // namespace dfamcar
