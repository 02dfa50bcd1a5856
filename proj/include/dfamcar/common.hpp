#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dfamcar {

enum class ErrorKind {
  config,
  data_quality,
  alignment,
  shape,
  training,
  parse,
  io,
  empty_result,
};

/// Base error for everything thrown by the library. The C API maps `kind()`
/// onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};
class DataQualityError : public Error {
 public:
  explicit DataQualityError(const std::string& what) : Error(ErrorKind::data_quality, what) {}
};
class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what) : Error(ErrorKind::alignment, what) {}
};
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what) : Error(ErrorKind::training, what) {}
};
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};
class EmptyResultError : public Error {
 public:
  explicit EmptyResultError(const std::string& what) : Error(ErrorKind::empty_result, what) {}
};

/// Parse failure carrying the 1-based line number of the offending input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& detail)
      : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + detail), line_(line), detail_(detail) {}
  ParseError(const std::string& source, std::size_t line, const std::string& detail)
      : Error(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + detail), line_(line), detail_(detail) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

enum class Device : std::uint8_t { phone, watch };
enum class Sensor : std::uint8_t { accelerometer, gyroscope };
enum class Axis : std::uint8_t { x, y, z };

std::string_view to_string(Device d);
std::string_view to_string(Sensor s);  // "acc" / "gyr"
std::string_view to_string(Axis a);
Device parse_device(std::string_view s);
Sensor parse_sensor(std::string_view s);

/// One (device, sensor, axis) stream.
struct Channel {
  Device device = Device::phone;
  Sensor sensor = Sensor::accelerometer;
  Axis axis = Axis::x;

  friend bool operator==(const Channel&, const Channel&) = default;
  std::string name() const;  // e.g. "phone.acc.x"
  /// Position in the canonical 12-channel layout (device, sensor, axis order).
  int canonical_index() const;
};

inline constexpr int kChannelCount = 12;
Channel channel_from_index(int canonical_index);

/// Round-trip exact text for a double (shortest representation).
std::string format_double(double v);
std::optional<double> try_parse_double(std::string_view s);
std::optional<long long> try_parse_int(std::string_view s);
/// Throwing variants for configuration values.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace dfamcar
