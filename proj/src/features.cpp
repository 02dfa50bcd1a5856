#include "dfamcar/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dfamcar/signal.hpp"

namespace dfamcar {

namespace {

constexpr const char* kAxisFeatures[] = {"mean", "min", "max", "std", "var", "fft_energy", "spectral_entropy"};
constexpr const char* kSensorFeatures[] = {"rms", "corr_xy", "corr_yz", "corr_xz"};
constexpr const char* kSpeedFeatures[] = {"speed_mean", "speed_median", "speed_max"};
constexpr const char* kRollFeatures[] = {"roll_mean", "roll_median", "roll_max"};

std::string sensor_prefix(const Channel& c) {
  return std::string(to_string(c.device)) + "." + std::string(to_string(c.sensor));
}

void check_triplets(std::span<const Channel> channels) {
  if (channels.empty() || channels.size() % 3 != 0) {
    throw AlignmentError("feature extraction needs whole x,y,z channel triplets");
  }
  for (std::size_t i = 0; i < channels.size(); i += 3) {
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& c = channels[i + a];
      if (c.device != channels[i].device || c.sensor != channels[i].sensor || c.axis != static_cast<Axis>(a)) {
        throw AlignmentError("channels must be grouped as x,y,z per (device, sensor)");
      }
    }
  }
}

}  // namespace

FeatureSchema feature_schema(std::span<const Channel> channels) {
  check_triplets(channels);
  FeatureSchema schema;
  for (std::size_t i = 0; i < channels.size(); i += 3) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (const char* f : kAxisFeatures) schema.push_back(channels[i + a].name() + "." + f);
    }
    const auto prefix = sensor_prefix(channels[i]);
    for (const char* f : kSensorFeatures) schema.push_back(prefix + "." + f);
    const auto& extra = channels[i].sensor == Sensor::accelerometer ? kSpeedFeatures : kRollFeatures;
    for (const char* f : extra) schema.push_back(prefix + "." + f);
  }
  return schema;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

double energy_from(const Spectrum& s) {
  const std::size_t w = s.window_size;
  double e = 0.0;
  for (std::size_t k = 0; k <= w / 2; ++k) {
    const double m2 = s.bin_magnitudes[k] * s.bin_magnitudes[k];
    e += (k == 0 || k == w / 2) ? m2 : 2.0 * m2;
  }
  return e / static_cast<double>(w);
}

double entropy_from(const Spectrum& s) {
  const auto& mags = s.bin_magnitudes;
  double total = 0.0;
  for (double m : mags) total += m;
  if (total <= 0.0 || mags.size() < 2) return 0.0;
  double h = 0.0;
  for (double m : mags) {
    const double p = m / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(mags.size())), 0.0, 1.0);
}

}  // namespace

double fft_energy(std::span<const double> window) { return energy_from(spectrum(window, 1.0)); }
double spectral_entropy(std::span<const double> window) { return entropy_from(spectrum(window, 1.0)); }

std::vector<double> instantaneous_speed(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> z, double sample_rate_hz) {
  const std::size_t n = x.size();
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  const double m = mean_of(mag);
  const double dt = 1.0 / sample_rate_hz;
  std::vector<double> speed(n, 0.0);
  double v = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    v += 0.5 * ((mag[i - 1] - m) + (mag[i] - m)) * dt;
    speed[i] = std::abs(v);
  }
  return speed;
}

FeatureVector extract_features(const ChannelWindows& input, double sample_rate_hz) {
  check_triplets(input.channels);
  if (input.windows.size() != input.channels.size()) throw AlignmentError("one window per channel required");
  const std::size_t w = input.windows.front().size();
  for (const auto& win : input.windows) {
    if (win.size() != w || w < 2) throw AlignmentError("channel windows differ in length");
    require_finite(win, "extract_features");
  }

  FeatureVector fv;
  thread_local std::vector<Channel> cached_channels;
  thread_local std::uint64_t cached_id = 0;
  if (cached_channels != input.channels) {
    cached_id = schema_hash(feature_schema(input.channels));
    cached_channels = input.channels;
  }
  fv.schema_id = cached_id;
  auto& out = fv.values;
  for (std::size_t i = 0; i < input.channels.size(); i += 3) {
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& win = input.windows[i + a];
      const auto [mn, mx] = std::minmax_element(win.begin(), win.end());
      const double var = population_variance(win);
      const Spectrum s = spectrum(win, sample_rate_hz);
      out.push_back(mean_of(win));
      out.push_back(*mn);
      out.push_back(*mx);
      out.push_back(std::sqrt(var));
      out.push_back(var);
      out.push_back(energy_from(s));
      out.push_back(entropy_from(s));
    }
    const auto& x = input.windows[i];
    const auto& y = input.windows[i + 1];
    const auto& z = input.windows[i + 2];
    double sq = 0.0;
    for (std::size_t k = 0; k < w; ++k) sq += x[k] * x[k] + y[k] * y[k] + z[k] * z[k];
    out.push_back(std::sqrt(sq / static_cast<double>(w)));
    out.push_back(pearson(x, y));
    out.push_back(pearson(y, z));
    out.push_back(pearson(x, z));

    const std::vector<double> series = input.channels[i].sensor == Sensor::accelerometer
                                           ? instantaneous_speed(x, y, z, sample_rate_hz)
                                           : x;
    out.push_back(mean_of(series));
    out.push_back(median_of(series));
    out.push_back(*std::max_element(series.begin(), series.end()));
  }
  return fv;
}

std::uint64_t schema_hash(const FeatureSchema& schema) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& name : schema) {
    for (char c : name) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

void write_feature_csv(std::ostream& out, const FeatureSchema& schema, std::span<const FeatureVector> rows,
                       std::span<const std::string> row_labels) {
  out << "label";
  for (const auto& n : schema) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << (r < row_labels.size() ? row_labels[r] : std::string());
    for (double v : rows[r].values) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace dfamcar
