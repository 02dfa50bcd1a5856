#include "dfamcar/signal.hpp"

#include <cmath>
#include <numbers>

namespace dfamcar {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataQualityError(std::string(what) + ": non-finite sample at index " + std::to_string(i));
    }
  }
}

Biquad Biquad::butterworth_low_pass(double cutoff_hz, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0)) {
    throw ConfigError("low-pass cutoff must lie in (0, fs/2)");
  }
  // Bilinear transform with frequency prewarping, Q = 1/sqrt(2).
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  const double q = std::numbers::sqrt2 / 2.0;
  const double norm = 1.0 / (1.0 + k / q + k * k);
  Biquad f{};
  f.b0 = k * k * norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (k * k - 1.0) * norm;
  f.a2 = (1.0 - k / q + k * k) * norm;
  return f;
}

double Biquad::magnitude_at(double freq_hz, double sample_rate_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

TimeSeries low_pass_filter(const TimeSeries& series, double cutoff_hz) {
  require_finite(series.values, "low_pass_filter");
  const Biquad f = Biquad::butterworth_low_pass(cutoff_hz, series.sample_rate_hz);

  TimeSeries out{series.channel, series.sample_rate_hz, {}};
  out.values.resize(series.values.size());
  if (series.values.empty()) return out;

  // Steady state for a constant input x0 (unit DC gain): y = x0.
  const double x0 = series.values.front();
  double s1 = x0 * (1.0 - f.b0);
  double s2 = x0 * (f.b2 - f.a2);
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double x = series.values[i];
    const double y = f.b0 * x + s1;
    s1 = f.b1 * x - f.a1 * y + s2;
    s2 = f.b2 * x - f.a2 * y;
    out.values[i] = y;
  }
  return out;
}

std::vector<Window> segment(const TimeSeries& series, std::size_t window_size) {
  if (window_size < 2) throw ConfigError("window size must be at least 2");
  if (series.values.size() < window_size) {
    throw EmptyResultError("series of " + std::to_string(series.values.size()) +
                           " samples is shorter than one window of " + std::to_string(window_size));
  }
  const std::size_t count = series.values.size() / window_size;
  std::vector<Window> windows;
  windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto first = series.values.begin() + static_cast<std::ptrdiff_t>(i * window_size);
    windows.push_back(Window{series.channel, i, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(window_size))});
  }
  return windows;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

// Twiddles exp(-2*pi*i*k/n) for k < n/2, each evaluated directly; a running
// product drifts past 1e-12 at 512.
const std::vector<std::complex<double>>& twiddles(std::size_t n) {
  thread_local std::vector<std::vector<std::complex<double>>> cache;
  std::size_t log = 0;
  while ((std::size_t{1} << log) < n) ++log;
  if (cache.size() <= log) cache.resize(log + 1);
  auto& t = cache[log];
  if (t.empty() && n >= 2) {
    t.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      t[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }
  }
  return t;
}

}  // namespace

void fft_in_place(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw ConfigError("FFT size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const auto& tw = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> u = data[start + k];
        const std::complex<double> v = data[start + k + half] * tw[k * stride];
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> dft(std::span<const double> samples) {
  std::vector<std::complex<double>> buf(samples.begin(), samples.end());
  fft_in_place(buf);
  return buf;
}

Spectrum spectrum(std::span<const double> samples, double sample_rate_hz) {
  const std::size_t w = samples.size();
  if (!is_power_of_two(w) || w < 2) {
    throw ConfigError("window size " + std::to_string(w) + " is not a power of two");
  }
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  require_finite(samples, "spectrum");

  const auto coeffs = dft(samples);
  Spectrum s;
  s.window_size = w;
  s.sample_rate_hz = sample_rate_hz;
  s.bin_width_hz = sample_rate_hz / static_cast<double>(w);
  s.bin_magnitudes.resize(w / 2 + 1);
  for (std::size_t k = 0; k <= w / 2; ++k) s.bin_magnitudes[k] = std::abs(coeffs[k]);
  return s;
}

}  // namespace dfamcar
