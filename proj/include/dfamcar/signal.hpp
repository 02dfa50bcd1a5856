#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dfamcar/common.hpp"

namespace dfamcar {

inline constexpr double kDefaultSampleRateHz = 50.0;
inline constexpr double kDefaultCutoffHz = 10.0;

/// A single uniformly sampled axis stream.
struct TimeSeries {
  Channel channel;
  double sample_rate_hz = kDefaultSampleRateHz;
  std::vector<double> values;
};

/// A block of W consecutive samples cut from a TimeSeries.
struct Window {
  Channel channel;
  std::size_t index = 0;
  std::vector<double> values;
};

/// Magnitudes of the non-negative DFT frequencies of one window.
struct Spectrum {
  std::vector<double> bin_magnitudes;  // W/2 + 1 entries
  double bin_width_hz = 0.0;
  std::size_t window_size = 0;
  double sample_rate_hz = 0.0;
};

/// Second-order Butterworth low-pass section (direct form II transposed).
struct Biquad {
  double b0, b1, b2, a1, a2;

  static Biquad butterworth_low_pass(double cutoff_hz, double sample_rate_hz);
  /// |H(e^{jw})| at the given frequency.
  double magnitude_at(double freq_hz, double sample_rate_hz) const;
};

/// Low-pass filters a series. The filter state is initialised to the steady
/// state of the first sample so a constant input produces a constant output.
TimeSeries low_pass_filter(const TimeSeries& series, double cutoff_hz = kDefaultCutoffHz);

/// Splits a series into floor(len / W) disjoint windows; the tail is dropped.
std::vector<Window> segment(const TimeSeries& series, std::size_t window_size);

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_in_place(std::span<std::complex<double>> data);

/// Full complex DFT of a real block via FFT.
std::vector<std::complex<double>> dft(std::span<const double> samples);

Spectrum spectrum(std::span<const double> samples, double sample_rate_hz);
inline Spectrum spectrum(const Window& window, double sample_rate_hz) {
  return spectrum(window.values, sample_rate_hz);
}

void require_finite(std::span<const double> values, const char* what);

}  // namespace dfamcar
