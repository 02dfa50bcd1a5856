// Independent reference implementations used by the tests.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dfamcar/rng.hpp"

namespace oracle {

// Direct O(W^2) DFT magnitudes for k = 0..W/2, accumulated in long double.
inline std::vector<double> dft_magnitudes(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    long double re = 0, im = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const long double a = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * t) % n) /
                            static_cast<long double>(n);
      re += x[t] * std::cos(a);
      im += x[t] * std::sin(a);
    }
    out[k] = static_cast<double>(std::sqrt(re * re + im * im));
  }
  return out;
}

inline std::vector<double> tones(std::size_t n, double fs, const std::vector<std::pair<double, double>>& fa,
                                 double phase = 0.0) {
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto [f, a] : fa) x[i] += a * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / fs + phase);
  }
  return x;
}

inline std::vector<double> random_window(dfamcar::Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal() * 3.0 + rng.uniform();
  return x;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / scale;
}

}  // namespace oracle
