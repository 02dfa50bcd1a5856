#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dfamcar/common.hpp"

namespace dfamcar {

/// Ordered feature names, e.g. "phone.acc.x.mean" or "watch.gyr.roll_max".
using FeatureSchema = std::vector<std::string>;

struct FeatureVector {
  std::vector<double> values;
  std::uint64_t schema_id = 0;  // schema_hash of the producing schema
};

/// One aligned window per channel; all channels of a (device, sensor) pair
/// must be present as x, y, z in that order.
struct ChannelWindows {
  std::vector<Channel> channels;
  std::vector<std::vector<double>> windows;
};

/// Schema produced by extract_features for the given channel list.
FeatureSchema feature_schema(std::span<const Channel> channels);

/// Time and frequency domain features of one window set. Per axis: mean,
/// min, max, std, var, fft_energy, spectral_entropy. Per sensor: rms of the
/// 3-axis magnitude and the xy/yz/xz Pearson correlations. Accelerometers
/// add mean/median/max instantaneous speed; gyroscopes add mean/median/max
/// roll velocity (the x channel).
FeatureVector extract_features(const ChannelWindows& input, double sample_rate_hz);

/// Stable 64-bit FNV-1a hash of the schema names.
std::uint64_t schema_hash(const FeatureSchema& schema);

// Building blocks, exposed for testing.
double mean_of(std::span<const double> v);
double population_variance(std::span<const double> v);
double pearson(std::span<const double> a, std::span<const double> b);  // 0 if either is constant
double median_of(std::vector<double> v);
/// One-sided Parseval energy: equals sum of squared samples.
double fft_energy(std::span<const double> window);
/// Shannon entropy of the normalised magnitude spectrum / log(#bins), in [0,1].
double spectral_entropy(std::span<const double> window);
/// |v| where v is the running trapezoidal integral of the mean-removed
/// acceleration magnitude, starting at zero velocity.
std::vector<double> instantaneous_speed(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> z, double sample_rate_hz);

/// Writes a feature matrix with a header row `label,<schema...>`.
void write_feature_csv(std::ostream& out, const FeatureSchema& schema, std::span<const FeatureVector> rows,
                       std::span<const std::string> row_labels);

}  // namespace dfamcar
