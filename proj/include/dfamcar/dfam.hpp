#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfamcar/signal.hpp"

namespace dfamcar {

/// Partition of (0, fs/2] into g frequency bins by g-1 interior boundaries.
struct BinLayout {
  int g = 1;
  std::vector<double> boundaries;  // g-1 strictly increasing values in (0, fs/2)
  double sample_rate_hz = kDefaultSampleRateHz;

  static BinLayout equal_width(int g, double sample_rate_hz = kDefaultSampleRateHz);
  void validate() const;
  /// Inclusive DFT index range [first, last] of each bin for window size W.
  /// Index k belongs to bin b when lower_b < k*fs/W <= upper_b, so the DC
  /// index never belongs to any bin.
  std::vector<std::pair<std::size_t, std::size_t>> index_ranges(std::size_t window_size) const;

  friend bool operator==(const BinLayout&, const BinLayout&) = default;
};

/// Dominant-frequency signature of one window set: for every axis, the DFT
/// index of the strongest component in each frequency bin.
class Signature {
 public:
  Signature() = default;
  Signature(std::size_t axes, std::size_t bins) : axes_(axes), bins_(bins), indices_(axes * bins, 0) {}

  std::size_t axes() const { return axes_; }
  std::size_t bins() const { return bins_; }
  std::span<const std::uint32_t> axis(std::size_t k) const { return {indices_.data() + k * bins_, bins_}; }
  std::span<std::uint32_t> axis(std::size_t k) { return {indices_.data() + k * bins_, bins_}; }
  bool axis_equal(const Signature& other, std::size_t k) const;

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  std::size_t axes_ = 0;
  std::size_t bins_ = 0;
  std::vector<std::uint32_t> indices_;
};

/// Per-bin argmax of each spectrum (DC excluded, ties to the lower index).
/// All spectra must share window size and sample rate with the layout.
Signature extract_signature(std::span<const Spectrum> spectra_per_axis, const BinLayout& layout);

/// Score of a training signature against a test signature: (c/s)^s where c is
/// the number of axes whose whole bin tuple matches.
double match_score(const Signature& test, const Signature& train);
std::size_t matching_axes(const Signature& test, const Signature& train);

struct LabeledSignature {
  std::size_t label = 0;  // index into the model's label list
  Signature signature;
};

/// s aligned windows (one per axis) with their label.
struct LabeledWindowSet {
  std::size_t label = 0;
  std::vector<std::vector<double>> windows;
};

struct DfamClassification {
  std::size_t label = 0;
  std::vector<double> scores;  // aggregate score per label
  bool no_match = false;       // every aggregate was zero
};

class DfamModel {
 public:
  BinLayout layout;
  std::size_t window_size = 0;
  std::size_t axes = 0;
  std::vector<std::string> labels;  // canonical order, used for tie-breaking
  std::vector<LabeledSignature> instances;

  std::vector<std::size_t> class_counts() const;
  DfamClassification classify(const Signature& test) const;

  void save(std::ostream& out) const;
  static DfamModel load(std::istream& in);
};

inline constexpr std::uint64_t kDefaultSeed = 7;

/// Builds a model from precomputed signatures. Every label must have at
/// least one instance; classes are downsampled uniformly at random to the
/// smallest class count.
DfamModel train_dfam(std::span<const LabeledSignature> data, std::vector<std::string> labels,
                     const BinLayout& layout, std::size_t window_size, std::uint64_t seed = kDefaultSeed);

/// Computes spectra and signatures for each window set, then trains.
DfamModel train_dfam(std::span<const LabeledWindowSet> data, std::vector<std::string> labels,
                     const BinLayout& layout, std::uint64_t seed = kDefaultSeed);

Signature signature_of(const std::vector<std::vector<double>>& windows, const BinLayout& layout);

}  // namespace dfamcar
