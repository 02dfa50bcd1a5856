#include "dfamcar/dfam.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "dfamcar/rng.hpp"
#include "dfamcar/text.hpp"

namespace dfamcar {

BinLayout BinLayout::equal_width(int g, double sample_rate_hz) {
  if (g < 1) throw ConfigError("bin count g must be at least 1");
  BinLayout layout;
  layout.g = g;
  layout.sample_rate_hz = sample_rate_hz;
  const double nyquist = sample_rate_hz / 2.0;
  for (int i = 1; i < g; ++i) layout.boundaries.push_back(nyquist * i / g);
  layout.validate();
  return layout;
}

void BinLayout::validate() const {
  if (g < 1) throw ConfigError("bin count g must be at least 1");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (boundaries.size() != static_cast<std::size_t>(g - 1)) {
    throw ConfigError("bin layout needs g-1 = " + std::to_string(g - 1) + " boundaries");
  }
  double prev = 0.0;
  for (double u : boundaries) {
    if (!(u > prev) || !(u < sample_rate_hz / 2.0)) {
      throw ConfigError("bin boundaries must be strictly increasing inside (0, fs/2)");
    }
    prev = u;
  }
}

std::vector<std::pair<std::size_t, std::size_t>> BinLayout::index_ranges(std::size_t window_size) const {
  validate();
  const double fs = sample_rate_hz;
  const std::size_t top = window_size / 2;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t k = 1;
  for (int b = 0; b < g; ++b) {
    const double upper = b + 1 < g ? boundaries[static_cast<std::size_t>(b)] : fs / 2.0;
    const std::size_t first = k;
    while (k <= top && static_cast<double>(k) * fs / static_cast<double>(window_size) <= upper) ++k;
    if (k == first) {
      throw ConfigError("frequency bin " + std::to_string(b) + " holds no DFT index at W=" +
                        std::to_string(window_size));
    }
    ranges.emplace_back(first, k - 1);
  }
  return ranges;
}

bool Signature::axis_equal(const Signature& other, std::size_t k) const {
  const auto a = axis(k);
  const auto b = other.axis(k);
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

Signature extract_signature(std::span<const Spectrum> spectra, const BinLayout& layout) {
  if (spectra.empty()) throw AlignmentError("no spectra supplied");
  const std::size_t w = spectra.front().window_size;
  const double fs = spectra.front().sample_rate_hz;
  for (const auto& s : spectra) {
    if (s.window_size != w || s.sample_rate_hz != fs || s.bin_magnitudes.size() != w / 2 + 1) {
      throw AlignmentError("spectra differ in window size or sample rate");
    }
  }
  if (fs != layout.sample_rate_hz) throw AlignmentError("spectra sample rate does not match the bin layout");

  const auto ranges = layout.index_ranges(w);
  Signature sig(spectra.size(), ranges.size());
  for (std::size_t a = 0; a < spectra.size(); ++a) {
    const auto& mags = spectra[a].bin_magnitudes;
    auto out = sig.axis(a);
    for (std::size_t b = 0; b < ranges.size(); ++b) {
      std::size_t best = ranges[b].first;
      for (std::size_t k = ranges[b].first + 1; k <= ranges[b].second; ++k) {
        if (mags[k] > mags[best]) best = k;
      }
      out[b] = static_cast<std::uint32_t>(best);
    }
  }
  return sig;
}

std::size_t matching_axes(const Signature& test, const Signature& train) {
  if (test.axes() != train.axes() || test.bins() != train.bins()) {
    throw ShapeError("signature shapes differ (" + std::to_string(test.axes()) + "x" + std::to_string(test.bins()) +
                     " vs " + std::to_string(train.axes()) + "x" + std::to_string(train.bins()) + ")");
  }
  std::size_t c = 0;
  for (std::size_t k = 0; k < test.axes(); ++k) c += test.axis_equal(train, k) ? 1 : 0;
  return c;
}

namespace {
double score_for(std::size_t matched, std::size_t axes) {
  if (matched == 0) return 0.0;
  if (matched == axes) return 1.0;
  return std::pow(static_cast<double>(matched) / static_cast<double>(axes), static_cast<double>(axes));
}
}  // namespace

double match_score(const Signature& test, const Signature& train) {
  return score_for(matching_axes(test, train), test.axes());
}

std::vector<std::size_t> DfamModel::class_counts() const {
  std::vector<std::size_t> counts(labels.size(), 0);
  for (const auto& inst : instances) ++counts[inst.label];
  return counts;
}

DfamClassification DfamModel::classify(const Signature& test) const {
  if (instances.empty() || labels.empty()) throw TrainingError("DFAM model is empty");
  if (test.axes() != axes || test.bins() != static_cast<std::size_t>(layout.g)) {
    throw ShapeError("test signature shape does not match the model");
  }
  // Histogram of match levels per label; summing in a fixed order keeps the
  // aggregate independent of instance order.
  const std::size_t levels = axes + 1;
  std::vector<std::size_t> hist(labels.size() * levels, 0);
  for (const auto& inst : instances) {
    ++hist[inst.label * levels + matching_axes(test, inst.signature)];
  }
  std::vector<double> table(levels);
  for (std::size_t c = 0; c < levels; ++c) table[c] = score_for(c, axes);

  DfamClassification result;
  result.scores.assign(labels.size(), 0.0);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    double total = 0.0;
    for (std::size_t c = 1; c < levels; ++c) total += static_cast<double>(hist[l * levels + c]) * table[c];
    result.scores[l] = total;
  }
  result.label = static_cast<std::size_t>(
      std::max_element(result.scores.begin(), result.scores.end()) - result.scores.begin());
  result.no_match = result.scores[result.label] == 0.0;
  return result;
}

DfamModel train_dfam(std::span<const LabeledSignature> data, std::vector<std::string> labels,
                     const BinLayout& layout, std::size_t window_size, std::uint64_t seed) {
  layout.validate();
  if (data.empty()) throw TrainingError("empty training set");
  if (labels.empty()) throw TrainingError("no labels");
  const std::size_t axes = data.front().signature.axes();
  std::vector<std::vector<std::size_t>> by_label(labels.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& d = data[i];
    if (d.label >= labels.size()) throw TrainingError("label index out of range");
    if (d.signature.axes() != axes || d.signature.bins() != static_cast<std::size_t>(layout.g)) {
      throw TrainingError("training signatures differ in shape");
    }
    by_label[d.label].push_back(i);
  }
  std::size_t min_count = data.size();
  for (std::size_t l = 0; l < labels.size(); ++l) {
    if (by_label[l].empty()) throw TrainingError("label '" + labels[l] + "' has no training windows");
    min_count = std::min(min_count, by_label[l].size());
  }

  Rng rng(seed);
  std::vector<bool> keep(data.size(), false);
  for (auto& members : by_label) {
    // Partial Fisher-Yates: the first min_count slots become the sample.
    for (std::size_t i = 0; i < min_count; ++i) {
      std::swap(members[i], members[i + rng.index(members.size() - i)]);
      keep[members[i]] = true;
    }
  }

  DfamModel model;
  model.layout = layout;
  model.window_size = window_size;
  model.axes = axes;
  model.labels = std::move(labels);
  model.instances.reserve(min_count * model.labels.size());
  for (std::size_t l = 0; l < model.labels.size(); ++l) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (keep[i] && data[i].label == l) model.instances.push_back(data[i]);
    }
  }
  return model;
}

Signature signature_of(const std::vector<std::vector<double>>& windows, const BinLayout& layout) {
  std::vector<Spectrum> spectra;
  spectra.reserve(windows.size());
  for (const auto& w : windows) spectra.push_back(spectrum(w, layout.sample_rate_hz));
  return extract_signature(spectra, layout);
}

DfamModel train_dfam(std::span<const LabeledWindowSet> data, std::vector<std::string> labels,
                     const BinLayout& layout, std::uint64_t seed) {
  if (data.empty()) throw TrainingError("empty training set");
  const std::size_t w = data.front().windows.empty() ? 0 : data.front().windows.front().size();
  std::vector<LabeledSignature> sigs;
  sigs.reserve(data.size());
  for (const auto& set : data) {
    if (set.windows.empty()) throw TrainingError("window set without axes");
    for (const auto& win : set.windows) {
      if (win.size() != w) throw AlignmentError("window sets differ in window size");
    }
    sigs.push_back({set.label, signature_of(set.windows, layout)});
  }
  return train_dfam(sigs, std::move(labels), layout, w, seed);
}

void DfamModel::save(std::ostream& out) const {
  std::vector<std::string> bounds;
  for (double u : layout.boundaries) bounds.push_back(format_double(u));
  out << "DFAM v1 W=" << window_size << " fs=" << format_double(layout.sample_rate_hz) << " g=" << layout.g
      << " axes=" << axes << " bounds=" << join(bounds, ",") << '\n';
  for (const auto& inst : instances) {
    out << labels[inst.label] << ';';
    for (std::size_t a = 0; a < inst.signature.axes(); ++a) {
      if (a) out << '|';
      const auto t = inst.signature.axis(a);
      for (std::size_t b = 0; b < t.size(); ++b) {
        if (b) out << ':';
        out << t[b];
      }
    }
    out << '\n';
  }
}

DfamModel DfamModel::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing DFAM header");
  strip_cr(line);
  const auto head = split(line, ' ');
  if (head.size() != 7 || head[0] != "DFAM" || head[1] != "v1") throw ParseError(1, "not a DFAM v1 model");

  auto field = [&](std::size_t i, std::string_view key) {
    const auto f = head[i];
    if (f.substr(0, key.size()) != key || f.size() < key.size() + 1 || f[key.size()] != '=') {
      throw ParseError(1, "expected field '" + std::string(key) + "='");
    }
    return f.substr(key.size() + 1);
  };
  auto as_int = [](std::string_view s) {
    auto v = try_parse_int(s);
    if (!v || *v < 0) throw ParseError(1, "invalid integer '" + std::string(s) + "'");
    return static_cast<std::size_t>(*v);
  };

  DfamModel model;
  model.window_size = as_int(field(2, "W"));
  const auto fs = try_parse_double(field(3, "fs"));
  if (!fs) throw ParseError(1, "invalid fs");
  model.layout.sample_rate_hz = *fs;
  model.layout.g = static_cast<int>(as_int(field(4, "g")));
  model.axes = as_int(field(5, "axes"));
  const auto bounds_text = field(6, "bounds");
  if (!bounds_text.empty()) {
    for (auto b : split(bounds_text, ',')) {
      const auto v = try_parse_double(b);
      if (!v) throw ParseError(1, "invalid bin boundary '" + std::string(b) + "'");
      model.layout.boundaries.push_back(*v);
    }
  }
  try {
    model.layout.validate();
  } catch (const ConfigError& e) {
    throw ParseError(1, e.what());
  }

  const std::size_t g = static_cast<std::size_t>(model.layout.g);
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto semi = line.find(';');
    if (semi == std::string::npos) throw ParseError(line_no, "missing ';' after label");
    const std::string label = line.substr(0, semi);
    auto it = std::find(model.labels.begin(), model.labels.end(), label);
    if (it == model.labels.end()) it = model.labels.insert(model.labels.end(), label);

    const auto axes_text = split(std::string_view(line).substr(semi + 1), '|');
    if (axes_text.size() != model.axes) throw ParseError(line_no, "expected " + std::to_string(model.axes) + " axes");
    Signature sig(model.axes, g);
    for (std::size_t a = 0; a < model.axes; ++a) {
      const auto parts = split(axes_text[a], ':');
      if (parts.size() != g) throw ParseError(line_no, "expected " + std::to_string(g) + " bins per axis");
      for (std::size_t b = 0; b < g; ++b) {
        const auto v = try_parse_int(parts[b]);
        if (!v || *v < 0) throw ParseError(line_no, "invalid bin index '" + std::string(parts[b]) + "'");
        sig.axis(a)[b] = static_cast<std::uint32_t>(*v);
      }
    }
    model.instances.push_back({static_cast<std::size_t>(it - model.labels.begin()), std::move(sig)});
  }
  return model;
}

}  // namespace dfamcar
