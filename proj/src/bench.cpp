#include "dfamcar/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "dfamcar/rng.hpp"
#include "json.hpp"

namespace dfamcar {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyResultError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
BenchResult time_queries(const std::string& name, const BenchRequest& req, std::size_t query_count, F&& classify_one) {
  BenchResult r;
  r.model = name;
  r.train_size = req.train_size;
  r.queries = query_count;
  r.reps = req.reps;
  std::vector<double> all;
  for (std::size_t rep = 0; rep < req.reps; ++rep) {
    std::vector<double> times;
    std::size_t correct = 0;
    for (std::size_t q = 0; q < query_count; ++q) {
      const auto t0 = Clock::now();
      const bool ok = classify_one(q);
      const auto t1 = Clock::now();
      times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
      correct += ok ? 1 : 0;
    }
    r.correct = correct;
    r.rep_medians_us.push_back(percentile(times, 0.5));
    all.insert(all.end(), times.begin(), times.end());
  }
  r.min_us = *std::min_element(all.begin(), all.end());
  r.median_us = percentile(all, 0.5);
  r.p95_us = percentile(all, 0.95);
  r.median_of_medians_us = percentile(r.rep_medians_us, 0.5);
  return r;
}

}  // namespace

std::vector<BenchResult> run_bench(const BenchRequest& req) {
  if (req.models.empty()) throw ConfigError("bench needs at least one model");
  if (req.train_size == 0 || req.queries == 0 || req.reps == 0) {
    throw ConfigError("train size, queries and repetitions must be positive");
  }
  req.config.validate();
  const std::size_t w = req.config.window_size;
  const std::size_t needed = req.train_size + req.queries;

  CorpusSpec spec;
  spec.noise_std = req.noise_std;
  spec.seed = req.seed;
  spec.sample_rate_hz = req.config.sample_rate_hz;
  const std::size_t recordings = spec.participants * spec.activities.size();
  const std::size_t per_recording = (needed + recordings - 1) / recordings;
  spec.duration_s = static_cast<double>(std::max((per_recording + 1) * w, 2 * kMaxWindowSize)) / spec.sample_rate_hz;
  const Corpus corpus = generate_corpus(spec);
  const InstanceTable table = build_instances(corpus, req.config);
  if (table.meta.size() < needed) throw EmptyResultError("generated corpus is too short for the bench");

  std::vector<std::size_t> order(table.meta.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(req.seed, 0xbe7c));
  rng.shuffle(std::span<std::size_t>(order));
  const std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(req.train_size));
  const std::vector<std::size_t> query(order.begin() + static_cast<std::ptrdiff_t>(req.train_size),
                                       order.begin() + static_cast<std::ptrdiff_t>(needed));

  const auto channels = req.config.channels();
  std::vector<BenchResult> out;
  for (const auto& m : req.models) {
    if (m.dfam) {
      const auto layout = req.config.layout();
      std::vector<LabeledSignature> data;
      for (auto i : train) data.push_back({table.meta[i].label, signature_of(table.windows[i], layout)});
      // A class absent from the sampled training set keeps the full label list
      // valid by dropping it here.
      std::vector<std::size_t> counts(table.labels.size(), 0);
      for (const auto& d : data) ++counts[d.label];
      std::vector<std::size_t> remap(table.labels.size(), 0);
      std::vector<std::string> names;
      for (std::size_t l = 0; l < counts.size(); ++l) {
        if (counts[l] == 0) continue;
        remap[l] = names.size();
        names.push_back(table.labels[l]);
      }
      for (auto& d : data) d.label = remap[d.label];
      const DfamModel model = train_dfam(data, names, layout, w, req.seed);
      out.push_back(time_queries(m.name(), req, query.size(), [&](std::size_t q) {
        const auto i = query[q];
        const auto res = model.classify(signature_of(table.windows[i], layout));
        return model.labels[res.label] == table.labels[table.meta[i].label];
      }));
    } else {
      FeatureDataset all = instance_features(table, req.config);
      FeatureDataset sub = all.subset(train);
      ClassifierParams p;
      p.knn_k = m.knn_k;
      p.seed = req.seed;
      const FeatureModel model = train_feature_model(m.kind, sub, p);
      out.push_back(time_queries(m.name(), req, query.size(), [&](std::size_t q) {
        const auto i = query[q];
        const auto fv = extract_features(ChannelWindows{channels, table.windows[i]}, req.config.sample_rate_hz);
        return model.labels()[model.predict(fv)] == table.labels[table.meta[i].label];
      }));
    }
  }
  return out;
}

std::string bench_csv_row(const BenchResult& r, std::size_t window_size) {
  std::ostringstream s;
  s << r.model << ',' << window_size << ',' << r.train_size << ',' << r.queries << ',' << r.reps << ',' << r.correct
    << ',' << format_double(r.min_us) << ',' << format_double(r.median_us) << ',' << format_double(r.p95_us) << ','
    << format_double(r.median_of_medians_us);
  return s.str();
}

std::string bench_json(const std::vector<BenchResult>& results, std::size_t window_size) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["W"] = window_size;
    j["train_size"] = r.train_size;
    j["queries"] = r.queries;
    j["reps"] = r.reps;
    j["correct"] = r.correct;
    j["min_us"] = r.min_us;
    j["median_us"] = r.median_us;
    j["p95_us"] = r.p95_us;
    j["median_of_medians_us"] = r.median_of_medians_us;
    j["rep_medians_us"] = r.rep_medians_us;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

}  // namespace dfamcar
