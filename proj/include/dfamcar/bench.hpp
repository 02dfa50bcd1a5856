#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfamcar/pipeline.hpp"

namespace dfamcar {

struct BenchRequest {
  std::vector<ModelSpec> models;
  std::size_t train_size = 500;
  std::size_t queries = 50;
  std::size_t reps = 10;
  PipelineConfig config = [] {
    PipelineConfig c;
    c.window_size = 512;
    return c;
  }();
  double noise_std = 0.0;
  std::uint64_t seed = kDefaultSeed;
};

/// Per-window compute latency in microseconds. Timing covers signature or
/// feature extraction plus matching; filtering and I/O are excluded.
struct BenchResult {
  std::string model;
  std::size_t train_size = 0;
  std::size_t queries = 0;
  std::size_t reps = 0;
  std::size_t correct = 0;  // deterministic check value
  double min_us = 0.0;
  double median_us = 0.0;
  double p95_us = 0.0;
  double median_of_medians_us = 0.0;
  std::vector<double> rep_medians_us;
};

std::vector<BenchResult> run_bench(const BenchRequest& request);

inline constexpr const char* kBenchCsvHeader =
    "model,W,train_size,queries,reps,correct,min_us,median_us,p95_us,median_of_medians_us";
std::string bench_csv_row(const BenchResult& r, std::size_t window_size);
std::string bench_json(const std::vector<BenchResult>& results, std::size_t window_size);

/// Nearest-rank percentile of unsorted values, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace dfamcar
