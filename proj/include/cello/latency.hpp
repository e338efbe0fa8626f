#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cello/json.hpp"

namespace cello {

// Per-frame engine time statistics, microseconds. Percentiles are
// nearest-rank, so p50 <= p95 <= p99 <= max always holds.
struct LatencyStats {
  std::size_t frames = 0;
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
  double frames_per_second = 0.0;
};

// Nearest-rank percentile of an ascending-sorted sample, q in (0, 100].
double percentile_sorted(std::span<const double> sorted, double q);

// Throws Error(BadRequest) on an empty sample.
LatencyStats latency_stats(std::span<const double> durations_us);

Json latency_to_json(const LatencyStats& stats);

}  // namespace cello
