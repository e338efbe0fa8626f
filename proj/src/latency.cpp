#include "cello/latency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cello/error.hpp"

namespace cello {

double percentile_sorted(std::span<const double> sorted, double q) {
  const auto n = static_cast<double>(sorted.size());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

LatencyStats latency_stats(std::span<const double> durations_us) {
  if (durations_us.empty()) throw Error(ErrorCode::BadRequest, "no latency samples");
  std::vector<double> sorted(durations_us.begin(), durations_us.end());
  std::sort(sorted.begin(), sorted.end());

  LatencyStats s;
  s.frames = sorted.size();
  s.mean_us = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.frames);
  s.p50_us = percentile_sorted(sorted, 50.0);
  s.p95_us = percentile_sorted(sorted, 95.0);
  s.p99_us = percentile_sorted(sorted, 99.0);
  s.max_us = sorted.back();
  s.frames_per_second = s.mean_us > 0.0 ? 1e6 / s.mean_us : 0.0;
  return s;
}

Json latency_to_json(const LatencyStats& s) {
  return Json{{"frames", s.frames},   {"mean_us", s.mean_us}, {"p50_us", s.p50_us},
              {"p95_us", s.p95_us},   {"p99_us", s.p99_us},   {"max_us", s.max_us},
              {"frames_per_second", s.frames_per_second}};
}

}  // namespace cello
