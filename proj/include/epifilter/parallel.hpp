#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace epifilter {

// Static-partition parallel loop.  Workers write to disjoint, index-addressed
// slots and all reductions happen on the calling thread afterwards, so results
// are identical for any worker count.  workers <= 1 runs inline.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  const std::size_t w = static_cast<std::size_t>(workers);
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = begin + chunk < n ? begin + chunk : n;
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t k = begin; k < end; ++k) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

// Compensated (Kahan) summation; keeps weight normalization stable for large
// particle counts.
inline double kahan_sum(const std::vector<double>& values) {
  double sum = 0.0;
  double carry = 0.0;
  for (const double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace epifilter
