#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace epifilter::test {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov statistic of samples against an analytic CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double stat = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    const double lo = static_cast<double>(k) / n;
    const double hi = static_cast<double>(k + 1) / n;
    stat = std::max(stat, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  return stat;
}

// Asymptotic 1% critical value for the KS statistic.
inline double ks_critical_1pct(std::size_t n) {
  return 1.6276 / std::sqrt(static_cast<double>(n));
}

}  // namespace epifilter::test
