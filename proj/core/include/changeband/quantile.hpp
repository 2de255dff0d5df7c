#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace changeband {

// Empirical quantile as an order statistic: the ceil(q*K)-th smallest of K
// samples.  The small epsilon keeps ranks exact where q*K is an integer in
// real arithmetic but lands a hair above it in floating point (0.95 * 100).
inline double empirical_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("empirical_quantile: no samples");
  if (!(q > 0.0) || !(q <= 1.0)) throw std::invalid_argument("empirical_quantile: q must be in (0, 1]");
  const auto k = static_cast<long long>(samples.size());
  auto rank = static_cast<long long>(std::ceil(q * static_cast<double>(k) - 1e-9));
  rank = std::clamp(rank, 1ll, k);
  auto nth = samples.begin() + (rank - 1);
  std::nth_element(samples.begin(), nth, samples.end());
  return *nth;
}

}  // namespace changeband
