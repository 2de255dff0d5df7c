#pragma once

#include <cstddef>
#include <vector>

namespace changeband {

// Measurement schedule: distinct ascending time points with per-point
// replicate counts.  Times are in study units (weeks throughout the docs).
struct time_design {
  std::vector<double> times;
  std::vector<int> replicates;

  int total_observations() const;
  double start() const { return times.front(); }
  double end() const { return times.back(); }

  // Throws std::invalid_argument unless: >= 2 distinct times, strictly
  // ascending, first time >= 0, every replicate count >= 1.
  void validate() const;
};

// Observed response curve: one vector of replicate responses per time point.
struct dataset {
  time_design design;
  std::vector<std::vector<double>> responses;

  int total_observations() const { return design.total_observations(); }
  double mean_at(std::size_t time_index) const;

  // Design validity plus: response rows match the design's replicate counts
  // and every response is finite.  Throws data_error / std::invalid_argument.
  void validate() const;
};

}  // namespace changeband
