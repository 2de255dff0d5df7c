#include "changeband/dataset.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "changeband/errors.hpp"

namespace changeband {

int time_design::total_observations() const {
  return std::accumulate(replicates.begin(), replicates.end(), 0);
}

void time_design::validate() const {
  if (times.size() < 2) throw std::invalid_argument("time design needs at least two distinct time points");
  if (times.size() != replicates.size())
    throw std::invalid_argument("time design has " + std::to_string(times.size()) + " times but " +
                                std::to_string(replicates.size()) + " replicate counts");
  if (!(times.front() >= 0.0)) throw std::invalid_argument("time points must be non-negative");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw std::invalid_argument("time points must be finite");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("time points must be strictly ascending");
    if (replicates[i] < 1) throw std::invalid_argument("each time point needs at least one replicate");
  }
}

double dataset::mean_at(std::size_t time_index) const {
  const auto& row = responses.at(time_index);
  double sum = 0.0;
  for (double y : row) sum += y;
  return sum / static_cast<double>(row.size());
}

void dataset::validate() const {
  design.validate();
  if (responses.size() != design.times.size())
    throw data_error("dataset has " + std::to_string(responses.size()) + " response rows for " +
                     std::to_string(design.times.size()) + " time points");
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (static_cast<int>(responses[i].size()) != design.replicates[i])
      throw data_error("time point " + std::to_string(design.times[i]) + " has " +
                       std::to_string(responses[i].size()) + " responses, expected " +
                       std::to_string(design.replicates[i]));
    for (double y : responses[i])
      if (!std::isfinite(y)) throw data_error("non-finite response at time " + std::to_string(design.times[i]));
  }
}

}  // namespace changeband
