#pragma once

#include <cstdint>
#include <vector>

#include "changeband/bootstrap.hpp"
#include "changeband/dataset.hpp"
#include "changeband/models.hpp"
#include "changeband/rng.hpp"

namespace testing {

inline changeband::time_design study_design() {
  return {{0.0, 3.0, 9.0, 15.0, 21.0, 27.0, 33.0, 39.0, 45.0}, {5, 5, 5, 5, 5, 5, 5, 4, 8}};
}

// Noise-free responses: every replicate equals the model value.
inline changeband::dataset exact_dataset(const changeband::model_spec& spec,
                                         const changeband::param_vector& theta,
                                         const changeband::time_design& design = study_design()) {
  changeband::dataset data;
  data.design = design;
  data.responses.resize(design.times.size());
  for (std::size_t p = 0; p < design.times.size(); ++p)
    data.responses[p].assign(static_cast<std::size_t>(design.replicates[p]),
                             changeband::eval_model(spec, theta, design.times[p]));
  return data;
}

inline changeband::dataset noisy_dataset(const changeband::model_spec& spec,
                                         const changeband::param_vector& theta, double sigma,
                                         std::uint64_t seed,
                                         const changeband::time_design& design = study_design()) {
  changeband::rng::gaussian_stream stream(seed);
  return changeband::simulate_dataset(spec, theta, sigma, design, stream);
}

}  // namespace testing
