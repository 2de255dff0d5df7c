#pragma once

#include <cstdint>
#include <vector>

#include "changeband/dataset.hpp"
#include "changeband/fitting.hpp"
#include "changeband/models.hpp"
#include "changeband/rng.hpp"

namespace changeband {

struct bootstrap_config {
  int b1 = 500;  // first-level replicates
  int b2 = 25;   // second-level replicates per first-level fit
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double grid_step = 0.1;  // weeks
  double max_refit_failure_fraction = 0.10;
  int threads = 1;  // work partitioning only; never affects results

  void validate() const;  // b1 >= 50, b2 >= 5, 0 < alpha < 1, grid_step > 0
};

// Lower simultaneous confidence band for |f'(t, θ̂)| over the study period.
struct confidence_band {
  std::vector<double> grid;            // ascending, step cfg.grid_step, guarded at t = 0
  std::vector<double> point_estimate;  // |f'(t, θ̂)|
  std::vector<double> pointwise_sd;    // bootstrap sd of |f'(t, ·)| (floored, see pointwise_sd)
  double critical_value = 0.0;
  double alpha = 0.05;
  std::vector<double> lower;  // point_estimate - critical_value * pointwise_sd

  double study_start = 0.0;  // t_1: regions reaching the first grid point report this
  double study_end = 0.0;    // t_m
  int first_level_failures = 0;
  int first_level_valid = 0;
};

// Uniform grid over [max(t_start, step), t_end], always including t_end.
// Starting at `step` rather than 0 keeps the derivative off its possible
// singularity at t = 0.
std::vector<double> band_grid(double t_start, double t_end, double step);

// y*_{p,q} = f(t_p, θ) + σ·ε with ε ~ N(0,1) drawn from the stream in design
// order.
dataset simulate_dataset(const model_spec& spec, const param_vector& theta, double sigma,
                         const time_design& design, rng::gaussian_stream& stream);

// Column-wise sample standard deviation (divisor K-1) of a K×G sample matrix.
// Values below 1e-8·max(column sds) are raised to that floor so studentized
// ratios stay usable where |f'| is pinned near zero; disabling the floor
// turns an exact-zero column into a numerical_error instead.
std::vector<double> pointwise_sd(const std::vector<std::vector<double>>& samples, bool apply_floor = true);

// Empirical (1-α)-quantile (order statistic at rank ⌈(1-α)K⌉) of the valid
// D samples; requires at least 50 of them.
double critical_value(const std::vector<double>& d_samples, double alpha);

// Two-step parametric bootstrap band: B1 first-level refits give the D
// statistics and the band's pointwise sd; B2 nested refits per first-level
// fit studentize each D.  Refit failures are skipped and counted, capped at
// cfg.max_refit_failure_fraction of B1.
confidence_band lower_band(const dataset& data, const fit_result& fit, const bootstrap_config& cfg);

}  // namespace changeband
