#pragma once

#include <vector>

#include "changeband/bootstrap.hpp"
#include "changeband/detection.hpp"

namespace changeband {

enum class sigma_level { small, mid_small, medium, mid_large, large };

const char* sigma_level_name(sigma_level level);

// One row of the scenario study: generating model, true parameters, noise
// level, measurement design, and the relevance threshold.
struct scenario_spec {
  int id = 0;  // 1..6
  model_spec model;
  param_vector theta;
  sigma_level level = sigma_level::medium;
  double sigma = 0.0;
  time_design design;
  double lambda = 0.0;
};

// Registry of the six built-in scenarios at the five noise levels.
scenario_spec builtin_scenario(int id, sigma_level level);

// σ_medium for a derived scenario: (b_sce / b_real) · σ_real.
double sigma_transform(double b_sce, double b_real, double sigma_real);

// Level multipliers applied to the medium σ: 0.5, 0.75, 1, 1.5, 2.
double sigma_level_multiplier(sigma_level level);

// Ground-truth change regions of (spec, θ): intervals where |f'(t, θ)| > λ,
// located by a 0.01-step bracket scan refined by bisection; endpoints rounded
// to 0.1.  A derivative singular at t = 0 counts as exceeding any λ there.
std::vector<change_subset> true_regions(const model_spec& spec, const param_vector& theta, double lambda,
                                        double t_start, double t_end);
std::vector<change_subset> true_regions(const scenario_spec& scenario);

struct endpoint_stats {
  int matching_runs = 0;   // runs whose subset count equals the truth's
  double bias_start = 0.0;  // mean(estimate - truth), weeks
  double var_start = 0.0;   // sample variance, weeks^2
  double bias_end = 0.0;
  double var_end = 0.0;
};

struct simulation_summary {
  int runs = 0;
  int rejections = 0;
  int failed_runs = 0;  // excluded from all metrics
  std::vector<int> subset_count_histogram;  // index = detected subset count
  std::vector<change_subset> truth;
  std::vector<endpoint_stats> per_subset;  // parallel to truth
  std::vector<std::vector<change_subset>> run_regions;  // kept on request; empty rows = no rejection
  std::vector<bool> run_ok;  // per run, false = analysis failed
};

// Repeats the full pipeline (simulate data -> fit the generating family ->
// band -> regions) `runs` times with per-run seed streams and aggregates the
// paper's outcome metrics.
simulation_summary run_simulation(const scenario_spec& scenario, int runs, const bootstrap_config& cfg,
                                  bool keep_regions = false);

}  // namespace changeband
