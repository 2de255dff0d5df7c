#include "changeband/simulate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "changeband/errors.hpp"
#include "changeband/parallel.hpp"

namespace changeband {

namespace {

// Tables 1 and 2: scenario parameters and printed σ levels.
struct scenario_row {
  model_family family;
  double a, b, s1, s2;
  double sigma[5];
};

constexpr scenario_row k_scenarios[6] = {
    {model_family::four_pll, 8.791, -0.089, 17.589, 10.000, {0.014, 0.021, 0.028, 0.042, 0.056}},
    {model_family::four_pll, 8.791, -0.946, 17.589, 10.000, {0.149, 0.223, 0.297, 0.446, 0.595}},
    {model_family::four_pll, 8.791, -3.783, 17.589, 5.000, {0.595, 0.892, 1.190, 1.784, 2.380}},
    {model_family::beta, 6.997, 2.952, 0.506, 0.215, {0.283, 0.424, 0.566, 0.849, 1.132}},
    {model_family::beta, 6.997, 2.952, 3.286, 1.290, {0.283, 0.424, 0.566, 0.849, 1.132}},
    {model_family::beta, 6.997, 2.952, 0.228, 0.084, {0.283, 0.424, 0.566, 0.849, 1.132}},
};

time_design study_design() {
  return {{0.0, 3.0, 9.0, 15.0, 21.0, 27.0, 33.0, 39.0, 45.0}, {5, 5, 5, 5, 5, 5, 5, 4, 8}};
}

double round_tenth(double v) { return static_cast<double>(std::llround(v * 10.0)) / 10.0; }

// |f'(t)| - λ with the singularity at t = 0 treated as +inf.
double excess(const model_spec& spec, const param_vector& theta, double lambda, double t) {
  if (t == 0.0 && derivative_singular_at_zero(spec, theta))
    return std::numeric_limits<double>::infinity();
  return eval_abs_derivative(spec, theta, t) - lambda;
}

// Bisects the λ-crossing inside (lo, hi).  rising: excess(lo) <= 0 < excess(hi);
// falling: excess(lo) > 0 >= excess(hi).
double bisect_crossing(const model_spec& spec, const param_vector& theta, double lambda, double lo,
                       double hi, bool rising) {
  for (int iter = 0; iter < 80 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const bool above = excess(spec, theta, lambda, mid) > 0.0;
    const bool root_to_the_right = rising ? !above : above;
    if (root_to_the_right) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

const char* sigma_level_name(sigma_level level) {
  switch (level) {
    case sigma_level::small: return "small";
    case sigma_level::mid_small: return "mid-small";
    case sigma_level::medium: return "medium";
    case sigma_level::mid_large: return "mid-large";
    case sigma_level::large: return "large";
  }
  return "?";
}

double sigma_level_multiplier(sigma_level level) {
  switch (level) {
    case sigma_level::small: return 0.5;
    case sigma_level::mid_small: return 0.75;
    case sigma_level::medium: return 1.0;
    case sigma_level::mid_large: return 1.5;
    case sigma_level::large: return 2.0;
  }
  return 1.0;
}

double sigma_transform(double b_sce, double b_real, double sigma_real) {
  if (b_real == 0.0) throw std::invalid_argument("sigma_transform: b_real must be nonzero");
  return b_sce / b_real * sigma_real;
}

scenario_spec builtin_scenario(int id, sigma_level level) {
  if (id < 1 || id > 6) throw std::invalid_argument("scenario id must be in 1..6");
  const scenario_row& row = k_scenarios[id - 1];

  scenario_spec scenario;
  scenario.id = id;
  scenario.design = study_design();
  scenario.model = row.family == model_family::beta
                       ? model_spec::beta_spec(default_scal(scenario.design))
                       : model_spec::four_pll_spec();
  scenario.theta = {row.a, row.b, row.s1, row.s2};
  scenario.level = level;
  scenario.sigma = row.sigma[static_cast<int>(level)];
  scenario.lambda = default_lambda(scenario.design.end()).lambda;
  return scenario;
}

std::vector<change_subset> true_regions(const model_spec& spec, const param_vector& theta, double lambda,
                                        double t_start, double t_end) {
  validate_params(spec, theta);
  if (!(t_end > t_start)) throw std::invalid_argument("true_regions: empty study period");

  constexpr double scan_step = 0.01;
  const auto n_steps = static_cast<std::size_t>(std::ceil((t_end - t_start) / scan_step)) + 1;
  std::vector<double> ts;
  ts.reserve(n_steps);
  for (std::size_t k = 0; k + 1 < n_steps; ++k) ts.push_back(t_start + static_cast<double>(k) * scan_step);
  ts.push_back(t_end);

  std::vector<change_subset> regions;
  std::size_t i = 0;
  while (i < ts.size()) {
    if (!(excess(spec, theta, lambda, ts[i]) > 0.0)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < ts.size() && excess(spec, theta, lambda, ts[j + 1]) > 0.0) ++j;

    change_subset region;
    region.t_start = i == 0 ? t_start : bisect_crossing(spec, theta, lambda, ts[i - 1], ts[i], true);
    region.t_end = j == ts.size() - 1 ? t_end : bisect_crossing(spec, theta, lambda, ts[j], ts[j + 1], false);

    std::size_t arg_max = i;
    double best = excess(spec, theta, lambda, ts[i]);
    for (std::size_t k = i + 1; k <= j; ++k) {
      const double v = excess(spec, theta, lambda, ts[k]);
      if (v > best) {
        best = v;
        arg_max = k;
      }
    }
    region.t_max = round_tenth(ts[arg_max]);
    region.t_start = round_tenth(region.t_start);
    region.t_end = round_tenth(region.t_end);
    regions.push_back(region);
    i = j + 1;
  }
  return regions;
}

std::vector<change_subset> true_regions(const scenario_spec& scenario) {
  return true_regions(scenario.model, scenario.theta, scenario.lambda, scenario.design.start(),
                      scenario.design.end());
}

simulation_summary run_simulation(const scenario_spec& scenario, int runs, const bootstrap_config& cfg,
                                  bool keep_regions) {
  if (runs < 1) throw std::invalid_argument("run_simulation needs at least one run");
  cfg.validate();
  validate_params(scenario.model, scenario.theta);

  simulation_summary summary;
  summary.runs = runs;
  summary.truth = true_regions(scenario);

  struct run_slot {
    bool ok = false;
    bool reject = false;
    std::vector<change_subset> subsets;
  };
  std::vector<run_slot> slots(static_cast<std::size_t>(runs));

  parallel_for(runs, cfg.threads, [&](int i) {
    run_slot& slot = slots[static_cast<std::size_t>(i)];
    const auto ii = static_cast<std::uint64_t>(i);
    rng::gaussian_stream stream(rng::derive_seed(cfg.seed, {rng::stream::sim_data, ii}));

    bootstrap_config run_cfg = cfg;
    run_cfg.seed = rng::derive_seed(cfg.seed, {rng::stream::sim_band, ii});
    run_cfg.threads = 1;

    try {
      const dataset data =
          simulate_dataset(scenario.model, scenario.theta, scenario.sigma, scenario.design, stream);
      const fit_result fit = fit_ols(data, scenario.model);
      const confidence_band band = lower_band(data, fit, run_cfg);
      change_report report = extract_regions(band, scenario.lambda);
      slot.ok = true;
      slot.reject = report.reject_h0;
      slot.subsets = std::move(report.subsets);
    } catch (const numerical_error&) {
    }
  });

  const std::size_t s_true = summary.truth.size();
  summary.per_subset.assign(s_true, {});
  summary.subset_count_histogram.assign(s_true + 1, 0);
  summary.run_ok.reserve(slots.size());

  std::vector<std::vector<double>> start_errors(s_true), end_errors(s_true);
  for (const run_slot& slot : slots) {
    summary.run_ok.push_back(slot.ok);
    if (keep_regions) summary.run_regions.push_back(slot.subsets);
    if (!slot.ok) {
      ++summary.failed_runs;
      continue;
    }
    if (slot.reject) ++summary.rejections;
    const std::size_t count = slot.subsets.size();
    if (count >= summary.subset_count_histogram.size()) summary.subset_count_histogram.resize(count + 1, 0);
    ++summary.subset_count_histogram[count];
    if (count == s_true) {
      for (std::size_t j = 0; j < s_true; ++j) {
        start_errors[j].push_back(slot.subsets[j].t_start - summary.truth[j].t_start);
        end_errors[j].push_back(slot.subsets[j].t_end - summary.truth[j].t_end);
      }
    }
  }

  const auto mean_var = [](const std::vector<double>& xs, double& mean, double& var) {
    mean = 0.0;
    var = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
  };
  for (std::size_t j = 0; j < s_true; ++j) {
    endpoint_stats& stats = summary.per_subset[j];
    stats.matching_runs = static_cast<int>(start_errors[j].size());
    mean_var(start_errors[j], stats.bias_start, stats.var_start);
    mean_var(end_errors[j], stats.bias_end, stats.var_end);
  }
  return summary;
}

}  // namespace changeband
