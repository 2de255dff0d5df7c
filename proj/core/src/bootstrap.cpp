#include "changeband/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "changeband/errors.hpp"
#include "changeband/parallel.hpp"
#include "changeband/quantile.hpp"

namespace changeband {

void bootstrap_config::validate() const {
  if (b1 < 50) throw std::invalid_argument("bootstrap B1 must be at least 50");
  if (b2 < 5) throw std::invalid_argument("bootstrap B2 must be at least 5");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (!(max_refit_failure_fraction >= 0.0) || !(max_refit_failure_fraction <= 1.0))
    throw std::invalid_argument("max refit failure fraction must lie in [0, 1]");
}

std::vector<double> band_grid(double t_start, double t_end, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const double lo = std::max(t_start, step);
  if (!(lo < t_end)) throw std::invalid_argument("study period too short for the grid step");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((t_end - lo) / step + 1e-9));
  grid.reserve(count + 2);
  for (std::size_t k = 0; k <= count; ++k) grid.push_back(lo + static_cast<double>(k) * step);
  if (t_end - grid.back() > 1e-9 * std::max(1.0, t_end)) grid.push_back(t_end);
  else grid.back() = t_end;
  return grid;
}

dataset simulate_dataset(const model_spec& spec, const param_vector& theta, double sigma,
                         const time_design& design, rng::gaussian_stream& stream) {
  design.validate();
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  dataset out;
  out.design = design;
  out.responses.resize(design.times.size());
  for (std::size_t p = 0; p < design.times.size(); ++p) {
    const double f = eval_model(spec, theta, design.times[p]);
    auto& row = out.responses[p];
    row.resize(static_cast<std::size_t>(design.replicates[p]));
    for (double& y : row) y = f + sigma * stream.next();
  }
  return out;
}

std::vector<double> pointwise_sd(const std::vector<std::vector<double>>& samples, bool apply_floor) {
  if (samples.size() < 2) throw std::invalid_argument("pointwise_sd needs at least two sample rows");
  const std::size_t g = samples.front().size();
  for (const auto& row : samples)
    if (row.size() != g) throw std::invalid_argument("pointwise_sd rows have unequal length");

  const double k = static_cast<double>(samples.size());
  std::vector<double> sd(g, 0.0);
  for (std::size_t j = 0; j < g; ++j) {
    double mean = 0.0;
    for (const auto& row : samples) mean += row[j];
    mean /= k;
    double ss = 0.0;
    for (const auto& row : samples) {
      const double d = row[j] - mean;
      ss += d * d;
    }
    sd[j] = std::sqrt(ss / (k - 1.0));
  }

  double max_sd = 0.0;
  for (double v : sd) max_sd = std::max(max_sd, v);
  const double floor = 1e-8 * std::max(max_sd, 1e-300);
  for (double& v : sd) {
    if (v < floor) {
      if (!apply_floor && v == 0.0) throw numerical_error("zero bootstrap variance at a grid point");
      if (apply_floor) v = floor;
    }
  }
  return sd;
}

double critical_value(const std::vector<double>& d_samples, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  std::vector<double> valid;
  valid.reserve(d_samples.size());
  for (double d : d_samples)
    if (std::isfinite(d)) valid.push_back(d);
  if (valid.size() < 50)
    throw numerical_error("critical value needs at least 50 valid D samples, got " + std::to_string(valid.size()));
  return empirical_quantile(std::move(valid), 1.0 - alpha);
}

namespace {

// Peak |f'| over the interior part of the grid (from the second design time
// on).  The first inter-design interval is excluded because both families may
// legitimately diverge towards t = 0 when a shape parameter is below 1.
double interior_peak(const std::vector<double>& grid, const std::vector<double>& abs_deriv,
                     double interior_from) {
  double peak = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (grid[j] >= interior_from) peak = std::max(peak, abs_deriv[j]);
  return peak;
}

double min_design_gap(const time_design& design) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t p = 1; p < design.times.size(); ++p)
    gap = std::min(gap, design.times[p] - design.times[p - 1]);
  return gap;
}

}  // namespace

confidence_band lower_band(const dataset& data, const fit_result& fit, const bootstrap_config& cfg) {
  data.validate();
  cfg.validate();

  const model_spec& spec = fit.spec;
  const time_design& design = data.design;
  confidence_band band;
  band.alpha = cfg.alpha;
  band.study_start = design.start();
  band.study_end = design.end();
  band.grid = band_grid(band.study_start, band.study_end, cfg.grid_step);
  const std::size_t g = band.grid.size();
  if (g < 2) throw numerical_error("band grid needs at least two points");

  band.point_estimate.resize(g);
  for (std::size_t j = 0; j < g; ++j)
    band.point_estimate[j] = eval_abs_derivative(spec, fit.theta, band.grid[j]);

  const double sigma_hat = std::sqrt(fit.sigma2);

  // First-level refits face the same steepness ceiling the original fit did:
  // three times the sharpest slope the observed data exhibit (floored at the
  // slope the noise level can fake across the narrowest design gap).  The
  // nested refits, which only studentize, are anchored at their own parent's
  // peak instead — erring loose there can only make σ̂* conservative.
  const double interior_from = design.times.size() > 1 ? design.times[1] : design.start();
  const double gap = min_design_gap(design);
  const double data_ceiling = 3.0 * std::max(max_design_secant(data), sigma_hat / gap);

  struct level_slot {
    bool valid = false;
    bool fit_failed = false;
    std::vector<double> abs_deriv;
    double d_stat = 0.0;
  };
  std::vector<level_slot> slots(static_cast<std::size_t>(cfg.b1));

  fit_options refit_opts;
  refit_opts.warm_start = fit.theta;
  refit_opts.warm_start_only = true;
  refit_opts.peak_ceiling = data_ceiling;

  parallel_for(cfg.b1, cfg.threads, [&](int l) {
    level_slot& slot = slots[static_cast<std::size_t>(l)];
    rng::gaussian_stream data_stream(
        rng::derive_seed(cfg.seed, {rng::stream::first_level, static_cast<std::uint64_t>(l)}));
    const dataset resample = simulate_dataset(spec, fit.theta, sigma_hat, design, data_stream);

    // A refit that collapses onto a step (step_fit_error) is a feature of the
    // resample, not of the optimizer: the classic nonlinear-LS routines error
    // out on those resamples too, leaving them outside the bootstrap sample.
    // They are censored here the same way and never count toward the failure
    // cap, which guards against a genuinely broken fit.
    fit_result refit;
    try {
      refit = fit_ols(resample, spec, refit_opts);
    } catch (const step_fit_error&) {
      return;
    } catch (const numerical_error&) {
      slot.fit_failed = true;
      return;
    }

    std::vector<double> row(g);
    for (std::size_t j = 0; j < g; ++j) row[j] = eval_abs_derivative(spec, refit.theta, band.grid[j]);
    const double row_peak = interior_peak(band.grid, row, interior_from);

    const double sigma_l = std::sqrt(refit.sigma2);
    fit_options inner_opts;
    inner_opts.warm_start = refit.theta;
    inner_opts.warm_start_only = true;
    inner_opts.peak_ceiling = 3.0 * std::max(row_peak, sigma_l / gap);

    std::vector<std::vector<double>> inner_rows;
    inner_rows.reserve(static_cast<std::size_t>(cfg.b2));
    for (int j2 = 0; j2 < cfg.b2; ++j2) {
      rng::gaussian_stream inner_stream(rng::derive_seed(
          cfg.seed, {rng::stream::second_level, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(j2)}));
      const dataset inner_data = simulate_dataset(spec, refit.theta, sigma_l, design, inner_stream);
      fit_result inner_fit;
      try {
        inner_fit = fit_ols(inner_data, spec, inner_opts);
      } catch (const numerical_error&) {
        continue;
      }
      std::vector<double> inner_row(g);
      for (std::size_t j = 0; j < g; ++j)
        inner_row[j] = eval_abs_derivative(spec, inner_fit.theta, band.grid[j]);
      inner_rows.push_back(std::move(inner_row));
    }
    if (inner_rows.size() < 2) return;

    const std::vector<double> sd_l = pointwise_sd(inner_rows);
    double d = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g; ++j) d = std::max(d, (row[j] - band.point_estimate[j]) / sd_l[j]);

    slot.valid = true;
    slot.abs_deriv = std::move(row);
    slot.d_stat = d;
  });

  std::vector<std::vector<double>> first_rows;
  std::vector<double> d_samples;
  first_rows.reserve(slots.size());
  d_samples.reserve(slots.size());
  int fit_failures = 0;
  for (const level_slot& slot : slots) {
    fit_failures += slot.fit_failed ? 1 : 0;
    if (!slot.valid) continue;
    first_rows.push_back(slot.abs_deriv);
    d_samples.push_back(slot.d_stat);
  }

  band.first_level_valid = static_cast<int>(first_rows.size());
  band.first_level_failures = cfg.b1 - band.first_level_valid;
  // Censored step refits are expected at step-prone signal-to-noise levels
  // and bounded by the minimum-sample check in critical_value; only genuine
  // optimizer failures count against the cap.
  if (static_cast<double>(fit_failures) > cfg.max_refit_failure_fraction * cfg.b1)
    throw numerical_error("bootstrap refit failures exceed " +
                          std::to_string(cfg.max_refit_failure_fraction) + " of B1 (" +
                          std::to_string(fit_failures) + "/" + std::to_string(cfg.b1) + ")");
  if (first_rows.size() < 2) throw numerical_error("too few valid first-level bootstrap refits");

  band.pointwise_sd = pointwise_sd(first_rows);
  band.critical_value = critical_value(d_samples, cfg.alpha);

  band.lower.resize(g);
  for (std::size_t j = 0; j < g; ++j)
    band.lower[j] = band.point_estimate[j] - band.critical_value * band.pointwise_sd[j];
  return band;
}

}  // namespace changeband
