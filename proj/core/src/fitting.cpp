#include "changeband/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "changeband/errors.hpp"
#include "nls.hpp"

namespace changeband {

namespace {

void check_spec_for_design(const model_spec& spec, const time_design& design) {
  if (spec.family == model_family::beta) {
    if (!(spec.scal > 0.0) || !std::isfinite(spec.scal))
      throw std::invalid_argument("beta model requires a positive finite scal");
    if (!(spec.scal > design.end()))
      throw std::invalid_argument("beta scal (" + std::to_string(spec.scal) +
                                  ") must exceed the last design time (" + std::to_string(design.end()) + ")");
  }
}

double min_design_gap(const time_design& design) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p + 1 < design.times.size(); ++p)
    gap = std::min(gap, design.times[p + 1] - design.times[p]);
  return gap;
}

// Largest |f'| over the interior of the design span, scanned at the band's
// resolution.  Starts at the second design time so that the beta family's
// legitimate t→0 singularity (δ1 < 1) stays out of the comparison.
double interior_abs_deriv_peak(const model_spec& spec, const param_vector& theta, const time_design& design) {
  const double from = design.times[1];
  const double to = design.end();
  double peak = 0.0;
  for (double t = from; t < to; t += 0.1) peak = std::max(peak, eval_abs_derivative(spec, theta, t));
  return std::max(peak, eval_abs_derivative(spec, theta, to));
}

}  // namespace

double max_design_secant(const dataset& data) {
  double secant = 0.0;
  for (std::size_t p = 0; p + 1 < data.design.times.size(); ++p) {
    const double gap = data.design.times[p + 1] - data.design.times[p];
    secant = std::max(secant, std::fabs(data.mean_at(p + 1) - data.mean_at(p)) / gap);
  }
  return secant;
}

void parameter_box(const model_spec& spec, double t_m, double lo[4], double hi[4]) {
  const double inf = std::numeric_limits<double>::infinity();
  lo[0] = lo[1] = -inf;
  hi[0] = hi[1] = inf;
  if (spec.family == model_family::four_pll) {
    lo[2] = 1e-4 * t_m;
    hi[2] = 5.0 * t_m;
    lo[3] = 1e-3;
    hi[3] = 50.0;
  } else {
    lo[2] = lo[3] = 1e-3;
    hi[2] = hi[3] = 50.0;
  }
}

std::vector<param_vector> multistart_grid(const dataset& data, const model_spec& spec) {
  const double a0 = data.mean_at(0);
  const double b0 = data.mean_at(data.design.times.size() - 1) - a0;
  const double t_m = data.design.end();

  std::vector<param_vector> starts;
  if (spec.family == model_family::four_pll) {
    const double c_grid[] = {t_m / 4.0, t_m / 2.0, 3.0 * t_m / 4.0};
    const double h_grid[] = {0.5, 1.0, 2.0, 5.0, 10.0};
    starts.reserve(15);
    for (double c : c_grid)
      for (double h : h_grid) starts.push_back({a0, b0, c, h});
  } else {
    const double d_grid[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    starts.reserve(25);
    for (double d1 : d_grid)
      for (double d2 : d_grid) starts.push_back({a0, b0, d1, d2});
  }
  return starts;
}

fit_result fit_ols(const dataset& data, const model_spec& spec, const fit_options& opts) {
  data.validate();
  check_spec_for_design(spec, data.design);
  const int n = data.total_observations();
  constexpr int r = model_spec::param_count;
  if (n < r + 2)
    throw data_error("need at least " + std::to_string(r + 2) + " observations, got " + std::to_string(n));

  double lo[4], hi[4];
  parameter_box(spec, data.design.end(), lo, hi);

  // On designs this sparse the RSS global minimum is sometimes a step (4pLL
  // h → box edge) or a spike (beta δ → box edge) wedged between two design
  // times: its |f'| peak dwarfs every slope the observations themselves show.
  // Such solutions are escapes from the family, not estimates; selection
  // keeps the best start whose steepness the data can actually resolve.
  const double secant = max_design_secant(data);
  const double gap = min_design_gap(data.design);
  const auto step_escape = [&](const detail::nls_outcome& out) {
    double ceiling;
    if (opts.peak_ceiling) {
      ceiling = *opts.peak_ceiling;
    } else {
      const double sigma = std::sqrt(std::max(out.rss, 0.0) / static_cast<double>(n - r));
      ceiling = 3.0 * std::max(secant, sigma / gap);
    }
    return interior_abs_deriv_peak(spec, out.theta, data.design) > ceiling;
  };

  detail::nls_outcome best;
  bool have_best = false;
  bool saw_step_escape = false;
  int used = 0;

  const auto usable = [&](const detail::nls_outcome& out) {
    if (!out.converged || !std::isfinite(out.rss)) return false;
    if (step_escape(out)) {
      saw_step_escape = true;
      return false;
    }
    return true;
  };

  const auto try_start = [&](const param_vector& start) {
    detail::nls_outcome out =
        detail::levenberg_marquardt(spec, data, start, lo, hi, opts.max_iterations, opts.rss_rel_tol);
    bool ok = usable(out);
    // The simplex rescue is for starts the gradient method could not finish.
    // A converged step escape is already a true local minimum; descending
    // again from the same start would only rediscover it.
    if (!ok && !(out.converged && std::isfinite(out.rss))) {
      detail::nls_outcome rescue =
          detail::nelder_mead(spec, data, start, lo, hi, 40 * opts.max_iterations, opts.rss_rel_tol);
      if (usable(rescue)) {
        out = rescue;
        ok = true;
      }
    }
    ++used;
    if (ok && (!have_best || out.rss < best.rss)) {
      best = out;
      have_best = true;
    }
    return ok;
  };

  bool warm_done = false;
  if (opts.warm_start) warm_done = try_start(*opts.warm_start);
  if (!(opts.warm_start && opts.warm_start_only && warm_done)) {
    for (const param_vector& start : multistart_grid(data, spec)) try_start(start);
  }

  if (!have_best) {
    if (saw_step_escape)
      throw step_fit_error("every converged start is a step sharper than the design resolves");
    throw numerical_error("no optimizer start converged");
  }

  fit_result fit;
  fit.spec = spec;
  fit.theta = best.theta;
  fit.rss = best.rss;
  fit.sigma2 = best.rss / static_cast<double>(n - r);
  fit.converged = true;
  fit.n_starts_used = used;
  fit.degenerate = !(fit.sigma2 > 0.0);
  fit.n_obs = n;
  fit.aic = fit.rss > 0.0 ? aic(fit, n) : -std::numeric_limits<double>::infinity();
  return fit;
}

double aic(const fit_result& fit, int n) {
  if (!(fit.rss > 0.0)) throw std::domain_error("AIC undefined for rss <= 0");
  constexpr int r = model_spec::param_count;
  return static_cast<double>(n) * std::log(fit.rss / static_cast<double>(n)) + 2.0 * (r + 1);
}

fit_result select_model(const dataset& data, const std::vector<model_spec>& candidates, const fit_options& opts) {
  if (candidates.empty()) throw std::invalid_argument("select_model needs at least one candidate");
  fit_result best;
  bool have_best = false;
  std::string last_error;
  for (const model_spec& candidate : candidates) {
    try {
      fit_result fit = fit_ols(data, candidate, opts);
      if (!have_best || fit.aic < best.aic) {
        best = fit;
        have_best = true;
      }
    } catch (const numerical_error& e) {
      last_error = e.what();
    }
  }
  if (!have_best) throw numerical_error("every candidate model failed to fit: " + last_error);
  return best;
}

}  // namespace changeband
