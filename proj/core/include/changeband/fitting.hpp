#pragma once

#include <optional>
#include <vector>

#include "changeband/dataset.hpp"
#include "changeband/models.hpp"

namespace changeband {

struct fit_options {
  int max_iterations = 500;
  double rss_rel_tol = 1e-10;

  // When set, this start is tried before the multi-start grid; with
  // warm_start_only the grid runs only if the warm start fails to converge.
  // Bootstrap refits use this to start from the parent estimate.
  std::optional<param_vector> warm_start;
  bool warm_start_only = false;

  // Largest interior |f'| peak a solution may have before it counts as a
  // step escape (see fit_ols).  Bootstrap refits anchor this at the parent
  // fit's peak; when unset the ceiling is derived from the data's own
  // adjacent-mean secants and the residual noise level.
  std::optional<double> peak_ceiling;
};

struct fit_result {
  model_spec spec;
  param_vector theta;
  double sigma2 = 0.0;  // rss / (n - r)
  double rss = 0.0;
  double aic = 0.0;  // -inf when rss == 0
  bool converged = false;
  int n_starts_used = 0;
  bool degenerate = false;  // sigma2 == 0 (constant responses)
  int n_obs = 0;
};

// Multi-start initial points: a from the mean response at t_1, b from the
// mean change t_1 -> t_m, shapes crossed over a fixed grid
// (4pLL: c in {t_m/4, t_m/2, 3t_m/4} x h in {0.5,1,2,5,10};
//  beta: delta1, delta2 in {0.25,0.5,1,2,4}^2).
std::vector<param_vector> multistart_grid(const dataset& data, const model_spec& spec);

// Steepest secant between the response means at adjacent design times — the
// sharpest slope the observations themselves exhibit.
double max_design_secant(const dataset& data);

// Box constraints applied by projection inside the optimizer:
// c in [1e-4*t_m, 5*t_m], h in [1e-3, 50], delta in [1e-3, 50].
void parameter_box(const model_spec& spec, double t_m, double lo[4], double hi[4]);

// OLS estimate of θ via damped Gauss-Newton (Levenberg-Marquardt) with
// analytic Jacobians, Nelder-Mead fallback per start, best RSS over all
// starts.  Solutions steeper than the sampling design can resolve (a step or
// spike squeezed between adjacent design times, h or δ running away) are
// excluded from selection.  Throws step_fit_error when only such solutions
// converge, numerical_error when nothing converges at all.
fit_result fit_ols(const dataset& data, const model_spec& spec, const fit_options& opts = {});

// n*ln(rss/n) + 2(r+1) with r = 4, the Gaussian-likelihood AIC up to an
// additive constant.  Throws std::domain_error when rss <= 0.
double aic(const fit_result& fit, int n);

// Fits every candidate and returns the one with minimal AIC (ties broken by
// candidate order).  Individual fit failures are skipped; throws only when
// every candidate fails.
fit_result select_model(const dataset& data, const std::vector<model_spec>& candidates,
                        const fit_options& opts = {});

}  // namespace changeband
