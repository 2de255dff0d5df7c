#pragma once

#include <limits>

#include "changeband/dataset.hpp"
#include "changeband/models.hpp"

// Internal nonlinear least-squares machinery behind fit_ols.  Not installed.
namespace changeband::detail {

inline double param_get(const param_vector& p, int i) {
  switch (i) {
    case 0: return p.a;
    case 1: return p.b;
    case 2: return p.shape1;
    default: return p.shape2;
  }
}

inline void param_set(param_vector& p, int i, double v) {
  switch (i) {
    case 0: p.a = v; break;
    case 1: p.b = v; break;
    case 2: p.shape1 = v; break;
    default: p.shape2 = v; break;
  }
}

// f(t, θ) and its gradient w.r.t. θ, without the public API's validation
// (the optimizer keeps θ inside the box, so the checks would be dead weight
// in the innermost loop).
void model_row(const model_spec& spec, const param_vector& theta, double t, double& f, double grad[4]);

double rss_at(const model_spec& spec, const dataset& data, const param_vector& theta);

struct nls_outcome {
  param_vector theta;
  double rss = std::numeric_limits<double>::infinity();
  bool converged = false;
};

nls_outcome levenberg_marquardt(const model_spec& spec, const dataset& data, param_vector init,
                                const double lo[4], const double hi[4], int max_iterations,
                                double rss_rel_tol);

nls_outcome nelder_mead(const model_spec& spec, const dataset& data, param_vector init,
                        const double lo[4], const double hi[4], int max_evaluations,
                        double rss_rel_tol);

}  // namespace changeband::detail
