#include "nls.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace changeband::detail {

namespace {

param_vector project(param_vector p, const double lo[4], const double hi[4]) {
  for (int i = 0; i < 4; ++i) {
    double v = param_get(p, i);
    if (std::isfinite(lo[i]) && v < lo[i]) v = lo[i];
    if (std::isfinite(hi[i]) && v > hi[i]) v = hi[i];
    param_set(p, i, v);
  }
  return p;
}

// Gaussian elimination with partial pivoting on a 4x4 system.
bool solve4(double a[4][4], const double b[4], double x[4]) {
  int piv[4] = {0, 1, 2, 3};
  double rhs[4] = {b[0], b[1], b[2], b[3]};
  for (int col = 0; col < 4; ++col) {
    int best = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(a[piv[r]][col]) > std::fabs(a[piv[best]][col])) best = r;
    std::swap(piv[col], piv[best]);
    const double pivot = a[piv[col]][col];
    if (!(std::fabs(pivot) > 1e-300)) return false;
    for (int r = col + 1; r < 4; ++r) {
      const double factor = a[piv[r]][col] / pivot;
      if (factor == 0.0) continue;
      for (int c = col; c < 4; ++c) a[piv[r]][c] -= factor * a[piv[col]][c];
      rhs[piv[r]] -= factor * rhs[piv[col]];
    }
  }
  for (int row = 3; row >= 0; --row) {
    double s = rhs[piv[row]];
    for (int c = row + 1; c < 4; ++c) s -= a[piv[row]][c] * x[c];
    x[row] = s / a[piv[row]][row];
    if (!std::isfinite(x[row])) return false;
  }
  return true;
}

}  // namespace

void model_row(const model_spec& spec, const param_vector& theta, double t, double& f, double grad[4]) {
  grad[0] = 1.0;
  grad[1] = grad[2] = grad[3] = 0.0;
  if (spec.family == model_family::four_pll) {
    const double c = theta.shape1, h = theta.shape2;
    if (t == 0.0) {
      f = theta.a;
      return;
    }
    const double w = std::pow(c / t, h);
    if (!std::isfinite(w)) {
      f = theta.a;
      return;
    }
    const double u = 1.0 / (1.0 + w);
    const double v = w * u * u;
    f = theta.a + theta.b * u;
    grad[1] = u;
    grad[2] = -theta.b * v * h / c;
    grad[3] = -theta.b * v * std::log(c / t);
    return;
  }
  const double d1 = theta.shape1, d2 = theta.shape2;
  if (t == 0.0) {
    f = theta.a;
    return;
  }
  const double x = t / spec.scal;
  const double lx = std::log(x);
  const double l1mx = std::log1p(-x);
  const double s = d1 + d2;
  const double g = std::exp(log_beta_norm(d1, d2) + d1 * lx + d2 * l1mx);
  f = theta.a + theta.b * g;
  grad[1] = g;
  grad[2] = theta.b * g * (std::log(s / d1) + lx);
  grad[3] = theta.b * g * (std::log(s / d2) + l1mx);
}

double rss_at(const model_spec& spec, const dataset& data, const param_vector& theta) {
  double rss = 0.0;
  double grad[4];
  for (std::size_t p = 0; p < data.design.times.size(); ++p) {
    double f;
    model_row(spec, theta, data.design.times[p], f, grad);
    for (double y : data.responses[p]) {
      const double r = y - f;
      rss += r * r;
    }
  }
  return rss;
}

nls_outcome levenberg_marquardt(const model_spec& spec, const dataset& data, param_vector init,
                                const double lo[4], const double hi[4], int max_iterations,
                                double rss_rel_tol) {
  param_vector theta = project(init, lo, hi);
  double rss = rss_at(spec, data, theta);
  if (!std::isfinite(rss)) return {theta, rss, false};

  double mu = -1.0;
  double nu = 2.0;
  double grad[4];

  for (int iter = 0; iter < max_iterations; ++iter) {
    double jtj[4][4] = {};
    double jtr[4] = {};
    for (std::size_t p = 0; p < data.design.times.size(); ++p) {
      double f;
      model_row(spec, theta, data.design.times[p], f, grad);
      double rsum = 0.0;
      for (double y : data.responses[p]) rsum += y - f;
      const double np = static_cast<double>(data.responses[p].size());
      for (int k = 0; k < 4; ++k) {
        jtr[k] += grad[k] * rsum;
        for (int l = k; l < 4; ++l) jtj[k][l] += np * grad[k] * grad[l];
      }
    }
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < k; ++l) jtj[k][l] = jtj[l][k];

    double max_diag = 0.0;
    for (int k = 0; k < 4; ++k) max_diag = std::max(max_diag, jtj[k][k]);
    if (mu < 0.0) mu = 1e-3;
    const double diag_floor = 1e-6 * max_diag + 1e-300;

    bool accepted = false;
    while (true) {
      double a[4][4];
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) a[k][l] = jtj[k][l];
      for (int k = 0; k < 4; ++k) a[k][k] += mu * std::max(jtj[k][k], diag_floor);

      double step[4];
      if (solve4(a, jtr, step)) {
        param_vector trial = theta;
        for (int k = 0; k < 4; ++k) param_set(trial, k, param_get(trial, k) + step[k]);
        trial = project(trial, lo, hi);
        const double trial_rss = rss_at(spec, data, trial);
        if (std::isfinite(trial_rss) && trial_rss <= rss) {
          const double rel = (rss - trial_rss) / std::max(rss, 1e-300);
          theta = trial;
          rss = trial_rss;
          mu = std::max(mu / 3.0, 1e-12);
          nu = 2.0;
          if (rel < rss_rel_tol) return {theta, rss, true};
          accepted = true;
          break;
        }
      }
      mu *= nu;
      nu = std::min(nu * 2.0, 64.0);
      // Damping this large means no representable step improves the fit:
      // the current point is a minimum at machine precision.
      if (mu > 1e15) return {theta, rss, true};
    }
    (void)accepted;
  }
  return {theta, rss, false};
}

nls_outcome nelder_mead(const model_spec& spec, const dataset& data, param_vector init,
                        const double lo[4], const double hi[4], int max_evaluations,
                        double rss_rel_tol) {
  constexpr int dim = 4;
  using point = std::array<double, dim>;

  const auto objective = [&](const point& x) {
    param_vector p{x[0], x[1], x[2], x[3]};
    return rss_at(spec, data, project(p, lo, hi));
  };

  const param_vector start = project(init, lo, hi);
  std::array<point, dim + 1> simplex;
  std::array<double, dim + 1> value;
  simplex[0] = {start.a, start.b, start.shape1, start.shape2};
  for (int k = 0; k < dim; ++k) {
    simplex[k + 1] = simplex[0];
    const double v = simplex[0][k];
    simplex[k + 1][k] = v + 0.05 * std::max(std::fabs(v), 1.0);
  }
  int evals = 0;
  for (int k = 0; k <= dim; ++k) {
    value[k] = objective(simplex[k]);
    ++evals;
  }

  std::array<int, dim + 1> order{};
  while (evals < max_evaluations) {
    for (int k = 0; k <= dim; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return value[a] < value[b]; });
    const int best = order[0], worst = order[dim], second_worst = order[dim - 1];

    const double spread = value[worst] - value[best];
    if (spread <= 1e-14 + rss_rel_tol * std::max(value[best], 1e-300)) {
      param_vector p{simplex[best][0], simplex[best][1], simplex[best][2], simplex[best][3]};
      p = project(p, lo, hi);
      return {p, value[best], std::isfinite(value[best])};
    }

    point centroid{};
    for (int k = 0; k <= dim; ++k) {
      if (k == worst) continue;
      for (int d = 0; d < dim; ++d) centroid[d] += simplex[k][d];
    }
    for (int d = 0; d < dim; ++d) centroid[d] /= dim;

    const auto blend = [&](double coef) {
      point p;
      for (int d = 0; d < dim; ++d) p[d] = centroid[d] + coef * (simplex[worst][d] - centroid[d]);
      return p;
    };

    const point reflected = blend(-1.0);
    const double f_reflected = objective(reflected);
    ++evals;
    if (f_reflected < value[order[0]]) {
      const point expanded = blend(-2.0);
      const double f_expanded = objective(expanded);
      ++evals;
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        value[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < value[second_worst]) {
      simplex[worst] = reflected;
      value[worst] = f_reflected;
      continue;
    }
    const point contracted = blend(f_reflected < value[worst] ? -0.5 : 0.5);
    const double f_contracted = objective(contracted);
    ++evals;
    if (f_contracted < std::min(value[worst], f_reflected)) {
      simplex[worst] = contracted;
      value[worst] = f_contracted;
      continue;
    }
    for (int k = 0; k <= dim; ++k) {
      if (k == best) continue;
      for (int d = 0; d < dim; ++d) simplex[k][d] = simplex[best][d] + 0.5 * (simplex[k][d] - simplex[best][d]);
      value[k] = objective(simplex[k]);
      ++evals;
    }
  }

  int best = 0;
  for (int k = 1; k <= dim; ++k)
    if (value[k] < value[best]) best = k;
  param_vector p{simplex[best][0], simplex[best][1], simplex[best][2], simplex[best][3]};
  return {project(p, lo, hi), value[best], false};
}

}  // namespace changeband::detail
