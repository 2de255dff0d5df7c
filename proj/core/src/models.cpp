#include "changeband/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace changeband {

namespace {

constexpr double k_max_shape = 150.0;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("parameter ") + name + " must be finite");
}

}  // namespace

void validate_params(const model_spec& spec, const param_vector& theta) {
  require_finite(theta.a, "a");
  require_finite(theta.b, "b");
  require_finite(theta.shape1, "shape1");
  require_finite(theta.shape2, "shape2");
  switch (spec.family) {
    case model_family::four_pll:
      if (!(theta.shape1 > 0.0)) throw std::invalid_argument("4pLL requires c > 0");
      if (!(theta.shape2 > 0.0)) throw std::invalid_argument("4pLL requires h > 0");
      if (theta.shape2 > k_max_shape) throw std::invalid_argument("4pLL Hill slope h exceeds 150");
      break;
    case model_family::beta:
      if (!(spec.scal > 0.0) || !std::isfinite(spec.scal))
        throw std::invalid_argument("beta model requires a positive finite scal");
      if (!(theta.shape1 > 0.0) || !(theta.shape2 > 0.0))
        throw std::invalid_argument("beta model requires delta1 > 0 and delta2 > 0");
      if (theta.shape1 > k_max_shape || theta.shape2 > k_max_shape)
        throw std::invalid_argument("beta shape parameter exceeds 150");
      break;
  }
}

double log_beta_norm(double d1, double d2) {
  const double s = d1 + d2;
  return s * std::log(s) - d1 * std::log(d1) - d2 * std::log(d2);
}

double eval_model(const model_spec& spec, const param_vector& theta, double t) {
  validate_params(spec, theta);
  if (t < 0.0) throw std::domain_error("model evaluated at negative time");
  switch (spec.family) {
    case model_family::four_pll: {
      if (t == 0.0) return theta.a;
      // t^h/(c^h + t^h) = 1/(1 + (c/t)^h); the ratio form cannot overflow the sum.
      const double w = std::pow(theta.shape1 / t, theta.shape2);
      const double u = std::isfinite(w) ? 1.0 / (1.0 + w) : 0.0;
      return theta.a + theta.b * u;
    }
    case model_family::beta: {
      if (t >= spec.scal) throw std::domain_error("beta model evaluated at t >= scal");
      if (t == 0.0) return theta.a;
      const double x = t / spec.scal;
      const double d1 = theta.shape1, d2 = theta.shape2;
      const double g = std::exp(log_beta_norm(d1, d2) + d1 * std::log(x) + d2 * std::log1p(-x));
      return theta.a + theta.b * g;
    }
  }
  throw std::logic_error("unknown model family");
}

double eval_derivative(const model_spec& spec, const param_vector& theta, double t) {
  validate_params(spec, theta);
  if (t < 0.0) throw std::domain_error("derivative evaluated at negative time");
  switch (spec.family) {
    case model_family::four_pll: {
      const double c = theta.shape1, h = theta.shape2;
      if (t == 0.0) {
        if (h > 1.0) return 0.0;
        if (h == 1.0) return theta.b / c;
        throw std::domain_error("4pLL derivative is singular at t = 0 for h < 1");
      }
      // b·c^h·t^(h-1)·h/(c^h+t^h)^2 = (b·h/t) · w/(1+w)^2 with w = (c/t)^h.
      const double w = std::pow(c / t, h);
      if (!std::isfinite(w)) return 0.0;
      const double v = w / ((1.0 + w) * (1.0 + w));
      return theta.b * theta.shape2 / t * v;
    }
    case model_family::beta: {
      if (t >= spec.scal) throw std::domain_error("beta derivative evaluated at t >= scal");
      const double d1 = theta.shape1, d2 = theta.shape2;
      const double log_b = log_beta_norm(d1, d2);
      if (t == 0.0) {
        if (d1 > 1.0) return 0.0;
        if (d1 == 1.0) return theta.b * std::exp(log_b) / spec.scal;
        throw std::domain_error("beta derivative is singular at t = 0 for delta1 < 1");
      }
      const double x = t / spec.scal;
      const double m = std::exp(log_b + (d1 - 1.0) * std::log(x) + (d2 - 1.0) * std::log1p(-x));
      const double factor = d1 - (d1 + d2) * x;
      return theta.b * m * factor / spec.scal;
    }
  }
  throw std::logic_error("unknown model family");
}

double eval_abs_derivative(const model_spec& spec, const param_vector& theta, double t) {
  return std::fabs(eval_derivative(spec, theta, t));
}

bool derivative_singular_at_zero(const model_spec& spec, const param_vector& theta) {
  if (spec.family == model_family::four_pll) return theta.shape2 < 1.0;
  return theta.shape1 < 1.0;
}

double default_scal(const time_design& design) {
  design.validate();
  return 1.2 * design.end();
}

}  // namespace changeband
