#pragma once

#include "changeband/dataset.hpp"

namespace changeband {

enum class model_family { four_pll, beta };

// Time-response model family plus the beta model's fixed scaling constant.
// Both families carry r = 4 free parameters.
struct model_spec {
  model_family family = model_family::four_pll;
  double scal = 0.0;  // beta only; must exceed the last design time

  static constexpr int param_count = 4;

  static model_spec four_pll_spec() { return {model_family::four_pll, 0.0}; }
  static model_spec beta_spec(double scal) { return {model_family::beta, scal}; }
};

// θ. The meaning of the shape slots depends on the family:
//   four_pll: shape1 = c (inflection location, weeks), shape2 = h (Hill slope)
//   beta:     shape1 = δ1, shape2 = δ2
struct param_vector {
  double a = 0.0;  // baseline response
  double b = 0.0;  // asymptotic (4pLL) or peak (beta) change
  double shape1 = 1.0;
  double shape2 = 1.0;
};

inline param_vector four_pll_params(double a, double b, double c, double h) { return {a, b, c, h}; }
inline param_vector beta_params(double a, double b, double d1, double d2) { return {a, b, d1, d2}; }

// Throws std::invalid_argument when θ violates the family's constraints
// (positive finite shapes, shape values capped at 150 to keep t^h and the
// beta normalizing constant representable).
void validate_params(const model_spec& spec, const param_vector& theta);

// log of B_δ = (δ1+δ2)^(δ1+δ2) / (δ1^δ1 · δ2^δ2); always ≥ 0.
double log_beta_norm(double d1, double d2);

// f(t, θ).  Throws std::domain_error for t < 0 or (beta) t ≥ scal.
double eval_model(const model_spec& spec, const param_vector& theta, double t);

// f′(t, θ), analytic.  Throws std::domain_error at t = 0 when the derivative
// is singular there (4pLL with h < 1, beta with δ1 < 1).
double eval_derivative(const model_spec& spec, const param_vector& theta, double t);

// |f′(t, θ)|.
double eval_abs_derivative(const model_spec& spec, const param_vector& theta, double t);

// True when f′ cannot be evaluated at t = 0 for this θ.
bool derivative_singular_at_zero(const model_spec& spec, const param_vector& theta);

// Convention for the beta scaling constant when the caller does not fix one:
// 1.2 × last design time.
double default_scal(const time_design& design);

}  // namespace changeband
