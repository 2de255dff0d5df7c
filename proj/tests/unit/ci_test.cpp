#include <stdexcept>

#include <doctest.h>

#include "changeband/ci.hpp"
#include "changeband/detection.hpp"
#include "changeband/errors.hpp"

#include "helpers.hpp"

using namespace changeband;
using testing::exact_dataset;

namespace {

const param_vector theta2 = four_pll_params(8.791, -0.946, 17.589, 10.0);
const model_spec pll = model_spec::four_pll_spec();

ci_config small_ci(std::uint64_t seed) {
  ci_config cfg;
  cfg.band.b1 = 60;
  cfg.band.b2 = 5;
  cfg.band.seed = seed;
  cfg.band.grid_step = 0.5;
  cfg.b3 = 40;
  return cfg;
}

}  // namespace

TEST_CASE("zero-noise data yields degenerate intervals") {
  const dataset data = exact_dataset(pll, theta2);
  const fit_result fit = fit_ols(data, pll);
  const ci_config cfg = small_ci(17);
  const confidence_band band = lower_band(data, fit, cfg.band);
  const double lambda = default_lambda(45.0).lambda;
  const change_report report = extract_regions(band, lambda);
  REQUIRE(report.subsets.size() == 1);

  const auto cis = time_point_cis(data, fit, report, cfg, lambda);
  REQUIRE(cis.size() == 3);
  for (const time_point_ci& ci : cis) {
    CHECK(ci.lo == doctest::Approx(ci.estimate).epsilon(1e-9));
    CHECK(ci.hi == doctest::Approx(ci.estimate).epsilon(1e-9));
    CHECK(ci.contains_estimate);
    CHECK(ci.valid_runs == 40);
  }
  CHECK(cis[0].kind == time_point_kind::start);
  CHECK(cis[1].kind == time_point_kind::end);
  CHECK(cis[2].kind == time_point_kind::max);

  SUBCASE("same seed reproduces the intervals") {
    const auto again = time_point_cis(data, fit, report, cfg, lambda);
    for (std::size_t i = 0; i < cis.size(); ++i) {
      CHECK(cis[i].lo == again[i].lo);
      CHECK(cis[i].hi == again[i].hi);
    }
  }
}

TEST_CASE("ci requires a non-empty report") {
  const dataset data = exact_dataset(pll, theta2);
  const fit_result fit = fit_ols(data, pll);
  change_report empty;
  CHECK_THROWS_AS(time_point_cis(data, fit, empty, small_ci(1), 0.013), std::invalid_argument);
}

TEST_CASE("ci config validation") {
  ci_config cfg = small_ci(1);
  cfg.b3 = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_ci(1);
  cfg.min_valid_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_ci(1);
  cfg.min_valid_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("onset comparison on noise-free groups") {
  const dataset group_a = exact_dataset(pll, theta2);
  param_vector shifted = theta2;
  shifted.shape1 = 21.0;
  const dataset group_b = exact_dataset(pll, shifted);

  const fit_result fit_a = fit_ols(group_a, pll);
  const fit_result fit_b = fit_ols(group_b, pll);
  const double lambda = default_lambda(45.0).lambda;

  const onset_comparison cmp = compare_onsets(group_a, group_b, fit_a, fit_b, small_ci(33), lambda);
  CHECK(cmp.onset_a < cmp.onset_b);  // the shifted curve starts changing later
  CHECK(cmp.difference == doctest::Approx(cmp.onset_a - cmp.onset_b).epsilon(1e-12));
  CHECK(cmp.pairs_used == 40);
  CHECK(cmp.pairs_dropped == 0);
  CHECK(cmp.lo == doctest::Approx(cmp.difference).epsilon(1e-9));
  CHECK(cmp.hi == doctest::Approx(cmp.difference).epsilon(1e-9));
}

TEST_CASE("comparison refuses groups without detected change") {
  const dataset group_a = exact_dataset(pll, theta2);
  param_vector flat = theta2;
  flat.b = -0.01;  // well under any reasonable threshold
  const dataset group_b = exact_dataset(pll, flat);

  const fit_result fit_a = fit_ols(group_a, pll);
  const fit_result fit_b = fit_ols(group_b, pll);
  CHECK_THROWS_AS(
      compare_onsets(group_a, group_b, fit_a, fit_b, small_ci(9), default_lambda(45.0).lambda),
      numerical_error);
}
