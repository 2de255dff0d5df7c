#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "changeband/detection.hpp"

using namespace changeband;

namespace {

confidence_band synthetic_band(std::vector<double> grid, std::vector<double> lower, double study_start,
                               double study_end) {
  confidence_band band;
  band.grid = std::move(grid);
  band.lower = std::move(lower);
  band.point_estimate = band.lower;
  band.pointwise_sd.assign(band.grid.size(), 1.0);
  band.study_start = study_start;
  band.study_end = study_end;
  return band;
}

}  // namespace

TEST_CASE("default lambda") {
  const threshold th = default_lambda(45.0, 1.5, 1.0);
  CHECK(th.lambda == doctest::Approx(0.012999166682692360).epsilon(1e-15));
  CHECK_FALSE(th.provenance.empty());

  CHECK(default_lambda(45.0, 2.0, 1.0).lambda == doctest::Approx(1.0 / 45.0).epsilon(1e-15));
  CHECK(default_lambda(45.0, 1.5, 0.5).lambda ==
        doctest::Approx(2.0 * 0.012999166682692360).epsilon(1e-14));

  CHECK_THROWS_AS(default_lambda(0.0, 1.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(default_lambda(45.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(default_lambda(45.0, 1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(default_lambda(45.0, 1.5, 1.5), std::invalid_argument);
}

TEST_CASE("h0 test is strict") {
  const auto band = synthetic_band({1, 2, 3}, {1.0, 1.0, 1.0}, 0, 3);
  CHECK_FALSE(test_h0(band, 1.0));
  CHECK(test_h0(band, 0.999));

  const auto report = extract_regions(band, 1.0);
  CHECK_FALSE(report.reject_h0);
  CHECK(report.subsets.empty());
}

TEST_CASE("region extraction interpolates interior endpoints") {
  const auto band = synthetic_band({1, 2, 3, 4, 5}, {0.0, 2.0, 2.0, 0.0, 0.0}, 0, 5);
  const auto report = extract_regions(band, 1.0);
  REQUIRE(report.subsets.size() == 1);
  const change_subset& s = report.subsets[0];
  // lower - lambda crosses zero halfway between the bracketing grid points
  CHECK(s.t_start == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(s.t_end == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(s.t_max == 2.0);  // earliest grid point of the maximal excess
  CHECK(report.reject_h0);
}

TEST_CASE("regions touching the grid boundary report the study boundary") {
  const auto band = synthetic_band({1, 2, 3, 4}, {2.0, 2.0, 0.0, 2.0}, 0, 4.5);
  const auto report = extract_regions(band, 1.0);
  REQUIRE(report.subsets.size() == 2);
  CHECK(report.subsets[0].t_start == 0.0);  // clipped to study start
  CHECK(report.subsets[0].t_end == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(report.subsets[1].t_end == 4.5);  // clipped to study end
  CHECK(report.subsets[1].t_start == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("multiple disjoint regions stay ordered") {
  const auto band =
      synthetic_band({1, 2, 3, 4, 5, 6, 7}, {2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 0.0}, 1, 7);
  const auto report = extract_regions(band, 1.0);
  REQUIRE(report.subsets.size() == 3);
  for (std::size_t j = 1; j < report.subsets.size(); ++j)
    CHECK(report.subsets[j - 1].t_end < report.subsets[j].t_start);
}

TEST_CASE("uneven crossing interpolates proportionally") {
  const auto band = synthetic_band({0.5, 1.5}, {0.0, 4.0}, 0.5, 1.5);
  const auto report = extract_regions(band, 1.0);
  REQUIRE(report.subsets.size() == 1);
  // excess goes -1 -> 3, zero at 1/4 of the step past the first point
  CHECK(report.subsets[0].t_start == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.subsets[0].t_end == 1.5);
}

TEST_CASE("change summary") {
  const model_spec pll = model_spec::four_pll_spec();
  const param_vector theta2 = four_pll_params(8.791, -0.946, 17.589, 10.0);

  fit_result fit;
  fit.spec = pll;
  fit.theta = theta2;

  change_report report;
  report.reject_h0 = true;
  report.subsets.push_back({11.7, 24.5, 17.6});

  const auto changes = change_summary(fit, report);
  REQUIRE(changes.size() == 1);
  const double expected =
      std::abs(eval_model(pll, theta2, 24.5) - eval_model(pll, theta2, 11.7));
  CHECK(changes[0].absolute_change == doctest::Approx(expected).epsilon(1e-14));
  CHECK(changes[0].fraction_of_total == doctest::Approx(expected / 0.946).epsilon(1e-14));

  SUBCASE("flat model reports zero fraction") {
    fit.theta.b = 0.0;
    const auto flat = change_summary(fit, report);
    CHECK(flat[0].absolute_change == 0.0);
    CHECK(flat[0].fraction_of_total == 0.0);
  }
}
