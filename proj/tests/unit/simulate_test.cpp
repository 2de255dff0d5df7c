#include <numeric>
#include <stdexcept>

#include <doctest.h>

#include "changeband/simulate.hpp"

using namespace changeband;

TEST_CASE("scenario registry") {
  const scenario_spec s2 = builtin_scenario(2, sigma_level::medium);
  CHECK(s2.model.family == model_family::four_pll);
  CHECK(s2.theta.a == 8.791);
  CHECK(s2.theta.b == -0.946);
  CHECK(s2.theta.shape1 == 17.589);
  CHECK(s2.theta.shape2 == 10.0);
  CHECK(s2.sigma == 0.297);
  CHECK(s2.design.total_observations() == 47);
  CHECK(s2.design.times.size() == 9);
  CHECK(s2.design.times.back() == 45.0);
  CHECK(s2.lambda == doctest::Approx(0.012999166682692360).epsilon(1e-15));

  const scenario_spec s4 = builtin_scenario(4, sigma_level::small);
  CHECK(s4.model.family == model_family::beta);
  CHECK(s4.model.scal == doctest::Approx(54.0).epsilon(1e-15));
  CHECK(s4.theta.shape1 == 0.506);
  CHECK(s4.sigma == 0.283);

  CHECK(builtin_scenario(3, sigma_level::large).sigma == 2.380);
  CHECK(builtin_scenario(6, sigma_level::mid_large).sigma == 0.849);

  CHECK_THROWS_AS(builtin_scenario(0, sigma_level::small), std::invalid_argument);
  CHECK_THROWS_AS(builtin_scenario(7, sigma_level::small), std::invalid_argument);
}

TEST_CASE("sigma scaling") {
  CHECK(sigma_level_multiplier(sigma_level::small) == 0.5);
  CHECK(sigma_level_multiplier(sigma_level::mid_small) == 0.75);
  CHECK(sigma_level_multiplier(sigma_level::medium) == 1.0);
  CHECK(sigma_level_multiplier(sigma_level::mid_large) == 1.5);
  CHECK(sigma_level_multiplier(sigma_level::large) == 2.0);

  CHECK(sigma_transform(0.946, 3.783, 1.19) == doctest::Approx(0.29757864128998150).epsilon(1e-15));
  CHECK(sigma_transform(3.783, 3.783, 1.19) == doctest::Approx(1.19).epsilon(1e-15));
}

TEST_CASE("true regions per scenario") {
  const auto regions_of = [](int id) { return true_regions(builtin_scenario(id, sigma_level::medium)); };

  CHECK(regions_of(1).empty());

  const auto r2 = regions_of(2);
  REQUIRE(r2.size() == 1);
  CHECK(r2[0].t_start == doctest::Approx(11.7).epsilon(1e-12));
  CHECK(r2[0].t_end == doctest::Approx(24.5).epsilon(1e-12));

  const auto r3 = regions_of(3);
  REQUIRE(r3.size() == 1);
  CHECK(r3[0].t_start == doctest::Approx(5.8).epsilon(1e-12));
  CHECK(r3[0].t_end == doctest::Approx(36.4).epsilon(1e-12));

  const auto r4 = regions_of(4);
  REQUIRE(r4.size() == 2);
  CHECK(r4[0].t_start == 0.0);  // derivative singular at 0 counts as exceeding lambda
  CHECK(r4[0].t_end == doctest::Approx(33.7).epsilon(1e-12));
  CHECK(r4[1].t_start == doctest::Approx(41.1).epsilon(1e-12));
  CHECK(r4[1].t_end == 45.0);

  const auto r5 = regions_of(5);
  REQUIRE(r5.size() == 2);
  CHECK(r5[0].t_start == doctest::Approx(5.7).epsilon(1e-12));
  CHECK(r5[0].t_end == doctest::Approx(38.2).epsilon(1e-12));
  CHECK(r5[1].t_start == doctest::Approx(39.3).epsilon(1e-12));
  CHECK(r5[1].t_end == 45.0);

  const auto r6 = regions_of(6);
  REQUIRE(r6.size() == 1);
  CHECK(r6[0].t_start == 0.0);
  CHECK(r6[0].t_end == doctest::Approx(29.0).epsilon(1e-12));
}

TEST_CASE("true regions with a custom threshold") {
  const scenario_spec s2 = builtin_scenario(2, sigma_level::medium);
  // raising lambda above the maximal slope leaves nothing
  const auto none = true_regions(s2.model, s2.theta, 0.2, 0.0, 45.0);
  CHECK(none.empty());
  // lambda below every slope value except t=0 covers the whole period
  const auto wide = true_regions(s2.model, s2.theta, 1e-9, 0.0, 45.0);
  REQUIRE(wide.size() == 1);
  CHECK(wide[0].t_end == 45.0);
}

TEST_CASE("tiny simulation run") {
  const scenario_spec s1 = builtin_scenario(1, sigma_level::small);
  bootstrap_config cfg;
  cfg.b1 = 80;  // leaves headroom over the 50-valid-sample floor when refits get censored
  cfg.b2 = 5;
  cfg.seed = 11;
  cfg.grid_step = 0.5;

  const simulation_summary summary = run_simulation(s1, 5, cfg, true);
  CHECK(summary.runs == 5);
  CHECK(summary.rejections == 0);  // scenario 1 has no relevant change
  CHECK(summary.failed_runs == 0);
  CHECK(summary.truth.empty());
  CHECK(summary.per_subset.empty());
  REQUIRE(!summary.subset_count_histogram.empty());
  CHECK(summary.subset_count_histogram[0] == 5);
  const int histogram_total = std::accumulate(summary.subset_count_histogram.begin(),
                                              summary.subset_count_histogram.end(), 0);
  CHECK(histogram_total == summary.runs - summary.failed_runs);
  CHECK(summary.run_regions.size() == 5);
  CHECK(summary.run_ok.size() == 5);

  SUBCASE("fixed seed reproduces the summary") {
    const simulation_summary again = run_simulation(s1, 5, cfg, true);
    CHECK(again.rejections == summary.rejections);
    for (std::size_t i = 0; i < summary.run_regions.size(); ++i)
      CHECK(again.run_regions[i].size() == summary.run_regions[i].size());
  }
}

TEST_CASE("simulation detects the strong scenario") {
  const scenario_spec s2 = builtin_scenario(2, sigma_level::small);
  bootstrap_config cfg;
  cfg.b1 = 200;
  cfg.b2 = 15;
  cfg.seed = 5;
  cfg.grid_step = 0.5;

  const simulation_summary summary = run_simulation(s2, 6, cfg, false);
  CHECK(summary.rejections >= 5);  // strong signal, weak noise
  REQUIRE(summary.truth.size() == 1);
  CHECK(summary.per_subset.size() == 1);
  CHECK(summary.per_subset[0].matching_runs <= summary.runs);
}
