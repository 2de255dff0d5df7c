#include <cmath>
#include <limits>
#include <stdexcept>

#include <doctest.h>

#include "changeband/errors.hpp"
#include "changeband/fitting.hpp"

#include "helpers.hpp"

using namespace changeband;
using testing::exact_dataset;
using testing::noisy_dataset;
using testing::study_design;

namespace {

const param_vector theta2 = four_pll_params(8.791, -0.946, 17.589, 10.0);
const param_vector theta4 = beta_params(6.997, 2.952, 0.506, 0.215);
const model_spec pll = model_spec::four_pll_spec();
const model_spec bet = model_spec::beta_spec(54.0);

double rss_of(const dataset& data, const model_spec& spec, const param_vector& theta) {
  double rss = 0.0;
  for (std::size_t p = 0; p < data.design.times.size(); ++p) {
    const double f = eval_model(spec, theta, data.design.times[p]);
    for (double y : data.responses[p]) rss += (y - f) * (y - f);
  }
  return rss;
}

}  // namespace

TEST_CASE("zero-noise recovery, 4pll") {
  const dataset data = exact_dataset(pll, theta2);
  const fit_result fit = fit_ols(data, pll);
  CHECK(fit.converged);
  CHECK(fit.rss <= 1e-10 * data.total_observations());
  CHECK(fit.theta.a == doctest::Approx(8.791).epsilon(1e-4));
  CHECK(fit.theta.b == doctest::Approx(-0.946).epsilon(1e-4));
  CHECK(fit.theta.shape1 == doctest::Approx(17.589).epsilon(1e-3));
  CHECK(fit.theta.shape2 == doctest::Approx(10.0).epsilon(1e-2));
  CHECK(fit.n_obs == 47);
}

TEST_CASE("zero-noise recovery, beta") {
  const dataset data = exact_dataset(bet, theta4);
  const fit_result fit = fit_ols(data, bet);
  CHECK(fit.converged);
  CHECK(fit.rss <= 1e-10 * data.total_observations());
  CHECK(fit.theta.b == doctest::Approx(2.952).epsilon(1e-3));
  CHECK(fit.theta.shape1 == doctest::Approx(0.506).epsilon(1e-2));
}

TEST_CASE("noisy fit bookkeeping") {
  const dataset data = noisy_dataset(pll, theta2, 0.149, 99);
  const fit_result fit = fit_ols(data, pll);
  CHECK(fit.converged);
  CHECK(fit.sigma2 == doctest::Approx(fit.rss / (47 - 4)).epsilon(1e-12));
  CHECK(fit.aic == doctest::Approx(aic(fit, 47)).epsilon(1e-12));
  CHECK_FALSE(fit.degenerate);
  CHECK(std::sqrt(fit.sigma2) == doctest::Approx(0.149).epsilon(0.35));
}

TEST_CASE("fit rss beats every multi-start initial point") {
  const dataset data = noisy_dataset(pll, theta2, 0.3, 99);
  const fit_result fit = fit_ols(data, pll);
  for (const param_vector& start : multistart_grid(data, pll))
    CHECK(fit.rss <= rss_of(data, pll, start) + 1e-9);
}

TEST_CASE("level-shift data is rejected as a step escape") {
  // A pure jump between two design times: the RSS optimum runs h toward the
  // box edge, with an |f'| spike no observation can support.
  dataset data;
  data.design = {{0.0, 3.0, 9.0, 15.0, 21.0, 27.0, 33.0, 39.0, 45.0}, {5, 5, 5, 5, 5, 5, 5, 4, 8}};
  data.responses.resize(9);
  for (std::size_t p = 0; p < 9; ++p) {
    const double level = data.design.times[p] < 18.0 ? 8.7 : 8.0;
    data.responses[p].assign(static_cast<std::size_t>(data.design.replicates[p]), level);
    data.responses[p][0] += 0.01;  // keep sigma2 > 0
  }
  CHECK_THROWS_AS(fit_ols(data, pll), step_fit_error);
}

TEST_CASE("warm start short-circuits the grid") {
  const dataset data = exact_dataset(pll, theta2);
  fit_options opts;
  opts.warm_start = theta2;
  opts.warm_start_only = true;
  const fit_result fit = fit_ols(data, pll, opts);
  CHECK(fit.converged);
  CHECK(fit.n_starts_used == 1);
  CHECK(fit.rss <= 1e-12);
}

TEST_CASE("degenerate constant data") {
  dataset data = exact_dataset(pll, four_pll_params(5.0, 0.0, 10.0, 2.0));
  const fit_result fit = fit_ols(data, pll);
  CHECK(fit.degenerate);
  CHECK(fit.aic == -std::numeric_limits<double>::infinity());
}

TEST_CASE("aic formula") {
  fit_result fit;
  fit.rss = 4.7;
  CHECK(aic(fit, 47) == doctest::Approx(-98.221499370720147).epsilon(1e-14));
  fit.rss = 0.0;
  CHECK_THROWS_AS(aic(fit, 47), std::domain_error);
  fit.rss = -1.0;
  CHECK_THROWS_AS(aic(fit, 47), std::domain_error);
}

TEST_CASE("model selection") {
  const dataset data = exact_dataset(pll, theta2);

  SUBCASE("picks the generating family on clean data") {
    const fit_result fit = select_model(data, {bet, pll});
    CHECK(fit.spec.family == model_family::four_pll);
  }
  SUBCASE("ties break towards the earlier candidate") {
    const fit_result fit = select_model(data, {pll, pll});
    CHECK(fit.spec.family == model_family::four_pll);
  }
  SUBCASE("empty candidate list is rejected") {
    CHECK_THROWS_AS(select_model(data, {}), std::invalid_argument);
  }
}

TEST_CASE("input guards") {
  dataset small;
  small.design = {{0.0, 1.0, 2.0}, {1, 1, 1}};
  small.responses = {{1.0}, {2.0}, {3.0}};
  CHECK_THROWS_AS(fit_ols(small, pll), data_error);

  const dataset data = exact_dataset(pll, theta2);
  CHECK_THROWS_AS(fit_ols(data, model_spec::beta_spec(40.0)), std::invalid_argument);  // scal <= t_m
  CHECK_THROWS_AS(fit_ols(data, model_spec::beta_spec(0.0)), std::invalid_argument);
}

TEST_CASE("parameter box and start grid shape") {
  const dataset data = exact_dataset(pll, theta2);
  CHECK(multistart_grid(data, pll).size() == 15);   // 3 c-values x 5 h-values
  CHECK(multistart_grid(data, bet).size() == 25);   // 5 x 5 delta grid

  double lo[4], hi[4];
  parameter_box(pll, 45.0, lo, hi);
  CHECK(lo[2] == doctest::Approx(45.0 * 1e-4));
  CHECK(hi[2] == doctest::Approx(225.0));
  CHECK(hi[3] == doctest::Approx(50.0));
}
