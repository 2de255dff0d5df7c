#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "changeband/errors.hpp"
#include "changeband/io.hpp"

#include "helpers.hpp"

using namespace changeband;
using testing::exact_dataset;

namespace {

const param_vector theta2 = four_pll_params(8.791, -0.946, 17.589, 10.0);
const model_spec pll = model_spec::four_pll_spec();

std::vector<series> parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_series_csv(in, "test.csv");
}

analysis_result sample_result() {
  analysis_result r;
  r.fit.spec = model_spec::beta_spec(54.0);
  r.fit.theta = beta_params(6.997, 2.952, 0.506, 0.215);
  r.fit.rss = 1.25;
  r.fit.sigma2 = 1.25 / 43.0;
  r.fit.aic = -42.5;
  r.fit.converged = true;
  r.fit.n_starts_used = 25;
  r.fit.n_obs = 47;

  r.has_band = true;
  r.band.grid = {0.1, 0.2, 0.3};
  r.band.point_estimate = {0.5, 0.6, 0.7};
  r.band.pointwise_sd = {0.01, 0.02, 0.03};
  r.band.lower = {0.4, 0.39, 0.38};
  r.band.critical_value = 3.25;
  r.band.alpha = 0.05;
  r.band.study_start = 0.0;
  r.band.study_end = 45.0;
  r.band.first_level_valid = 493;
  r.band.first_level_failures = 7;

  r.has_report = true;
  r.lambda = threshold{0.013, "absolute"};
  r.report.reject_h0 = true;
  r.report.subsets = {{11.7, 24.5, 17.6}, {41.1, 45.0, 43.2}};
  r.changes = {{0.74, 0.25}, {0.1, 0.034}};

  r.cis.push_back({time_point_kind::start, 0, 11.7, 10.2, 13.5, 312, true});
  r.cis.push_back({time_point_kind::end, 0, 24.5, 22.0, 27.5, 312, true});
  r.cis.push_back({time_point_kind::max, 1, 43.2, 41.0, 44.9, 312, true});
  return r;
}

}  // namespace

TEST_CASE("single-series parsing") {
  const auto all = parse_text("time,value\n0,1.5\n0,1.6\n3,2.0\n9,2.5\n15,2.0\n21,1.0\n");
  REQUIRE(all.size() == 1);
  const dataset& data = all[0].data;
  CHECK(all[0].id.empty());
  CHECK(data.design.times == std::vector<double>{0, 3, 9, 15, 21});
  CHECK(data.design.replicates == std::vector<int>{2, 1, 1, 1, 1});
  CHECK(data.responses[0] == std::vector<double>{1.5, 1.6});
  CHECK(data.mean_at(0) == doctest::Approx(1.55).epsilon(1e-15));
}

TEST_CASE("rows may arrive in any time order") {
  const auto all = parse_text("time,value\n21,1.0\n0,1.5\n9,2.5\n0,1.6\n3,2.0\n");
  CHECK(all[0].data.design.times == std::vector<double>{0, 3, 9, 21});
  CHECK(all[0].data.responses[0] == std::vector<double>{1.5, 1.6});
}

TEST_CASE("batch parsing keeps first-appearance id order") {
  const auto all = parse_text(
      "id,time,value\n"
      "g2,0,1.0\ng1,0,2.0\ng2,3,1.1\ng3,0,3.0\ng1,3,2.1\ng3,3,3.1\n");
  REQUIRE(all.size() == 3);
  CHECK(all[0].id == "g2");
  CHECK(all[1].id == "g1");
  CHECK(all[2].id == "g3");
  CHECK(all[1].data.responses[0] == std::vector<double>{2.0});
}

TEST_CASE("header variants") {
  CHECK_NOTHROW(parse_text("Time, Value\n1,2\n2,3\n"));
  CHECK_NOTHROW(parse_text("\xef\xbb\xbftime,value\r\n1,2\r\n2,3\r\n"));  // BOM + CRLF
  CHECK_NOTHROW(parse_text("\n\ntime,value\n1,2\n2,3\n"));                // leading blank lines
  CHECK_THROWS_AS(parse_text("t,y\n1,2\n"), data_error);
}

TEST_CASE("parse errors carry the line number") {
  CHECK_THROWS_WITH_AS(parse_text("time,value\n1,2\nbad,3\n"),
                       doctest::Contains("test.csv:3"), data_error);
  CHECK_THROWS_WITH_AS(parse_text("time,value\n1,2\n2\n"), doctest::Contains(":3"), data_error);
  CHECK_THROWS_WITH_AS(parse_text("time,value\n-1,2\n"), doctest::Contains("negative"), data_error);
  CHECK_THROWS_AS(parse_text("time,value\n1,nan\n2,3\n"), data_error);
  CHECK_THROWS_AS(parse_text("time,value\n1,1e999\n2,3\n"), data_error);
  CHECK_THROWS_AS(parse_text("id,time,value\n,1,2\n"), data_error);
}

TEST_CASE("degenerate files") {
  CHECK_THROWS_AS(parse_text(""), data_error);
  CHECK_THROWS_AS(parse_text("time,value\n"), data_error);          // header only
  CHECK_THROWS_AS(parse_text("time,value\n1,2\n1,3\n"), data_error);  // single distinct time
}

TEST_CASE("json round-trip preserves every numeric field") {
  const analysis_result original = sample_result();
  std::stringstream buffer;
  write_json(original, buffer);
  const analysis_result copy = read_json(buffer);

  CHECK(copy.fit.spec.family == model_family::beta);
  CHECK(copy.fit.spec.scal == original.fit.spec.scal);
  CHECK(copy.fit.theta.a == original.fit.theta.a);
  CHECK(copy.fit.theta.b == original.fit.theta.b);
  CHECK(copy.fit.theta.shape1 == original.fit.theta.shape1);
  CHECK(copy.fit.theta.shape2 == original.fit.theta.shape2);
  CHECK(copy.fit.rss == original.fit.rss);
  CHECK(copy.fit.sigma2 == original.fit.sigma2);
  CHECK(copy.fit.aic == original.fit.aic);
  CHECK(copy.fit.converged == original.fit.converged);
  CHECK(copy.fit.n_starts_used == original.fit.n_starts_used);
  CHECK(copy.fit.n_obs == original.fit.n_obs);

  REQUIRE(copy.has_band);
  CHECK(copy.band.grid == original.band.grid);
  CHECK(copy.band.point_estimate == original.band.point_estimate);
  CHECK(copy.band.pointwise_sd == original.band.pointwise_sd);
  CHECK(copy.band.lower == original.band.lower);
  CHECK(copy.band.critical_value == original.band.critical_value);
  CHECK(copy.band.first_level_valid == original.band.first_level_valid);

  REQUIRE(copy.has_report);
  CHECK(copy.lambda.lambda == original.lambda.lambda);
  REQUIRE(copy.report.subsets.size() == 2);
  CHECK(copy.report.subsets[1].t_max == original.report.subsets[1].t_max);
  REQUIRE(copy.changes.size() == 2);
  CHECK(copy.changes[0].absolute_change == original.changes[0].absolute_change);

  REQUIRE(copy.cis.size() == 3);
  CHECK(copy.cis[2].kind == time_point_kind::max);
  CHECK(copy.cis[2].subset == 1);
  CHECK(copy.cis[0].lo == original.cis[0].lo);
}

TEST_CASE("json round-trip keeps an infinite aic as null") {
  analysis_result r = sample_result();
  r.fit.aic = -std::numeric_limits<double>::infinity();
  std::stringstream buffer;
  write_json(r, buffer);
  CHECK(buffer.str().find("\"aic\": null") != std::string::npos);
  CHECK(read_json(buffer).fit.aic == -std::numeric_limits<double>::infinity());
}

TEST_CASE("read_json rejects malformed input") {
  std::istringstream garbage("{not json");
  CHECK_THROWS_AS(read_json(garbage), data_error);
  std::istringstream missing("{\"model\":{\"family\":\"4pll\",\"params\":{}}}");
  CHECK_THROWS_AS(read_json(missing), data_error);
}

TEST_CASE("band csv has one row per grid point") {
  const analysis_result r = sample_result();
  std::ostringstream out;
  write_band_csv(r, out);

  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t,estimate,sd,lower");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);

  analysis_result no_band;
  CHECK_THROWS_AS(write_band_csv(no_band, out), std::invalid_argument);
}

TEST_CASE("csv numbers survive a text round-trip") {
  analysis_result r = sample_result();
  r.band.grid = {1.0 / 3.0, 0.1 + 0.2};
  r.band.point_estimate = {1e-17, 12345.678901234567};
  r.band.pointwise_sd = {0.1, 0.2};
  r.band.lower = {-1.0 / 7.0, 3.0};
  std::ostringstream out;
  write_band_csv(r, out);

  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);  // header
  std::getline(lines, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 1.0 / 3.0);
}

TEST_CASE("cis csv") {
  const analysis_result r = sample_result();
  std::ostringstream out;
  write_cis_csv(r, out);
  const std::string text = out.str();
  CHECK(text.find("kind,subset,estimate,lo,hi,valid_runs,contains_estimate") == 0);
  CHECK(text.find("start,0,") != std::string::npos);
  CHECK(text.find("max,1,") != std::string::npos);
}

TEST_CASE("svg structure") {
  const analysis_result r = sample_result();
  const dataset data = exact_dataset(pll, theta2);
  std::ostringstream out;
  write_svg(r, data, out);
  const std::string svg = out.str();

  const auto count = [&](const std::string& needle) {
    std::size_t hits = 0, pos = 0;
    while ((pos = svg.find(needle, pos)) != std::string::npos) {
      ++hits;
      pos += needle.size();
    }
    return hits;
  };

  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count("class=\"lambda-line\"") == 1);
  CHECK(count("class=\"region-line\"") == 2 * r.report.subsets.size());
  CHECK(count("<polyline") == 3);  // fitted curve, derivative estimate, band
  CHECK(count("class=\"data-point\"") == 47);
}

TEST_CASE("window semantics") {
  change_report report;
  report.reject_h0 = true;
  report.subsets = {{12.0, 20.0, 15.0}};

  window_filter contain{10.0, 25.0, false};
  window_filter overlap{10.0, 25.0, true};
  CHECK(window_passes(report, contain));

  report.subsets = {{5.0, 20.0, 12.0}};
  CHECK_FALSE(window_passes(report, contain));  // starts before the window
  CHECK(window_passes(report, overlap));

  report.subsets = {{26.0, 30.0, 28.0}};
  CHECK_FALSE(window_passes(report, overlap));

  report.subsets.clear();
  CHECK_FALSE(window_passes(report, contain));
}

TEST_CASE("batch screening") {
  std::vector<series> input;
  input.push_back({"strong", exact_dataset(pll, theta2)});
  param_vector flat = theta2;
  flat.b = 0.0;
  input.push_back({"flat", exact_dataset(pll, flat)});

  analysis_options opts;
  opts.model = model_choice::four_pll;
  opts.lambda = default_lambda(45.0);
  opts.band.b1 = 60;
  opts.band.b2 = 5;
  opts.band.seed = 2;
  opts.band.grid_step = 0.5;

  window_filter window{10.0, 25.0, false};
  const auto entries = batch_screen(input, opts, &window);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].id == "strong");
  CHECK(entries[0].ok);
  CHECK(entries[0].result.report.reject_h0);
  CHECK(entries[0].window_pass);
  CHECK(entries[1].id == "flat");
  CHECK(entries[1].ok);
  CHECK_FALSE(entries[1].result.report.reject_h0);
  CHECK_FALSE(entries[1].window_pass);

  SUBCASE("json and csv writers cover both outcomes") {
    std::ostringstream json_out, csv_out;
    write_batch_json(entries, json_out);
    write_batch_csv(entries, csv_out);
    CHECK(json_out.str().find("\"strong\"") != std::string::npos);
    CHECK(csv_out.str().find("strong,1,") != std::string::npos);
    CHECK(csv_out.str().find("flat,1,") != std::string::npos);
  }

  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(batch_screen({}, opts, nullptr), data_error);
  }

  SUBCASE("an aggregate error fires only when every series fails") {
    dataset tiny;
    tiny.design = {{0.0, 1.0}, {1, 1}};
    tiny.responses = {{1.0}, {2.0}};
    std::vector<series> bad;
    bad.push_back({"a", tiny});
    bad.push_back({"b", tiny});
    CHECK_THROWS_AS(batch_screen(bad, opts, nullptr), numerical_error);

    bad.push_back({"good", exact_dataset(pll, theta2)});
    const auto mixed = batch_screen(bad, opts, nullptr);
    CHECK_FALSE(mixed[0].ok);
    CHECK(!mixed[0].error.empty());
    CHECK(mixed[2].ok);
  }
}

TEST_CASE("analyze_series picks the generating family automatically") {
  analysis_options opts;
  opts.lambda = default_lambda(45.0);
  opts.band.b1 = 60;
  opts.band.b2 = 5;
  opts.band.seed = 8;
  opts.band.grid_step = 0.5;

  const analysis_result r = analyze_series(exact_dataset(pll, theta2), opts);
  CHECK(r.fit.spec.family == model_family::four_pll);
  CHECK(r.has_band);
  CHECK(r.has_report);
  CHECK(r.report.reject_h0);
  CHECK(r.changes.size() == r.report.subsets.size());
}
