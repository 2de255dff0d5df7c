#include "changeband/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "changeband/errors.hpp"
#include "changeband/parallel.hpp"

namespace changeband {

using ordered_json = nlohmann::ordered_json;

namespace {

// ------------------------------ CSV input ---------------------------------

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return s.substr(i);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(trim(field));
  return fields;
}

double parse_double(const std::string& field, const std::string& source, int line_no, const char* what) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw data_error(source + ":" + std::to_string(line_no) + ": cannot parse " + what + " '" + field + "'");
  if (!std::isfinite(value))
    throw data_error(source + ":" + std::to_string(line_no) + ": non-finite " + what + " '" + field + "'");
  return value;
}

}  // namespace

std::vector<series> parse_series_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  int line_no = 0;
  bool batch = false;
  bool have_header = false;

  // id order by first appearance, times collected per id.
  std::vector<std::string> id_order;
  std::map<std::string, std::map<double, std::vector<double>>> by_id;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xef) line = line.substr(3);
    if (trim(line).empty()) continue;

    if (!have_header) {
      const std::string header = lower(trim(line));
      std::string compact;
      for (char c : header)
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
      if (compact == "time,value") batch = false;
      else if (compact == "id,time,value") batch = true;
      else
        throw data_error(source_name + ":" + std::to_string(line_no) +
                         ": expected header 'time,value' or 'id,time,value', got '" + trim(line) + "'");
      have_header = true;
      continue;
    }

    const std::vector<std::string> fields = split_fields(line);
    const std::size_t expected = batch ? 3u : 2u;
    if (fields.size() != expected)
      throw data_error(source_name + ":" + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                       " fields, got " + std::to_string(fields.size()));

    const std::string id = batch ? fields[0] : std::string();
    if (batch && id.empty())
      throw data_error(source_name + ":" + std::to_string(line_no) + ": empty id");
    const double t = parse_double(fields[batch ? 1 : 0], source_name, line_no, "time");
    const double y = parse_double(fields[batch ? 2 : 1], source_name, line_no, "value");
    if (t < 0.0) throw data_error(source_name + ":" + std::to_string(line_no) + ": negative time");

    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) id_order.push_back(id);
    it->second[t].push_back(y);
  }

  if (!have_header) throw data_error(source_name + ": empty file");
  if (by_id.empty()) throw data_error(source_name + ": no data rows after the header");

  std::vector<series> out;
  out.reserve(id_order.size());
  for (const std::string& id : id_order) {
    const auto& times = by_id[id];
    series s;
    s.id = id;
    for (const auto& [t, ys] : times) {
      s.data.design.times.push_back(t);
      s.data.design.replicates.push_back(static_cast<int>(ys.size()));
      s.data.responses.push_back(ys);
    }
    try {
      s.data.validate();
    } catch (const std::exception& e) {
      throw data_error(source_name + ": series '" + (id.empty() ? "<single>" : id) + "': " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<series> parse_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open input file: " + path);
  return parse_series_csv(in, path);
}

dataset parse_dataset_file(const std::string& path) {
  std::vector<series> all = parse_series_file(path);
  if (all.size() != 1)
    throw data_error(path + ": expected a single series, found " + std::to_string(all.size()) +
                     " ids (use the batch command for id,time,value files)");
  return std::move(all.front().data);
}

// ------------------------------ pipeline ----------------------------------

analysis_result analyze_series(const dataset& data, const analysis_options& opts) {
  data.validate();
  const double scal = opts.scal > 0.0 ? opts.scal : default_scal(data.design);

  std::vector<model_spec> candidates;
  if (opts.model == model_choice::automatic) {
    candidates.push_back(model_spec::four_pll_spec());
    candidates.push_back(model_spec::beta_spec(scal));
  } else if (opts.model == model_choice::four_pll) {
    candidates.push_back(model_spec::four_pll_spec());
  } else {
    candidates.push_back(model_spec::beta_spec(scal));
  }

  analysis_result result;
  result.fit = select_model(data, candidates);
  result.band = lower_band(data, result.fit, opts.band);
  result.has_band = true;
  result.lambda = opts.lambda;
  result.report = extract_regions(result.band, opts.lambda.lambda);
  result.changes = change_summary(result.fit, result.report);
  result.has_report = true;
  return result;
}

// ------------------------------ JSON --------------------------------------

namespace {

ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ordered_json model_to_json(const model_spec& spec, const param_vector& theta) {
  ordered_json j;
  if (spec.family == model_family::four_pll) {
    j["family"] = "4pll";
    j["scal"] = nullptr;
    j["params"] = ordered_json{{"a", theta.a}, {"b", theta.b}, {"c", theta.shape1}, {"h", theta.shape2}};
  } else {
    j["family"] = "beta";
    j["scal"] = spec.scal;
    j["params"] =
        ordered_json{{"a", theta.a}, {"b", theta.b}, {"delta1", theta.shape1}, {"delta2", theta.shape2}};
  }
  return j;
}

void model_from_json(const ordered_json& j, model_spec& spec, param_vector& theta) {
  const std::string family = j.at("family").get<std::string>();
  const auto& params = j.at("params");
  theta.a = params.at("a").get<double>();
  theta.b = params.at("b").get<double>();
  if (family == "4pll") {
    spec = model_spec::four_pll_spec();
    theta.shape1 = params.at("c").get<double>();
    theta.shape2 = params.at("h").get<double>();
  } else if (family == "beta") {
    spec = model_spec::beta_spec(j.at("scal").get<double>());
    theta.shape1 = params.at("delta1").get<double>();
    theta.shape2 = params.at("delta2").get<double>();
  } else {
    throw data_error("unknown model family in JSON: " + family);
  }
}

const char* kind_name(time_point_kind kind) {
  switch (kind) {
    case time_point_kind::start: return "start";
    case time_point_kind::end: return "end";
    case time_point_kind::max: return "max";
  }
  return "?";
}

time_point_kind kind_from_name(const std::string& name) {
  if (name == "start") return time_point_kind::start;
  if (name == "end") return time_point_kind::end;
  if (name == "max") return time_point_kind::max;
  throw data_error("unknown time point kind in JSON: " + name);
}

ordered_json result_to_json(const analysis_result& result) {
  ordered_json j;
  j["model"] = model_to_json(result.fit.spec, result.fit.theta);
  j["fit"] = ordered_json{{"rss", result.fit.rss},
                          {"sigma2", result.fit.sigma2},
                          {"aic", finite_or_null(result.fit.aic)},
                          {"converged", result.fit.converged},
                          {"n_starts_used", result.fit.n_starts_used},
                          {"degenerate", result.fit.degenerate},
                          {"n_obs", result.fit.n_obs}};
  if (result.has_band) {
    const confidence_band& band = result.band;
    j["band"] = ordered_json{{"alpha", band.alpha},
                             {"critical_value", band.critical_value},
                             {"study_start", band.study_start},
                             {"study_end", band.study_end},
                             {"first_level_valid", band.first_level_valid},
                             {"first_level_failures", band.first_level_failures},
                             {"grid", band.grid},
                             {"point_estimate", band.point_estimate},
                             {"pointwise_sd", band.pointwise_sd},
                             {"lower", band.lower}};
  }
  if (result.has_report) {
    j["threshold"] = ordered_json{{"lambda", result.lambda.lambda}, {"provenance", result.lambda.provenance}};
    ordered_json subsets = ordered_json::array();
    for (std::size_t i = 0; i < result.report.subsets.size(); ++i) {
      const change_subset& s = result.report.subsets[i];
      ordered_json js{{"t_start", s.t_start}, {"t_end", s.t_end}, {"t_max", s.t_max}};
      if (i < result.changes.size()) {
        js["absolute_change"] = result.changes[i].absolute_change;
        js["fraction_of_total"] = result.changes[i].fraction_of_total;
      }
      subsets.push_back(std::move(js));
    }
    j["report"] = ordered_json{{"reject_h0", result.report.reject_h0}, {"subsets", std::move(subsets)}};
  }
  if (!result.cis.empty()) {
    ordered_json cis = ordered_json::array();
    for (const time_point_ci& ci : result.cis)
      cis.push_back(ordered_json{{"kind", kind_name(ci.kind)},
                                 {"subset", ci.subset},
                                 {"estimate", ci.estimate},
                                 {"lo", ci.lo},
                                 {"hi", ci.hi},
                                 {"valid_runs", ci.valid_runs},
                                 {"contains_estimate", ci.contains_estimate}});
    j["cis"] = std::move(cis);
  }
  return j;
}

}  // namespace

void write_json(const analysis_result& result, std::ostream& out) {
  out << result_to_json(result).dump(2) << '\n';
}

analysis_result read_json(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error(std::string("malformed JSON report: ") + e.what());
  }
  try {
    analysis_result result;
    model_from_json(j.at("model"), result.fit.spec, result.fit.theta);
    const auto& fit = j.at("fit");
    result.fit.rss = fit.at("rss").get<double>();
    result.fit.sigma2 = fit.at("sigma2").get<double>();
    result.fit.aic = fit.at("aic").is_null() ? -std::numeric_limits<double>::infinity()
                                             : fit.at("aic").get<double>();
    result.fit.converged = fit.at("converged").get<bool>();
    result.fit.n_starts_used = fit.at("n_starts_used").get<int>();
    result.fit.degenerate = fit.at("degenerate").get<bool>();
    result.fit.n_obs = fit.at("n_obs").get<int>();

    if (j.contains("band")) {
      const auto& band = j.at("band");
      result.has_band = true;
      result.band.alpha = band.at("alpha").get<double>();
      result.band.critical_value = band.at("critical_value").get<double>();
      result.band.study_start = band.at("study_start").get<double>();
      result.band.study_end = band.at("study_end").get<double>();
      result.band.first_level_valid = band.at("first_level_valid").get<int>();
      result.band.first_level_failures = band.at("first_level_failures").get<int>();
      result.band.grid = band.at("grid").get<std::vector<double>>();
      result.band.point_estimate = band.at("point_estimate").get<std::vector<double>>();
      result.band.pointwise_sd = band.at("pointwise_sd").get<std::vector<double>>();
      result.band.lower = band.at("lower").get<std::vector<double>>();
    }
    if (j.contains("report")) {
      result.has_report = true;
      result.lambda.lambda = j.at("threshold").at("lambda").get<double>();
      result.lambda.provenance = j.at("threshold").at("provenance").get<std::string>();
      result.report.reject_h0 = j.at("report").at("reject_h0").get<bool>();
      for (const auto& js : j.at("report").at("subsets")) {
        change_subset s;
        s.t_start = js.at("t_start").get<double>();
        s.t_end = js.at("t_end").get<double>();
        s.t_max = js.at("t_max").get<double>();
        result.report.subsets.push_back(s);
        if (js.contains("absolute_change")) {
          subset_change c;
          c.absolute_change = js.at("absolute_change").get<double>();
          c.fraction_of_total = js.at("fraction_of_total").get<double>();
          result.changes.push_back(c);
        }
      }
    }
    if (j.contains("cis")) {
      for (const auto& jc : j.at("cis")) {
        time_point_ci ci;
        ci.kind = kind_from_name(jc.at("kind").get<std::string>());
        ci.subset = jc.at("subset").get<int>();
        ci.estimate = jc.at("estimate").get<double>();
        ci.lo = jc.at("lo").get<double>();
        ci.hi = jc.at("hi").get<double>();
        ci.valid_runs = jc.at("valid_runs").get<int>();
        ci.contains_estimate = jc.at("contains_estimate").get<bool>();
        result.cis.push_back(ci);
      }
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("JSON report missing fields: ") + e.what());
  }
}

// ------------------------------ CSV output --------------------------------

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_band_csv(const analysis_result& result, std::ostream& out) {
  if (!result.has_band) throw std::invalid_argument("no band to export");
  const confidence_band& band = result.band;
  out << "t,estimate,sd,lower\n";
  for (std::size_t i = 0; i < band.grid.size(); ++i)
    out << num(band.grid[i]) << ',' << num(band.point_estimate[i]) << ',' << num(band.pointwise_sd[i])
        << ',' << num(band.lower[i]) << '\n';
}

void write_cis_csv(const analysis_result& result, std::ostream& out) {
  out << "kind,subset,estimate,lo,hi,valid_runs,contains_estimate\n";
  for (const time_point_ci& ci : result.cis)
    out << kind_name(ci.kind) << ',' << ci.subset << ',' << num(ci.estimate) << ',' << num(ci.lo) << ','
        << num(ci.hi) << ',' << ci.valid_runs << ',' << (ci.contains_estimate ? 1 : 0) << '\n';
}

// ------------------------------ SVG output --------------------------------

namespace {

struct linear_scale {
  double domain_lo, domain_hi, range_lo, range_hi;
  double operator()(double v) const {
    return range_lo + (v - domain_lo) / (domain_hi - domain_lo) * (range_hi - range_lo);
  }
};

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void polyline(std::ostream& out, const linear_scale& sx, const linear_scale& sy,
              const std::vector<double>& xs, const std::vector<double>& ys, const char* css_class) {
  out << "  <polyline class=\"" << css_class << "\" fill=\"none\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out << ' ';
    out << coord(sx(xs[i])) << ',' << coord(sy(ys[i]));
  }
  out << "\"/>\n";
}

}  // namespace

void write_svg(const analysis_result& result, const dataset& data, std::ostream& out) {
  if (!result.has_band) throw std::invalid_argument("no band to plot");
  const confidence_band& band = result.band;

  const double width = 760.0, panel_h = 320.0, gap = 50.0;
  const double height = 2.0 * panel_h + gap + 40.0;
  const double margin_l = 60.0, margin_r = 20.0;

  const linear_scale sx{band.study_start, band.study_end, margin_l, width - margin_r};

  // Panel 1: observations and the fitted curve.
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto& row : data.responses)
    for (double y : row) {
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  std::vector<double> fitted(band.grid.size());
  for (std::size_t i = 0; i < band.grid.size(); ++i) {
    fitted[i] = eval_model(result.fit.spec, result.fit.theta, band.grid[i]);
    y_lo = std::min(y_lo, fitted[i]);
    y_hi = std::max(y_hi, fitted[i]);
  }
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double y_pad = 0.05 * (y_hi - y_lo);
  const linear_scale sy1{y_lo - y_pad, y_hi + y_pad, 20.0 + panel_h, 20.0};

  // Panel 2: |f'| estimate, band, λ, regions.
  double d_lo = 0.0, d_hi = result.lambda.lambda;
  for (double v : band.point_estimate) d_hi = std::max(d_hi, v);
  for (double v : band.lower) d_lo = std::min(d_lo, v);
  if (d_hi <= d_lo) d_hi = d_lo + 1.0;
  const double d_pad = 0.05 * (d_hi - d_lo);
  const double p2_top = 20.0 + panel_h + gap;
  const linear_scale sy2{d_lo - d_pad, d_hi + d_pad, p2_top + panel_h, p2_top};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "  <style>.fit-curve{stroke:#1f6feb;stroke-width:2}.data-point{fill:#57606a}"
         ".deriv-estimate{stroke:#1f6feb;stroke-width:2}.band-lower{stroke:#d29922;stroke-width:2}"
         ".lambda-line{stroke:#cf222e;stroke-dasharray:6 3}.region-line{stroke:#cf222e}"
         ".axis{stroke:#24292f}text{font:12px sans-serif;fill:#24292f}</style>\n";

  for (int panel = 0; panel < 2; ++panel) {
    const double top = panel == 0 ? 20.0 : p2_top;
    out << "  <rect class=\"axis\" fill=\"none\" x=\"" << coord(margin_l) << "\" y=\"" << coord(top)
        << "\" width=\"" << coord(width - margin_l - margin_r) << "\" height=\"" << coord(panel_h) << "\"/>\n";
  }
  out << "  <text x=\"" << coord(margin_l) << "\" y=\"14\">response</text>\n";
  out << "  <text x=\"" << coord(margin_l) << "\" y=\"" << coord(p2_top - 6.0) << "\">|f'| with lower band</text>\n";

  for (std::size_t p = 0; p < data.design.times.size(); ++p)
    for (double y : data.responses[p])
      out << "  <circle class=\"data-point\" cx=\"" << coord(sx(data.design.times[p])) << "\" cy=\""
          << coord(sy1(y)) << "\" r=\"3\"/>\n";
  polyline(out, sx, sy1, band.grid, fitted, "fit-curve");

  polyline(out, sx, sy2, band.grid, band.point_estimate, "deriv-estimate");
  polyline(out, sx, sy2, band.grid, band.lower, "band-lower");
  out << "  <line class=\"lambda-line\" x1=\"" << coord(sx(band.study_start)) << "\" y1=\""
      << coord(sy2(result.lambda.lambda)) << "\" x2=\"" << coord(sx(band.study_end)) << "\" y2=\""
      << coord(sy2(result.lambda.lambda)) << "\"/>\n";
  for (const change_subset& s : result.report.subsets) {
    for (double t : {s.t_start, s.t_end})
      out << "  <line class=\"region-line\" x1=\"" << coord(sx(t)) << "\" y1=\"" << coord(p2_top)
          << "\" x2=\"" << coord(sx(t)) << "\" y2=\"" << coord(p2_top + panel_h) << "\"/>\n";
  }
  out << "</svg>\n";
}

// ------------------------------ comparison --------------------------------

void write_comparison_json(const onset_comparison& cmp, std::ostream& out) {
  ordered_json j{{"onset_a", cmp.onset_a},
                 {"onset_b", cmp.onset_b},
                 {"difference", cmp.difference},
                 {"lo", cmp.lo},
                 {"hi", cmp.hi},
                 {"pairs_used", cmp.pairs_used},
                 {"pairs_dropped", cmp.pairs_dropped}};
  out << j.dump(2) << '\n';
}

void write_comparison_csv(const onset_comparison& cmp, std::ostream& out) {
  out << "onset_a,onset_b,difference,lo,hi,pairs_used,pairs_dropped\n";
  out << num(cmp.onset_a) << ',' << num(cmp.onset_b) << ',' << num(cmp.difference) << ',' << num(cmp.lo)
      << ',' << num(cmp.hi) << ',' << cmp.pairs_used << ',' << cmp.pairs_dropped << '\n';
}

// ------------------------------ simulation --------------------------------

namespace {

ordered_json subsets_to_json(const std::vector<change_subset>& subsets) {
  ordered_json arr = ordered_json::array();
  for (const change_subset& s : subsets)
    arr.push_back(ordered_json{{"t_start", s.t_start}, {"t_end", s.t_end}, {"t_max", s.t_max}});
  return arr;
}

}  // namespace

void write_simulation_json(const scenario_spec& scenario, const simulation_summary& summary,
                           std::ostream& out) {
  ordered_json j;
  j["scenario"] = scenario.id;
  j["sigma_level"] = sigma_level_name(scenario.level);
  j["sigma"] = scenario.sigma;
  j["lambda"] = scenario.lambda;
  j["model"] = model_to_json(scenario.model, scenario.theta);
  j["runs"] = summary.runs;
  j["rejections"] = summary.rejections;
  j["failed_runs"] = summary.failed_runs;
  j["subset_count_histogram"] = summary.subset_count_histogram;
  j["truth"] = subsets_to_json(summary.truth);
  ordered_json stats = ordered_json::array();
  for (const endpoint_stats& s : summary.per_subset)
    stats.push_back(ordered_json{{"matching_runs", s.matching_runs},
                                 {"bias_start", s.bias_start},
                                 {"var_start", s.var_start},
                                 {"bias_end", s.bias_end},
                                 {"var_end", s.var_end}});
  j["per_subset"] = std::move(stats);
  if (!summary.run_regions.empty()) {
    ordered_json runs = ordered_json::array();
    for (std::size_t i = 0; i < summary.run_regions.size(); ++i)
      runs.push_back(ordered_json{{"ok", static_cast<bool>(summary.run_ok[i])},
                                  {"subsets", subsets_to_json(summary.run_regions[i])}});
    j["run_regions"] = std::move(runs);
  }
  out << j.dump(2) << '\n';
}

void write_simulation_csv(const scenario_spec& scenario, const simulation_summary& summary,
                          std::ostream& out) {
  out << "scenario,sigma_level,sigma,lambda,runs,rejections,failed_runs,matching_runs,"
         "bias_start_1,var_start_1,bias_end_1,var_end_1\n";
  const endpoint_stats first = summary.per_subset.empty() ? endpoint_stats{} : summary.per_subset.front();
  out << scenario.id << ',' << sigma_level_name(scenario.level) << ',' << num(scenario.sigma) << ','
      << num(scenario.lambda) << ',' << summary.runs << ',' << summary.rejections << ','
      << summary.failed_runs << ',' << first.matching_runs << ',' << num(first.bias_start) << ','
      << num(first.var_start) << ',' << num(first.bias_end) << ',' << num(first.var_end) << '\n';
}

// ------------------------------ batch -------------------------------------

bool window_passes(const change_report& report, const window_filter& window) {
  for (const change_subset& s : report.subsets) {
    const bool pass = window.overlap_mode ? s.t_start <= window.hi && s.t_end >= window.lo
                                          : s.t_start >= window.lo && s.t_end <= window.hi;
    if (pass) return true;
  }
  return false;
}

std::vector<batch_entry> batch_screen(const std::vector<series>& input, const analysis_options& opts,
                                      const window_filter* window) {
  if (input.empty()) throw data_error("batch input holds no series");
  opts.band.validate();

  std::vector<batch_entry> entries(input.size());

  parallel_for(static_cast<int>(input.size()), opts.band.threads, [&](int i) {
    batch_entry& entry = entries[static_cast<std::size_t>(i)];
    entry.id = input[static_cast<std::size_t>(i)].id;
    analysis_options series_opts = opts;
    series_opts.band.threads = 1;
    series_opts.band.seed = rng::derive_seed(opts.band.seed, {rng::stream::batch, static_cast<std::uint64_t>(i)});
    try {
      entry.result = analyze_series(input[static_cast<std::size_t>(i)].data, series_opts);
      entry.ok = true;
      entry.window_pass = window != nullptr && window_passes(entry.result.report, *window);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
  });

  if (std::none_of(entries.begin(), entries.end(), [](const batch_entry& e) { return e.ok; }))
    throw numerical_error("every series in the batch failed to analyze");
  return entries;
}

void write_batch_json(const std::vector<batch_entry>& entries, std::ostream& out) {
  ordered_json arr = ordered_json::array();
  for (const batch_entry& entry : entries) {
    ordered_json j;
    j["id"] = entry.id;
    j["ok"] = entry.ok;
    if (entry.ok) {
      j["result"] = result_to_json(entry.result);
      j["window_pass"] = entry.window_pass;
    } else {
      j["error"] = entry.error;
    }
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

void write_batch_csv(const std::vector<batch_entry>& entries, std::ostream& out) {
  out << "id,ok,family,aic,reject_h0,n_subsets,t_start_1,t_end_1,t_max_1,window_pass,error\n";
  for (const batch_entry& entry : entries) {
    out << entry.id << ',' << (entry.ok ? 1 : 0) << ',';
    if (entry.ok) {
      const analysis_result& r = entry.result;
      out << (r.fit.spec.family == model_family::four_pll ? "4pll" : "beta") << ','
          << (std::isfinite(r.fit.aic) ? num(r.fit.aic) : std::string()) << ','
          << (r.report.reject_h0 ? 1 : 0) << ',' << r.report.subsets.size() << ',';
      if (!r.report.subsets.empty())
        out << num(r.report.subsets[0].t_start) << ',' << num(r.report.subsets[0].t_end) << ','
            << num(r.report.subsets[0].t_max) << ',';
      else
        out << ",,,";
      out << (entry.window_pass ? 1 : 0) << ',';
    } else {
      out << ",,,,,,,,";
    }
    std::string err = entry.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << err << '\n';
  }
}

}  // namespace changeband
