#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "changeband/ci.hpp"
#include "changeband/errors.hpp"
#include "changeband/io.hpp"
#include "changeband/simulate.hpp"

namespace {

using namespace changeband;

struct cli_state {
  std::string input;
  std::string input_b;
  std::string out;
  std::string format = "json";
  std::string model = "auto";
  std::string seed_text;
  std::string window_text;
  std::string window_mode = "contain";
  std::string sigma_level_text = "medium";

  double lambda = 0.0;
  double fold = 1.5;
  double fraction = 1.0;
  double alpha = 0.05;
  double scal = 0.0;
  double grid_step = 0.1;

  int b1 = 500;
  int b2 = 25;
  int b3 = 500;
  int runs = 0;
  int scenario = 0;
  int threads = 1;
  bool keep_regions = false;

  bool lambda_given = false;
  bool fold_given = false;
};

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "auto") {
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << seed << '\n';
    return seed;
  }
  std::uint64_t seed = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, seed);
  if (ec != std::errc() || ptr != end)
    throw usage_error("--seed expects an unsigned integer or 'auto', got '" + text + "'");
  return seed;
}

model_choice resolve_model(const std::string& name) {
  if (name == "auto") return model_choice::automatic;
  if (name == "4pll") return model_choice::four_pll;
  return model_choice::beta;
}

sigma_level resolve_sigma_level(const std::string& name) {
  if (name == "small") return sigma_level::small;
  if (name == "mid-small") return sigma_level::mid_small;
  if (name == "medium") return sigma_level::medium;
  if (name == "mid-large") return sigma_level::mid_large;
  return sigma_level::large;
}

threshold resolve_threshold(const cli_state& st, double period) {
  if (st.lambda_given) {
    if (!(st.lambda > 0.0)) throw usage_error("--lambda must be positive");
    return threshold{st.lambda, "absolute"};
  }
  return default_lambda(period, st.fold, st.fraction);
}

bootstrap_config resolve_band_config(const cli_state& st, std::uint64_t seed) {
  bootstrap_config cfg;
  cfg.b1 = st.b1;
  cfg.b2 = st.b2;
  cfg.alpha = st.alpha;
  cfg.seed = seed;
  cfg.grid_step = st.grid_step;
  cfg.threads = st.threads;
  return cfg;
}

window_filter resolve_window(const cli_state& st) {
  window_filter w;
  const auto comma = st.window_text.find(',');
  if (comma == std::string::npos) throw usage_error("--window expects LO,HI");
  const auto parse = [&](const std::string& part, double& out) {
    const char* begin = part.data();
    const auto [ptr, ec] = std::from_chars(begin, begin + part.size(), out);
    if (ec != std::errc() || ptr != begin + part.size() || !std::isfinite(out))
      throw usage_error("--window expects LO,HI, got '" + st.window_text + "'");
  };
  parse(st.window_text.substr(0, comma), w.lo);
  parse(st.window_text.substr(comma + 1), w.hi);
  if (w.lo > w.hi) throw usage_error("--window requires LO <= HI");
  w.overlap_mode = st.window_mode == "overlap";
  return w;
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw data_error("cannot open output file: " + path);
  body(out);
  out.flush();
  if (!out) throw data_error("write failed: " + path);
}

std::vector<model_spec> candidate_specs(const cli_state& st, const time_design& design) {
  const double scal = st.scal > 0.0 ? st.scal : default_scal(design);
  const model_choice choice = resolve_model(st.model);
  std::vector<model_spec> specs;
  if (choice != model_choice::beta) specs.push_back(model_spec::four_pll_spec());
  if (choice != model_choice::four_pll) specs.push_back(model_spec::beta_spec(scal));
  return specs;
}

analysis_options resolve_analysis(const cli_state& st, std::uint64_t seed) {
  analysis_options opts;
  opts.model = resolve_model(st.model);
  opts.scal = st.scal;
  opts.band = resolve_band_config(st, seed);
  return opts;
}

// ------------------------------ commands ----------------------------------

void run_fit(const cli_state& st) {
  const dataset data = parse_dataset_file(st.input);
  analysis_result result;
  result.fit = select_model(data, candidate_specs(st, data.design));
  with_output(st.out, [&](std::ostream& out) { write_json(result, out); });
}

void run_band(const cli_state& st) {
  const dataset data = parse_dataset_file(st.input);
  analysis_result result;
  result.fit = select_model(data, candidate_specs(st, data.design));
  result.band = lower_band(data, result.fit, resolve_band_config(st, resolve_seed(st.seed_text)));
  result.has_band = true;
  with_output(st.out, [&](std::ostream& out) {
    if (st.format == "csv") write_band_csv(result, out);
    else write_json(result, out);
  });
}

analysis_result detect_on(const dataset& data, const cli_state& st, std::uint64_t seed) {
  analysis_options opts = resolve_analysis(st, seed);
  opts.lambda = resolve_threshold(st, data.design.end() - data.design.start());
  return analyze_series(data, opts);
}

void write_detect(const analysis_result& result, const dataset& data, const cli_state& st) {
  with_output(st.out, [&](std::ostream& out) {
    if (st.format == "csv") write_band_csv(result, out);
    else if (st.format == "svg") write_svg(result, data, out);
    else write_json(result, out);
  });
}

void run_detect(const cli_state& st) {
  const dataset data = parse_dataset_file(st.input);
  write_detect(detect_on(data, st, resolve_seed(st.seed_text)), data, st);
}

void run_ci(const cli_state& st) {
  const dataset data = parse_dataset_file(st.input);
  const std::uint64_t seed = resolve_seed(st.seed_text);
  analysis_result result = detect_on(data, st, seed);
  if (result.report.reject_h0) {
    ci_config cfg;
    cfg.band = resolve_band_config(st, seed);
    cfg.b3 = st.b3;
    result.cis = time_point_cis(data, result.fit, result.report, cfg, result.lambda.lambda);
  }
  with_output(st.out, [&](std::ostream& out) {
    if (st.format == "csv") write_cis_csv(result, out);
    else if (st.format == "svg") write_svg(result, data, out);
    else write_json(result, out);
  });
}

void run_compare(const cli_state& st) {
  const dataset data_a = parse_dataset_file(st.input);
  const dataset data_b = parse_dataset_file(st.input_b);
  const fit_result fit_a = select_model(data_a, candidate_specs(st, data_a.design));
  const fit_result fit_b = select_model(data_b, candidate_specs(st, data_b.design));
  ci_config cfg;
  cfg.band = resolve_band_config(st, resolve_seed(st.seed_text));
  cfg.b3 = st.b3;
  const threshold lambda = resolve_threshold(st, data_a.design.end() - data_a.design.start());
  const onset_comparison cmp = compare_onsets(data_a, data_b, fit_a, fit_b, cfg, lambda.lambda);
  with_output(st.out, [&](std::ostream& out) {
    if (st.format == "csv") write_comparison_csv(cmp, out);
    else write_comparison_json(cmp, out);
  });
}

void run_simulate(const cli_state& st) {
  scenario_spec scenario = builtin_scenario(st.scenario, resolve_sigma_level(st.sigma_level_text));
  if (st.lambda_given || st.fold_given) {
    const double period = scenario.design.end() - scenario.design.start();
    scenario.lambda = resolve_threshold(st, period).lambda;
  }
  const simulation_summary summary =
      run_simulation(scenario, st.runs, resolve_band_config(st, resolve_seed(st.seed_text)), st.keep_regions);
  with_output(st.out, [&](std::ostream& out) {
    if (st.format == "csv") write_simulation_csv(scenario, summary, out);
    else write_simulation_json(scenario, summary, out);
  });
}

void run_batch(const cli_state& st) {
  const std::vector<series> input = parse_series_file(st.input);
  analysis_options opts = resolve_analysis(st, resolve_seed(st.seed_text));
  double period = 0.0;
  for (const series& s : input)
    period = std::max(period, s.data.design.end() - s.data.design.start());
  opts.lambda = resolve_threshold(st, period);

  window_filter window;
  const bool has_window = !st.window_text.empty();
  if (has_window) window = resolve_window(st);

  const std::vector<batch_entry> entries = batch_screen(input, opts, has_window ? &window : nullptr);
  with_output(st.out, [&](std::ostream& out) {
    if (st.format == "csv") write_batch_csv(entries, out);
    else write_batch_json(entries, out);
  });
}

// ------------------------------ wiring ------------------------------------

void add_model_flags(CLI::App* cmd, cli_state& st) {
  cmd->add_option("--model", st.model, "Model family")
      ->check(CLI::IsMember({"auto", "4pll", "beta"}))
      ->capture_default_str();
  cmd->add_option("--scal", st.scal, "Scaling constant of the beta model (default 1.2x last time)")
      ->check(CLI::PositiveNumber);
}

void add_lambda_flags(CLI::App* cmd, cli_state& st) {
  CLI::Option* lambda = cmd->add_option("--lambda", st.lambda, "Relevance threshold (response units per week)");
  CLI::Option* fold = cmd->add_option("--fold", st.fold, "Fold change defining the default threshold")
                          ->capture_default_str();
  CLI::Option* fraction =
      cmd->add_option("--fraction", st.fraction, "Fraction of the study period for the default threshold")
          ->capture_default_str();
  lambda->excludes(fold)->excludes(fraction);
  cmd->parse_complete_callback([&st, lambda, fold, fraction]() {
    st.lambda_given = lambda->count() > 0;
    st.fold_given = fold->count() > 0 || fraction->count() > 0;
  });
}

void add_band_flags(CLI::App* cmd, cli_state& st) {
  cmd->add_option("--alpha", st.alpha, "Band level: P(band covers) >= 1 - alpha")
      ->check(CLI::Range(1e-6, 0.999999))
      ->capture_default_str();
  cmd->add_option("--b1", st.b1, "First-level bootstrap replicates")->capture_default_str();
  cmd->add_option("--b2", st.b2, "Second-level replicates per first-level fit")->capture_default_str();
  cmd->add_option("--grid-step", st.grid_step, "Evaluation grid step (weeks)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", st.seed_text, "RNG seed (unsigned integer or 'auto')")->required();
  cmd->add_option("--threads", st.threads, "Worker threads (never affects results)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, cli_state& st, const std::vector<std::string>& formats) {
  cmd->add_option("--out", st.out, "Output path (default stdout)");
  cmd->add_option("--format", st.format, "Output format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time frame of significant change in a fitted response curve"};
  app.require_subcommand(1);
  cli_state st;

  CLI::App* fit = app.add_subcommand("fit", "Fit a time-response model to one series");
  fit->add_option("input", st.input, "CSV file (time,value)")->required();
  add_model_flags(fit, st);
  add_output_flags(fit, st, {"json"});
  fit->final_callback([&st]() { run_fit(st); });

  CLI::App* band = app.add_subcommand("band", "Lower simultaneous confidence band for |f'|");
  band->add_option("input", st.input, "CSV file (time,value)")->required();
  add_model_flags(band, st);
  add_band_flags(band, st);
  add_output_flags(band, st, {"json", "csv"});
  band->final_callback([&st]() { run_band(st); });

  CLI::App* detect = app.add_subcommand("detect", "Detect the time frame of relevant change");
  detect->add_option("input", st.input, "CSV file (time,value)")->required();
  add_model_flags(detect, st);
  add_lambda_flags(detect, st);
  add_band_flags(detect, st);
  add_output_flags(detect, st, {"json", "csv", "svg"});
  detect->final_callback([&st]() { run_detect(st); });

  CLI::App* ci = app.add_subcommand("ci", "Detect and attach CIs to onset/offset/max times");
  ci->add_option("input", st.input, "CSV file (time,value)")->required();
  add_model_flags(ci, st);
  add_lambda_flags(ci, st);
  add_band_flags(ci, st);
  ci->add_option("--b3", st.b3, "Outer bootstrap replicates for the CIs")->capture_default_str();
  add_output_flags(ci, st, {"json", "csv", "svg"});
  ci->final_callback([&st]() { run_ci(st); });

  CLI::App* compare = app.add_subcommand("compare", "Difference of change onsets between two groups");
  compare->add_option("input_a", st.input, "Group A CSV file (time,value)")->required();
  compare->add_option("input_b", st.input_b, "Group B CSV file (time,value)")->required();
  add_model_flags(compare, st);
  add_lambda_flags(compare, st);
  add_band_flags(compare, st);
  compare->add_option("--b3", st.b3, "Outer bootstrap replicates for the CI")->capture_default_str();
  add_output_flags(compare, st, {"json", "csv"});
  compare->final_callback([&st]() { run_compare(st); });

  CLI::App* simulate = app.add_subcommand("simulate", "Run a built-in simulation scenario");
  simulate->add_option("--scenario", st.scenario, "Scenario id (1-6)")
      ->check(CLI::Range(1, 6))
      ->required();
  simulate->add_option("--sigma-level", st.sigma_level_text, "Noise level")
      ->check(CLI::IsMember({"small", "mid-small", "medium", "mid-large", "large"}))
      ->capture_default_str();
  simulate->add_option("--runs", st.runs, "Simulated experiments")->check(CLI::PositiveNumber)->required();
  simulate->add_flag("--keep-regions", st.keep_regions, "Keep per-run detected subsets in the JSON output");
  add_lambda_flags(simulate, st);
  add_band_flags(simulate, st);
  add_output_flags(simulate, st, {"json", "csv"});
  simulate->final_callback([&st]() { run_simulate(st); });

  CLI::App* batch = app.add_subcommand("batch", "Screen many series with a shared configuration");
  batch->add_option("input", st.input, "CSV file (id,time,value)")->required();
  add_model_flags(batch, st);
  add_lambda_flags(batch, st);
  add_band_flags(batch, st);
  batch->add_option("--window", st.window_text, "Keep series whose change subsets fit in LO,HI");
  batch->add_option("--window-mode", st.window_mode, "Window semantics")
      ->check(CLI::IsMember({"contain", "overlap"}))
      ->capture_default_str();
  add_output_flags(batch, st, {"json", "csv"});
  batch->final_callback([&st]() { run_batch(st); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
