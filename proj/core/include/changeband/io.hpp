#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "changeband/bootstrap.hpp"
#include "changeband/ci.hpp"
#include "changeband/detection.hpp"
#include "changeband/fitting.hpp"
#include "changeband/simulate.hpp"

namespace changeband {

// ---------------------------------------------------------------------------
// Input: long-format CSV, header `time,value` (single series) or
// `id,time,value` (batch).  Rows are grouped by id (first-appearance order)
// and by time (ascending); replicate counts come from row multiplicity.
// ---------------------------------------------------------------------------

struct series {
  std::string id;  // empty for single-series files
  dataset data;
};

std::vector<series> parse_series_csv(std::istream& in, const std::string& source_name);
std::vector<series> parse_series_file(const std::string& path);

// The file's single series; data_error when it holds several.
dataset parse_dataset_file(const std::string& path);

// ---------------------------------------------------------------------------
// Analysis pipeline shared by the CLI's detect/ci/batch commands.
// ---------------------------------------------------------------------------

enum class model_choice { automatic, four_pll, beta };

struct analysis_options {
  model_choice model = model_choice::automatic;
  double scal = 0.0;  // beta scaling constant; 0 = default_scal(design)
  threshold lambda;
  bootstrap_config band;
};

struct analysis_result {
  fit_result fit;
  bool has_band = false;
  confidence_band band;
  bool has_report = false;
  threshold lambda;
  change_report report;
  std::vector<subset_change> changes;
  std::vector<time_point_ci> cis;
};

// fit (or select) -> band -> regions -> change summary.
analysis_result analyze_series(const dataset& data, const analysis_options& opts);

// ---------------------------------------------------------------------------
// Output.  JSON carries full numeric detail and round-trips exactly; CSV is
// the band table (one row per grid point: t, estimate, sd, lower); SVG is a
// two-panel figure (fitted curve over the data; |f'| with band, λ line, and
// region markers).
// ---------------------------------------------------------------------------

void write_json(const analysis_result& result, std::ostream& out);
analysis_result read_json(std::istream& in);

void write_band_csv(const analysis_result& result, std::ostream& out);
void write_cis_csv(const analysis_result& result, std::ostream& out);
void write_svg(const analysis_result& result, const dataset& data, std::ostream& out);

void write_comparison_json(const onset_comparison& cmp, std::ostream& out);
void write_comparison_csv(const onset_comparison& cmp, std::ostream& out);

void write_simulation_json(const scenario_spec& scenario, const simulation_summary& summary,
                           std::ostream& out);
void write_simulation_csv(const scenario_spec& scenario, const simulation_summary& summary,
                          std::ostream& out);

// ---------------------------------------------------------------------------
// Batch screening: many series, one shared configuration, optional
// time-window filter on the detected subsets.
// ---------------------------------------------------------------------------

struct window_filter {
  double lo = 0.0;
  double hi = 0.0;
  bool overlap_mode = false;  // default: subset fully contained in [lo, hi]
};

struct batch_entry {
  std::string id;
  bool ok = false;
  std::string error;
  analysis_result result;
  bool window_pass = false;
};

bool window_passes(const change_report& report, const window_filter& window);

std::vector<batch_entry> batch_screen(const std::vector<series>& input, const analysis_options& opts,
                                      const window_filter* window);

void write_batch_json(const std::vector<batch_entry>& entries, std::ostream& out);
void write_batch_csv(const std::vector<batch_entry>& entries, std::ostream& out);

}  // namespace changeband
