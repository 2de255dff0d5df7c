#pragma once

#include <vector>

#include "changeband/bootstrap.hpp"
#include "changeband/detection.hpp"

namespace changeband {

enum class time_point_kind { start, end, max };

// Percentile confidence interval for one time point of interest.  A
// percentile CI need not contain the point estimate; contains_estimate
// records whether it does.
struct time_point_ci {
  time_point_kind kind = time_point_kind::start;
  int subset = 0;  // 0-based index into the report's subsets
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int valid_runs = 0;
  bool contains_estimate = true;
};

struct ci_config {
  bootstrap_config band;
  int b3 = 500;  // outer bootstrap datasets
  double min_valid_fraction = 0.2;

  void validate() const;
};

// Three-step bootstrap: B3 outer datasets from (θ̂, σ̂), each pushed through
// the full two-step band procedure and region extraction; runs whose subset
// count differs from the original report's are dismissed; the kept time
// points give percentile intervals per (kind, subset).
std::vector<time_point_ci> time_point_cis(const dataset& data, const fit_result& fit,
                                          const change_report& report, const ci_config& cfg, double lambda);

struct onset_comparison {
  double onset_a = 0.0;
  double onset_b = 0.0;
  double difference = 0.0;  // onset_a - onset_b
  double lo = 0.0;
  double hi = 0.0;
  int pairs_used = 0;
  int pairs_dropped = 0;
};

// Difference of first-subset onsets between two groups with a percentile CI
// from outer runs paired by index; runs where either group's subset count
// does not match its original analysis are dropped.
onset_comparison compare_onsets(const dataset& data_a, const dataset& data_b, const fit_result& fit_a,
                                const fit_result& fit_b, const ci_config& cfg, double lambda);

}  // namespace changeband
