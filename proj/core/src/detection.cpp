#include "changeband/detection.hpp"

#include <cmath>
#include <stdexcept>

namespace changeband {

threshold default_lambda(double t_bar, double fold, double fraction) {
  if (!(t_bar > 0.0)) throw std::invalid_argument("default_lambda: study period must be positive");
  if (!(fold > 1.0)) throw std::invalid_argument("default_lambda: fold must exceed 1");
  if (!(fraction > 0.0) || !(fraction <= 1.0))
    throw std::invalid_argument("default_lambda: fraction must lie in (0, 1]");
  threshold th;
  th.lambda = std::log2(fold) / (fraction * t_bar);
  th.provenance = "log2(" + std::to_string(fold) + ")/(" + std::to_string(fraction) + "*" + std::to_string(t_bar) + ")";
  return th;
}

bool test_h0(const confidence_band& band, double lambda) {
  for (double v : band.lower)
    if (v > lambda) return true;
  return false;
}

change_report extract_regions(const confidence_band& band, double lambda) {
  const std::size_t g = band.grid.size();
  if (g == 0 || band.lower.size() != g) throw std::invalid_argument("extract_regions: malformed band");

  change_report report;
  std::size_t i = 0;
  while (i < g) {
    if (!(band.lower[i] > lambda)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < g && band.lower[j + 1] > lambda) ++j;

    change_subset subset;
    if (i == 0) {
      subset.t_start = band.study_start;
    } else {
      const double d0 = band.lower[i - 1] - lambda;  // <= 0
      const double d1 = band.lower[i] - lambda;      // > 0
      subset.t_start = band.grid[i - 1] + (band.grid[i] - band.grid[i - 1]) * (-d0) / (d1 - d0);
    }
    if (j == g - 1) {
      subset.t_end = band.study_end;
    } else {
      const double d0 = band.lower[j] - lambda;      // > 0
      const double d1 = band.lower[j + 1] - lambda;  // <= 0
      subset.t_end = band.grid[j] + (band.grid[j + 1] - band.grid[j]) * d0 / (d0 - d1);
    }

    std::size_t arg_max = i;
    for (std::size_t k = i + 1; k <= j; ++k)
      if (band.lower[k] > band.lower[arg_max]) arg_max = k;
    subset.t_max = band.grid[arg_max];

    report.subsets.push_back(subset);
    i = j + 1;
  }
  report.reject_h0 = !report.subsets.empty();
  return report;
}

std::vector<subset_change> change_summary(const fit_result& fit, const change_report& report) {
  std::vector<subset_change> changes;
  changes.reserve(report.subsets.size());
  const double b_abs = std::fabs(fit.theta.b);
  for (const change_subset& subset : report.subsets) {
    subset_change change;
    const double delta =
        eval_model(fit.spec, fit.theta, subset.t_end) - eval_model(fit.spec, fit.theta, subset.t_start);
    change.absolute_change = std::fabs(delta);
    change.fraction_of_total = b_abs > 0.0 ? change.absolute_change / b_abs : 0.0;
    changes.push_back(change);
  }
  return changes;
}

}  // namespace changeband
