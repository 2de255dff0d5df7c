#pragma once

#include <string>
#include <vector>

#include "changeband/bootstrap.hpp"
#include "changeband/fitting.hpp"

namespace changeband {

struct threshold {
  double lambda = 0.0;  // response units per week
  std::string provenance;
};

// λ = log2(fold) / (fraction · t̄): the slope of a straight line covering a
// `fold`-change over `fraction` of the study period t̄.
threshold default_lambda(double t_bar, double fold = 1.5, double fraction = 1.0);

// One coherent subset S_j of the significant-change set S̃.
struct change_subset {
  double t_start = 0.0;
  double t_end = 0.0;
  double t_max = 0.0;  // where lower - λ peaks inside the subset
};

struct subset_change {
  double absolute_change = 0.0;    // |f(t_end, θ̂) - f(t_start, θ̂)|
  double fraction_of_total = 0.0;  // ... divided by |b̂|
};

struct change_report {
  bool reject_h0 = false;
  std::vector<change_subset> subsets;  // ascending, disjoint
};

// True iff the band exceeds λ strictly at any grid point.
bool test_h0(const confidence_band& band, double lambda);

// Maximal runs of grid points with lower > λ.  Interior endpoints are refined
// by linear interpolation of (lower - λ) between the bracketing grid points;
// runs touching the grid boundary report the study boundary itself.
change_report extract_regions(const confidence_band& band, double lambda);

// Model change over each subset and its share of the fitted maximal change.
std::vector<subset_change> change_summary(const fit_result& fit, const change_report& report);

}  // namespace changeband
