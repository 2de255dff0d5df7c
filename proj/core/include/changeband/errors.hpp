#pragma once

#include <stdexcept>
#include <string>

namespace changeband {

// Malformed or unusable input: parse failures, bad column layout, series too
// short, non-finite responses.  The CLI maps this family to exit code 2.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// The computation itself broke down: no optimizer start converged, too many
// bootstrap refits failed, too few valid resamples to form a quantile.
// The CLI maps this family to exit code 3.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Every converged fit collapsed onto a step/spike between design times —
// a slope far sharper than the sampling design can resolve.  The bootstrap
// censors refits that end here instead of counting them as optimizer
// failures; everywhere else it behaves like a plain numerical_error.
class step_fit_error : public numerical_error {
 public:
  explicit step_fit_error(const std::string& what) : numerical_error(what) {}
};

}  // namespace changeband
