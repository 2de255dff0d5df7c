#include "changeband/ci.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "changeband/errors.hpp"
#include "changeband/parallel.hpp"
#include "changeband/quantile.hpp"

namespace changeband {

void ci_config::validate() const {
  band.validate();
  if (b3 < 1) throw std::invalid_argument("B3 must be positive");
  if (!(min_valid_fraction > 0.0) || !(min_valid_fraction <= 1.0))
    throw std::invalid_argument("min valid fraction must lie in (0, 1]");
}

namespace {

struct outer_run {
  bool valid = false;
  std::vector<change_subset> subsets;
};

// One outer-bootstrap experiment: new dataset from (θ̂, σ̂), refit, full
// two-step band, region extraction.  Valid only when the subset count
// matches the original analysis.
outer_run run_outer(const dataset& data, const fit_result& fit, const bootstrap_config& band_cfg,
                    double lambda, std::size_t expected_subsets, std::uint64_t data_seed,
                    std::uint64_t band_seed) {
  outer_run out;
  rng::gaussian_stream stream(data_seed);
  const dataset resample =
      simulate_dataset(fit.spec, fit.theta, std::sqrt(fit.sigma2), data.design, stream);

  fit_options refit_opts;
  refit_opts.warm_start = fit.theta;
  refit_opts.warm_start_only = true;

  bootstrap_config cfg = band_cfg;
  cfg.seed = band_seed;
  cfg.threads = 1;

  try {
    const fit_result refit = fit_ols(resample, fit.spec, refit_opts);
    const confidence_band band = lower_band(resample, refit, cfg);
    change_report report = extract_regions(band, lambda);
    if (report.subsets.size() != expected_subsets) return out;
    out.valid = true;
    out.subsets = std::move(report.subsets);
  } catch (const numerical_error&) {
  }
  return out;
}

double pick(const change_subset& s, time_point_kind kind) {
  switch (kind) {
    case time_point_kind::start: return s.t_start;
    case time_point_kind::end: return s.t_end;
    case time_point_kind::max: return s.t_max;
  }
  return s.t_start;
}

}  // namespace

std::vector<time_point_ci> time_point_cis(const dataset& data, const fit_result& fit,
                                          const change_report& report, const ci_config& cfg, double lambda) {
  cfg.validate();
  data.validate();
  const std::size_t s = report.subsets.size();
  if (s == 0) throw std::invalid_argument("time_point_cis requires a report with at least one subset");

  std::vector<outer_run> runs(static_cast<std::size_t>(cfg.b3));
  parallel_for(cfg.b3, cfg.band.threads, [&](int k) {
    const auto kk = static_cast<std::uint64_t>(k);
    runs[static_cast<std::size_t>(k)] =
        run_outer(data, fit, cfg.band, lambda, s, rng::derive_seed(cfg.band.seed, {rng::stream::ci_outer, kk}),
                  rng::derive_seed(cfg.band.seed, {rng::stream::ci_band, kk}));
  });

  int kept = 0;
  for (const outer_run& run : runs)
    if (run.valid) ++kept;
  if (static_cast<double>(kept) < cfg.min_valid_fraction * static_cast<double>(cfg.b3))
    throw numerical_error("only " + std::to_string(kept) + " of " + std::to_string(cfg.b3) +
                          " outer bootstrap runs had a matching subset count");

  const double alpha = cfg.band.alpha;
  std::vector<time_point_ci> out;
  out.reserve(3 * s);
  for (std::size_t j = 0; j < s; ++j) {
    for (time_point_kind kind : {time_point_kind::start, time_point_kind::end, time_point_kind::max}) {
      std::vector<double> pool;
      pool.reserve(static_cast<std::size_t>(kept));
      for (const outer_run& run : runs)
        if (run.valid) pool.push_back(pick(run.subsets[j], kind));

      time_point_ci ci;
      ci.kind = kind;
      ci.subset = static_cast<int>(j);
      ci.estimate = pick(report.subsets[j], kind);
      ci.lo = empirical_quantile(pool, alpha / 2.0);
      ci.hi = empirical_quantile(std::move(pool), 1.0 - alpha / 2.0);
      ci.valid_runs = kept;
      ci.contains_estimate = ci.lo <= ci.estimate && ci.estimate <= ci.hi;
      out.push_back(ci);
    }
  }
  return out;
}

onset_comparison compare_onsets(const dataset& data_a, const dataset& data_b, const fit_result& fit_a,
                                const fit_result& fit_b, const ci_config& cfg, double lambda) {
  cfg.validate();
  data_a.validate();
  data_b.validate();

  bootstrap_config original_cfg_a = cfg.band;
  original_cfg_a.seed = rng::derive_seed(cfg.band.seed, {rng::stream::group_a});
  bootstrap_config original_cfg_b = cfg.band;
  original_cfg_b.seed = rng::derive_seed(cfg.band.seed, {rng::stream::group_b});

  const change_report report_a = extract_regions(lower_band(data_a, fit_a, original_cfg_a), lambda);
  const change_report report_b = extract_regions(lower_band(data_b, fit_b, original_cfg_b), lambda);
  if (report_a.subsets.empty() || report_b.subsets.empty())
    throw numerical_error("compare_onsets requires a detected change in both groups");
  const std::size_t s_a = report_a.subsets.size();
  const std::size_t s_b = report_b.subsets.size();

  struct pair_slot {
    outer_run a, b;
  };
  std::vector<pair_slot> slots(static_cast<std::size_t>(cfg.b3));
  parallel_for(cfg.b3, cfg.band.threads, [&](int k) {
    const auto kk = static_cast<std::uint64_t>(k);
    pair_slot& slot = slots[static_cast<std::size_t>(k)];
    slot.a = run_outer(data_a, fit_a, cfg.band, lambda, s_a,
                       rng::derive_seed(cfg.band.seed, {rng::stream::group_a, rng::stream::ci_outer, kk}),
                       rng::derive_seed(cfg.band.seed, {rng::stream::group_a, rng::stream::ci_band, kk}));
    slot.b = run_outer(data_b, fit_b, cfg.band, lambda, s_b,
                       rng::derive_seed(cfg.band.seed, {rng::stream::group_b, rng::stream::ci_outer, kk}),
                       rng::derive_seed(cfg.band.seed, {rng::stream::group_b, rng::stream::ci_band, kk}));
  });

  std::vector<double> diffs;
  diffs.reserve(slots.size());
  for (const pair_slot& slot : slots)
    if (slot.a.valid && slot.b.valid)
      diffs.push_back(slot.a.subsets[0].t_start - slot.b.subsets[0].t_start);

  onset_comparison cmp;
  cmp.onset_a = report_a.subsets[0].t_start;
  cmp.onset_b = report_b.subsets[0].t_start;
  cmp.difference = cmp.onset_a - cmp.onset_b;
  cmp.pairs_used = static_cast<int>(diffs.size());
  cmp.pairs_dropped = cfg.b3 - cmp.pairs_used;
  if (static_cast<double>(cmp.pairs_used) < cfg.min_valid_fraction * static_cast<double>(cfg.b3))
    throw numerical_error("only " + std::to_string(cmp.pairs_used) + " of " + std::to_string(cfg.b3) +
                          " paired bootstrap runs were valid");

  const double alpha = cfg.band.alpha;
  cmp.lo = empirical_quantile(diffs, alpha / 2.0);
  cmp.hi = empirical_quantile(std::move(diffs), 1.0 - alpha / 2.0);
  return cmp;
}

}  // namespace changeband
