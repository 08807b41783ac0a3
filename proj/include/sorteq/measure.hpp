#pragma once

#include <cstdint>
#include <vector>

#include "sorteq/moments.hpp"
#include "sorteq/panel.hpp"

namespace sorteq {

// Per-firm wage moments. var_lw carries Bessel's correction (divisor n-1);
// mu2_hat/mu4_hat are central sample moments with divisor n. vov_adjustment
// estimates the sampling variance of var_lw,
//   mu4_hat/n - mu2_hat^2 (n-3)/(n^2-n),
// and is subtracted out of the cross-firm dispersion of the measured
// variances to de-noise it.
struct FirmStats {
  std::int64_t firm_id;
  std::int64_t size;
  double mean_lw;
  double var_lw;
  double mu2_hat;
  double mu4_hat;
  double vov_adjustment;
  // Same sampling-variance estimate built from exactly unbiased (h-statistic)
  // estimates of mu4 and mu2^2 instead of the plug-in moments. The plug-in
  // version understates the sampling variance by O(kurtosis/n), which is
  // first-order here because within-firm log wages are scaled noncentral
  // chi-squares; the de-noising pipeline subtracts this one. Falls back to
  // the plug-in value for firms smaller than 4.
  double vov_adjustment_unbiased;
};

struct MeasuredMoments {
  // The five calibration targets.
  double wfwi_weighted = 0;
  double var_of_within_var = 0;  // de-noised, clamped at 0
  double wfwi_unweighted = 0;
  double var_log_wage = 0;
  double mean_log_wage = 0;
  // Decomposition pieces and bookkeeping.
  double bfwi = 0;  // var_log_wage - wfwi (subtraction, so adding-up is exact)
  double wfwi = 0;  // same as wfwi_weighted
  std::int64_t n_workers = 0;
  std::int64_t n_firms = 0;
  std::int64_t n_firms_excluded = 0;
  double var_of_within_var_raw = 0;
  bool vov_clamped = false;
  bool degenerate_wages = false;  // all wages equal; vov forced to 0

  MomentSet targets() const {
    return MomentSet{wfwi_weighted, var_of_within_var, wfwi_unweighted,
                     var_log_wage, mean_log_wage};
  }
};

// Firms with fewer than max(2, min_firm_size) workers are excluded; the count
// of exclusions is returned through n_excluded when non-null.
std::vector<FirmStats> firm_statistics(const Panel& panel,
                                       std::int64_t min_firm_size,
                                       std::int64_t* n_excluded = nullptr);

// Computes the five targets plus the within/between split over the filtered
// panel. Size weighting is worker-level (weight n_j/N) throughout; the
// de-noised variance of within-firm variances is
//   weighted Var_j(var_lw_j) - weighted mean_j(vov_adjustment_j),
// clamped at zero with a flag when sampling noise pushes it negative.
// Throws std::invalid_argument on an empty (post-filter) panel.
MeasuredMoments measure_moments(const Panel& panel, std::int64_t min_firm_size);

// Draws n_workers worker indices with replacement, keeps the unique ones
// (worker-firm matching unchanged), and recomputes firm sizes from the
// survivors. Deterministic given seed.
Panel resample(const Panel& panel, std::uint64_t seed);

}  // namespace sorteq
