#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sorteq/measure.hpp"
#include "sorteq/moments.hpp"

namespace sorteq {

// Thrown when a moment set cannot come from any valid parameter vector; the
// message names the violated inequality and the offending values.
struct InfeasibleMoments : std::domain_error {
  explicit InfeasibleMoments(const std::string& msg) : std::domain_error(msg) {}
};

struct Identified {
  ModelParams params;
  double sigma;
};

// Closed-form exact identification of (sigma_x, sigma_theta, c_a, c_l, ln A)
// from the five targeted moments. Inverts, in order: the job supply sigma^2
// from the weighted within-firm inequality and the de-noised variance of
// within-firm variances; sigma_x^2 from the weighted within-firm inequality;
// sigma_theta^2 from the unweighted one; alpha from the equilibrium
// condition; c_a from sqrt(2*(VarW - WFWI)) = sqrt(2*BFWI); c_l from alpha
// and c_a; ln A from the mean log wage.
Identified identify(const MomentSet& moments);

struct ReplicateEstimate {
  std::uint64_t seed;
  bool ok;
  std::string error;  // set when !ok
  ModelParams params; // valid when ok
  double sigma;
};

struct ParamsBounds {
  double sigma_x, sigma_theta, c_a, c_l, ln_A, sigma;
};

struct CalibrationResult {
  ModelParams central;      // mean over successful replicates
  double central_sigma;
  ParamsBounds ci_low;      // 2.5th percentiles
  ParamsBounds ci_high;     // 97.5th percentiles
  std::vector<ReplicateEstimate> per_replicate;
  std::int64_t n_replicates;
  std::int64_t n_failed;
};

// resample -> measure -> identify on each replicate. Failed replicates are
// excluded from the central estimate and the percentile bounds and their
// count reported; more than 50% failures aborts with a diagnostic. Replicate
// r uses seed derive_seed(seed, r).
CalibrationResult bootstrap_calibrate(const Panel& panel,
                                      std::int64_t n_replicates,
                                      std::uint64_t seed,
                                      std::int64_t min_firm_size,
                                      int n_threads = 0);

// Same, with caller-supplied per-replicate seeds (used by the paired
// counterfactual pipeline and by determinism tests).
CalibrationResult bootstrap_calibrate_with_seeds(
    const Panel& panel, std::span<const std::uint64_t> seeds,
    std::int64_t min_firm_size, int n_threads = 0);

// Percentile with linear interpolation between order statistics
// (values need not be sorted; q in [0,1]).
double percentile(std::vector<double> values, double q);

}  // namespace sorteq
