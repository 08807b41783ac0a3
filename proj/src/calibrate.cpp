#include "sorteq/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>

#include "sorteq/parallel.hpp"
#include "sorteq/rng.hpp"

namespace sorteq {
namespace {

constexpr double kLn4 = 1.3862943611198906188344642429164;

[[noreturn]] void infeasible(const std::string& inequality,
                             const std::string& values) {
  throw InfeasibleMoments("moments violate " + inequality + " (" + values + ")");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

Identified identify(const MomentSet& m) {
  // Internals run in long double: near the degenerate corners (alpha -> 0,
  // sigma -> 1) the parameters are determined by near-cancelling moment
  // differences, and the recovery should be limited by the inputs' own
  // rounding, not by the arithmetic here.
  const long double wfwi = m.wfwi_weighted;
  const long double vov = m.var_of_within_var;
  if (!(wfwi > 0.0L)) infeasible("WFWI > 0", "WFWI=" + fmt(m.wfwi_weighted));
  if (!(vov > 0.0L))
    infeasible("Var of within-firm variances > 0 (sigma must exceed 1 strictly)",
               "VoV=" + fmt(m.var_of_within_var));
  const long double rt = std::sqrt(vov);
  const long double s2w = 1.4142135623730950488016887242097L * wfwi;
  if (!(s2w > rt))
    infeasible("sqrt(2)*WFWI > sqrt(VoV)",
               "sqrt(2)*WFWI=" + fmt(static_cast<double>(s2w)) +
                   ", sqrt(VoV)=" + fmt(static_cast<double>(rt)));
  const long double sigma2 = (s2w - 0.5L * rt) / (s2w - rt);
  const long double sigma = std::sqrt(sigma2);

  const long double sx2 = 2.0L * wfwi / (2.0L - 1.0L / sigma2);
  const long double sigma_x = std::sqrt(sx2);
  if (!(sigma > sigma_x))
    infeasible("sigma > sigma_x",
               "sigma=" + fmt(static_cast<double>(sigma)) +
                   ", sigma_x=" + fmt(static_cast<double>(sigma_x)));

  const long double unw = m.wfwi_unweighted;
  const long double st2 = 0.5L * ((unw / wfwi) * (2.0L * sigma2 - 1.0L) - 1.0L);
  if (!(st2 > 0.0L))
    infeasible("(unweighted WFWI / WFWI) * (2*sigma^2 - 1) > 1",
               "lhs-1=" + fmt(static_cast<double>(2.0L * st2)));
  const long double sigma_theta = std::sqrt(st2);
  // alpha = (sigma/sigma_x - 1)(sigma^2-1-sigma_theta^2)/(sigma_theta^2 (sigma^2-1))
  // with sigma^2-1-sigma_theta^2 = (sigma^2-0.5)(WFWI - unweighted)/WFWI, which
  // reads the near-cancelling difference straight off the input moments.
  const long double gap = (sigma2 - 0.5L) * (wfwi - unw) / wfwi;
  if (!(gap > 0.0L))
    infeasible("sigma^2 - 1 > sigma_theta^2 (alpha > 0)",
               "sigma^2-1-sigma_theta^2=" + fmt(static_cast<double>(gap)));
  const long double alpha =
      (sigma / sigma_x - 1.0L) * gap / (st2 * (sigma2 - 1.0L));

  const long double bfwi = static_cast<long double>(m.var_log_wage) - wfwi;
  if (!(bfwi > 0.0L))
    infeasible("Var(lnW) > WFWI", "BFWI=" + fmt(static_cast<double>(bfwi)));
  const long double rho2 = 1.0L - 1.0L / sigma2;
  // sqrt(2*BFWI) = sigma_x*sigma*rho^2*(1+q) with q = 1/(c_a*(1-sigma_x/sigma)).
  const long double ratio = std::sqrt(2.0L * bfwi) / (sigma_x * sigma * rho2);
  if (!(ratio > 1.0L))
    infeasible("sqrt(2*BFWI) > sigma_x*sigma*rho^2 (c_a finite and positive)",
               "ratio=" + fmt(static_cast<double>(ratio)));
  const long double q = ratio - 1.0L;
  const long double c_a = 1.0L / (q * (1.0L - sigma_x / sigma));
  const long double c_l = (1.0L + 1.0L / c_a) / alpha;

  // ln A from the mean log wage through B and ln u(0).
  const long double s2m1 = sigma2 - 1.0L;
  const long double k_u0 =
      -0.5L * std::log1p(-sigma_x / sigma) - static_cast<long double>(kLn4) -
      (1.0L / alpha) * (std::log(sigma_theta) - 0.5L * std::log(s2m1)) -
      (c_a / (1.0L + c_a)) * std::log1p(c_l);
  const long double b_less_lnu0 =
      std::log1p(1.0L / c_a) +
      (c_l / (1.0L + c_a)) *
          (std::log(sigma_theta) - 0.5L * std::log(s2m1) + std::log1p(c_l) / c_l);
  const long double mean_no_b =
      0.5L * sigma_x * sigma + 0.5L * sigma_x * s2m1 / (c_a * (sigma - sigma_x));
  const long double ln_A =
      0.5L * (static_cast<long double>(m.mean_log_wage) - mean_no_b -
              b_less_lnu0 - k_u0);

  Identified out;
  out.params = ModelParams{static_cast<double>(sigma_x),
                           static_cast<double>(sigma_theta),
                           static_cast<double>(c_a), static_cast<double>(c_l),
                           static_cast<double>(ln_A)};
  out.sigma = static_cast<double>(sigma);
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - std::floor(pos);
  return values[lo] + frac * (values[hi] - values[lo]);
}

CalibrationResult bootstrap_calibrate_with_seeds(
    const Panel& panel, std::span<const std::uint64_t> seeds,
    std::int64_t min_firm_size, int n_threads) {
  if (seeds.size() < 2)
    throw std::invalid_argument("bootstrap_calibrate: need at least 2 replicates");
  CalibrationResult result;
  result.n_replicates = static_cast<std::int64_t>(seeds.size());
  result.per_replicate.resize(seeds.size());

  parallel_for(static_cast<std::int64_t>(seeds.size()), n_threads,
               [&](std::int64_t r) {
                 ReplicateEstimate& est = result.per_replicate[r];
                 est.seed = seeds[r];
                 try {
                   const Panel draw = resample(panel, seeds[r]);
                   const MeasuredMoments mm = measure_moments(draw, min_firm_size);
                   const Identified id = identify(mm.targets());
                   est.ok = true;
                   est.params = id.params;
                   est.sigma = id.sigma;
                 } catch (const std::exception& e) {
                   est.ok = false;
                   est.error = e.what();
                 }
               });

  std::vector<double> sx, st, ca, cl, lnA, sg;
  for (const ReplicateEstimate& est : result.per_replicate) {
    if (!est.ok) continue;
    sx.push_back(est.params.sigma_x);
    st.push_back(est.params.sigma_theta);
    ca.push_back(est.params.c_a);
    cl.push_back(est.params.c_l);
    lnA.push_back(est.params.ln_A);
    sg.push_back(est.sigma);
  }
  result.n_failed = result.n_replicates - static_cast<std::int64_t>(sx.size());
  if (2 * result.n_failed > result.n_replicates) {
    std::string first;
    for (const ReplicateEstimate& est : result.per_replicate)
      if (!est.ok) { first = est.error; break; }
    throw std::runtime_error(
        "bootstrap_calibrate: " + std::to_string(result.n_failed) + " of " +
        std::to_string(result.n_replicates) +
        " replicates failed identification; first failure: " + first);
  }

  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  result.central = ModelParams{mean(sx), mean(st), mean(ca), mean(cl), mean(lnA)};
  result.central_sigma = mean(sg);
  result.ci_low = ParamsBounds{percentile(sx, 0.025), percentile(st, 0.025),
                               percentile(ca, 0.025), percentile(cl, 0.025),
                               percentile(lnA, 0.025), percentile(sg, 0.025)};
  result.ci_high = ParamsBounds{percentile(sx, 0.975), percentile(st, 0.975),
                                percentile(ca, 0.975), percentile(cl, 0.975),
                                percentile(lnA, 0.975), percentile(sg, 0.975)};
  return result;
}

CalibrationResult bootstrap_calibrate(const Panel& panel,
                                      std::int64_t n_replicates,
                                      std::uint64_t seed,
                                      std::int64_t min_firm_size, int n_threads) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_replicates));
  for (std::int64_t r = 0; r < n_replicates; ++r)
    seeds[r] = derive_seed(seed, static_cast<std::uint64_t>(r));
  return bootstrap_calibrate_with_seeds(panel, seeds, min_firm_size, n_threads);
}

}  // namespace sorteq
