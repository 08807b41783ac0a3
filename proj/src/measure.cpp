#include "sorteq/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sorteq/kernels.hpp"
#include "sorteq/rng.hpp"

namespace sorteq {
namespace {

// Within-firm moments from centered power sums. The d1 correction removes
// the residual of the first-pass mean.
FirmStats firm_stats_from_slice(const FirmRecord& firm, const double* w,
                                std::int64_t n) {
  FirmStats fs;
  fs.firm_id = firm.firm_id;
  fs.size = n;
  const double nn = static_cast<double>(n);
  const double s1 = kernels::sum(w, static_cast<std::size_t>(n));
  fs.mean_lw = s1 / nn;
  const kernels::DevSums ds =
      kernels::dev_sums(w, static_cast<std::size_t>(n), fs.mean_lw);
  const double m2_sum = ds.d2 - ds.d1 * ds.d1 / nn;
  fs.var_lw = m2_sum / (nn - 1.0);
  fs.mu2_hat = m2_sum / nn;
  fs.mu4_hat = ds.d4 / nn;
  fs.vov_adjustment = fs.mu4_hat / nn -
                      fs.mu2_hat * fs.mu2_hat * (nn - 3.0) / (nn * nn - nn);
  if (n >= 4) {
    // Unbiased mu4 and mu2^2 via the inverse of
    //   E[m4]   = ((n-1)/n^3) [(n^2-3n+3) mu4 + 3(2n-3) mu2^2]
    //   E[m2^2] = ((n-1)/n^3) [(n-1) mu4 + (n^2-2n+3) mu2^2].
    const double m4 = fs.mu4_hat;
    const double m2sq = fs.mu2_hat * fs.mu2_hat;
    const double denom = (nn - 1.0) * (nn - 2.0) * (nn - 3.0);
    const double mu4_u =
        nn * ((nn * nn - 2.0 * nn + 3.0) * m4 - 3.0 * (2.0 * nn - 3.0) * m2sq) /
        denom;
    const double sig4_u =
        nn * ((nn * nn - 3.0 * nn + 3.0) * m2sq - (nn - 1.0) * m4) / denom;
    fs.vov_adjustment_unbiased =
        mu4_u / nn - sig4_u * (nn - 3.0) / (nn * nn - nn);
  } else {
    fs.vov_adjustment_unbiased = fs.vov_adjustment;
  }
  return fs;
}

}  // namespace

std::vector<FirmStats> firm_statistics(const Panel& panel,
                                       std::int64_t min_firm_size,
                                       std::int64_t* n_excluded) {
  const std::int64_t min_size = std::max<std::int64_t>(2, min_firm_size);
  std::vector<FirmStats> out;
  out.reserve(panel.firms.size());
  std::int64_t excluded = 0;
  std::size_t pos = 0;
  for (const FirmRecord& firm : panel.firms) {
    const std::int64_t n = firm.size;
    if (n < min_size) {
      if (n > 0) ++excluded;
      pos += static_cast<std::size_t>(n);
      continue;
    }
    out.push_back(firm_stats_from_slice(firm, panel.log_wage.data() + pos, n));
    pos += static_cast<std::size_t>(n);
  }
  if (pos != panel.n_workers())
    throw std::logic_error("firm_statistics: firm sizes inconsistent with panel");
  if (n_excluded) *n_excluded = excluded;
  return out;
}

MeasuredMoments measure_moments(const Panel& panel, std::int64_t min_firm_size) {
  MeasuredMoments m;
  const std::vector<FirmStats> stats =
      firm_statistics(panel, min_firm_size, &m.n_firms_excluded);
  if (stats.empty())
    throw std::invalid_argument(
        "measure_moments: no firms survive the size filter");

  // Gather per-firm aggregates; recover overall moments from the exact
  // within/between split of the sum of squared deviations.
  std::int64_t n_total = 0;
  double sum_lw = 0.0;
  for (const FirmStats& f : stats) {
    n_total += f.size;
    sum_lw += f.mean_lw * static_cast<double>(f.size);
  }
  const double nn = static_cast<double>(n_total);
  const double grand_mean = sum_lw / nn;

  double within_ss = 0.0, between_ss = 0.0;
  double wfwi_w = 0.0, wfwi_u = 0.0, adj_w = 0.0;
  for (const FirmStats& f : stats) {
    const double fn = static_cast<double>(f.size);
    within_ss += f.mu2_hat * fn;
    const double d = f.mean_lw - grand_mean;
    between_ss += fn * d * d;
    wfwi_w += fn * f.var_lw;
    wfwi_u += f.var_lw;
    adj_w += fn * f.vov_adjustment_unbiased;
  }
  m.n_workers = n_total;
  m.n_firms = static_cast<std::int64_t>(stats.size());
  m.mean_log_wage = grand_mean;
  m.var_log_wage = (within_ss + between_ss) / (nn - 1.0);
  m.wfwi_weighted = wfwi_w / nn;
  m.wfwi = m.wfwi_weighted;
  m.wfwi_unweighted = wfwi_u / static_cast<double>(stats.size());
  m.bfwi = m.var_log_wage - m.wfwi_weighted;

  double raw = 0.0;
  for (const FirmStats& f : stats) {
    const double d = f.var_lw - m.wfwi_weighted;
    raw += static_cast<double>(f.size) * d * d;
  }
  m.var_of_within_var_raw = raw / nn;
  if (m.var_log_wage <= 0.0) {
    // All wages identical: the dispersion of within-firm variances carries no
    // information, report zero and flag it.
    m.degenerate_wages = true;
    m.var_of_within_var = 0.0;
    return m;
  }
  const double denoised = m.var_of_within_var_raw - adj_w / nn;
  if (denoised < 0.0) {
    m.vov_clamped = true;
    m.var_of_within_var = 0.0;
  } else {
    m.var_of_within_var = denoised;
  }
  return m;
}

Panel resample(const Panel& panel, std::uint64_t seed) {
  const std::size_t n = panel.n_workers();
  if (n == 0) throw std::invalid_argument("resample: empty panel");
  RngStream rs(seed, 0);
  std::vector<std::uint64_t> marked((n + 63) / 64, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::uint64_t i = rs.next_below(n);
    marked[i >> 6] |= 1ull << (i & 63);
  }

  Panel out;
  out.year_label = panel.year_label;
  out.params_used = panel.params_used;
  out.firms = panel.firms;
  for (FirmRecord& f : out.firms) f.size = 0;
  const bool latent = panel.has_latent();
  out.worker_ids.reserve(n * 2 / 3 + 16);
  out.firm_index.reserve(n * 2 / 3 + 16);
  out.log_wage.reserve(n * 2 / 3 + 16);
  if (latent) {
    out.x.reserve(n * 2 / 3 + 16);
    out.h.reserve(n * 2 / 3 + 16);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(marked[i >> 6] >> (i & 63) & 1ull)) continue;
    out.worker_ids.push_back(panel.worker_ids[i]);
    out.firm_index.push_back(panel.firm_index[i]);
    out.log_wage.push_back(panel.log_wage[i]);
    if (latent) {
      out.x.push_back(panel.x[i]);
      out.h.push_back(panel.h[i]);
    }
    ++out.firms[panel.firm_index[i]].size;
  }
  return out;
}

}  // namespace sorteq
