#include "sorteq/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "sorteq/kernels.hpp"
#include "sorteq/parallel.hpp"

namespace sorteq {
namespace {

// Largest-remainder apportionment of n_workers across weights, then a
// min-size floor rebalanced against the largest firms so the total is
// preserved exactly.
std::vector<std::int64_t> apportion_sizes(const std::vector<double>& weight,
                                          std::int64_t n_workers,
                                          std::int64_t min_size) {
  const std::size_t n = weight.size();
  const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);
  std::vector<std::int64_t> size(n);
  std::vector<std::pair<double, std::size_t>> frac(n);
  std::int64_t assigned = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double quota = static_cast<double>(n_workers) * weight[j] / wsum;
    size[j] = static_cast<std::int64_t>(std::floor(quota));
    frac[j] = {quota - std::floor(quota), j};
    assigned += size[j];
  }
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t r = 0; r < n_workers - assigned; ++r) ++size[frac[r].second];

  std::int64_t deficit = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (size[j] < min_size) {
      deficit += min_size - size[j];
      size[j] = min_size;
    }
  if (deficit > 0) {
    // Shave the deficit off the largest firms, one worker per round.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (size[a] != size[b]) return size[a] > size[b];
      return a < b;
    });
    while (deficit > 0) {
      bool any = false;
      for (std::size_t idx : order) {
        if (deficit == 0) break;
        if (size[idx] > min_size) {
          --size[idx];
          --deficit;
          any = true;
        }
      }
      if (!any)
        throw std::domain_error(
            "simulate_panel: min_firm_size floor infeasible for n_workers");
    }
  }
  return size;
}

void append_field(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

Panel simulate_panel(const ModelParams& params, const Equilibrium& eq,
                     std::int64_t n_workers, std::int64_t n_firms,
                     std::int64_t min_firm_size, std::uint64_t seed,
                     int n_threads) {
  params.validate();
  if (n_workers <= 0 || n_firms <= 0 || min_firm_size <= 0)
    throw std::domain_error("simulate_panel: counts must be positive");
  if (n_workers < n_firms * min_firm_size)
    throw std::domain_error(
        "simulate_panel: n_workers < n_firms * min_firm_size");

  // Pass 1: firm productivities and size weights. Weights are normalised by
  // the max exponent so extreme alpha never overflows.
  std::vector<double> theta(n_firms);
  std::vector<double> ln_l(n_firms);
  const double k = eq.alpha / (eq.sigma / params.sigma_x - 1.0);
  parallel_for(n_firms, n_threads, [&](std::int64_t j) {
    RngStream rs(seed, static_cast<std::uint64_t>(j));
    theta[j] = params.sigma_theta * rs.next_normal();
    ln_l[j] = 0.5 * k * theta[j] * theta[j];
  });
  const double ln_max = *std::max_element(ln_l.begin(), ln_l.end());
  std::vector<double> weight(n_firms);
  for (std::int64_t j = 0; j < n_firms; ++j)
    weight[j] = std::exp(ln_l[j] - ln_max);
  const std::vector<std::int64_t> size =
      apportion_sizes(weight, n_workers, min_firm_size);

  Panel panel;
  panel.params_used = params;
  panel.firms.resize(n_firms);
  std::vector<std::int64_t> offset(n_firms + 1, 0);
  for (std::int64_t j = 0; j < n_firms; ++j) {
    panel.firms[j] = FirmRecord{j, theta[j], size[j]};
    offset[j + 1] = offset[j] + size[j];
  }
  panel.worker_ids.resize(n_workers);
  panel.firm_index.resize(n_workers);
  panel.x.resize(n_workers);
  panel.h.resize(n_workers);
  panel.log_wage.resize(n_workers);

  // Pass 2: workers. Firm j re-creates stream (seed, j), discards the theta
  // draw, then draws its jobs; the wage plane is evaluated by the kernel so
  // stored wages match log_wage() bit for bit.
  const WageCoeffs wc = wage_coeffs(eq, params);
  parallel_for(n_firms, n_threads, [&](std::int64_t j) {
    RngStream rs(seed, static_cast<std::uint64_t>(j));
    (void)rs.next_normal();  // theta
    const std::int64_t lo = offset[j], n = size[j];
    for (std::int64_t i = 0; i < n; ++i) {
      panel.worker_ids[lo + i] = lo + i;
      panel.firm_index[lo + i] = static_cast<std::int32_t>(j);
      panel.h[lo + i] = theta[j] + rs.next_normal();
    }
    kernels::skill_wage_transform(panel.h.data() + lo, static_cast<std::size_t>(n),
                                  wc.skill_scale, wc.worker_coef,
                                  wc.firm_component(theta[j]),
                                  panel.x.data() + lo, panel.log_wage.data() + lo);
  });
  return panel;
}

double draw_sizeweighted_theta(const Equilibrium& eq, RngStream& stream) {
  return std::sqrt(eq.sigma * eq.sigma - 1.0) * stream.next_normal();
}

void write_panel_csv(const Panel& panel, const std::string& path,
                     bool include_latent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::WriteOutput, path);
  const bool latent = include_latent && panel.has_latent();
  std::string buf;
  buf.reserve(1 << 20);
  buf += latent ? "worker_id,firm_id,log_wage,x,h,theta\n"
                : "worker_id,firm_id,log_wage\n";
  for (std::size_t i = 0; i < panel.n_workers(); ++i) {
    const FirmRecord& f = panel.firms[panel.firm_index[i]];
    buf += std::to_string(panel.worker_ids[i]);
    buf += ',';
    buf += std::to_string(f.firm_id);
    buf += ',';
    append_field(buf, panel.log_wage[i]);
    if (latent) {
      buf += ',';
      append_field(buf, panel.x[i]);
      buf += ',';
      append_field(buf, panel.h[i]);
      buf += ',';
      append_field(buf, f.theta);
    }
    buf += '\n';
    if (buf.size() > (1 << 20) - 256) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(IoError::Kind::WriteOutput, path);
}

void write_firm_csv(const Panel& panel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::WriteOutput, path);
  std::string buf = "firm_id,theta,size\n";
  for (const FirmRecord& f : panel.firms) {
    buf += std::to_string(f.firm_id);
    buf += ',';
    append_field(buf, f.theta);
    buf += ',';
    buf += std::to_string(f.size);
    buf += '\n';
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(IoError::Kind::WriteOutput, path);
}

namespace {

struct Row {
  std::int64_t worker_id;
  std::int64_t firm_id;
  double log_wage, x, h, theta;
};

double parse_double(std::string_view s, std::size_t row) {
  double v;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw SchemaError("bad numeric field '" + std::string(s) + "'", row);
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t row) {
  std::int64_t v;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw SchemaError("bad integer field '" + std::string(s) + "'", row);
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

}  // namespace

Panel read_panel_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::OpenInput, path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool latent;
  if (line == "worker_id,firm_id,log_wage,x,h,theta")
    latent = true;
  else if (line == "worker_id,firm_id,log_wage")
    latent = false;
  else
    throw SchemaError("unexpected header '" + line + "'", 1);

  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != (latent ? 6u : 3u))
      throw SchemaError("expected " + std::to_string(latent ? 6 : 3) +
                            " fields, got " + std::to_string(fields.size()),
                        lineno);
    Row r{};
    r.worker_id = parse_int(fields[0], lineno);
    r.firm_id = parse_int(fields[1], lineno);
    r.log_wage = parse_double(fields[2], lineno);
    if (latent) {
      r.x = parse_double(fields[3], lineno);
      r.h = parse_double(fields[4], lineno);
      r.theta = parse_double(fields[5], lineno);
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw SchemaError("no data rows", lineno);

  // Group workers by firm in order of first appearance; row order within a
  // firm is preserved.
  std::unordered_map<std::int64_t, std::int32_t> firm_pos;
  firm_pos.reserve(rows.size() / 4 + 16);
  Panel panel;
  for (const Row& r : rows) {
    auto [it, inserted] = firm_pos.try_emplace(
        r.firm_id, static_cast<std::int32_t>(panel.firms.size()));
    if (inserted)
      panel.firms.push_back(FirmRecord{r.firm_id, latent ? r.theta : 0.0, 0});
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return firm_pos[rows[a].firm_id] < firm_pos[rows[b].firm_id];
  });

  panel.worker_ids.reserve(rows.size());
  panel.firm_index.reserve(rows.size());
  panel.log_wage.reserve(rows.size());
  if (latent) {
    panel.x.reserve(rows.size());
    panel.h.reserve(rows.size());
  }
  for (std::size_t idx : order) {
    const Row& r = rows[idx];
    const std::int32_t fi = firm_pos[r.firm_id];
    panel.worker_ids.push_back(r.worker_id);
    panel.firm_index.push_back(fi);
    panel.log_wage.push_back(r.log_wage);
    if (latent) {
      panel.x.push_back(r.x);
      panel.h.push_back(r.h);
      if (panel.firms[fi].size == 0) panel.firms[fi].theta = r.theta;
    }
    ++panel.firms[fi].size;
  }

  std::vector<std::int64_t> ids = panel.worker_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw SchemaError("duplicate worker_id", 0);
  return panel;
}

}  // namespace sorteq
