#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sorteq/model.hpp"
#include "sorteq/rng.hpp"

namespace sorteq {

struct FirmRecord {
  std::int64_t firm_id;
  double theta;
  std::int64_t size;
};

struct WorkerRecord {
  std::int64_t worker_id;
  std::int64_t firm_id;
  double x;
  double h;
  double log_wage;
};

// Synthetic matched employer-employee cross section. Workers are stored in
// column layout, grouped contiguously by firm in the order of `firms`;
// firm_index[i] is the position of worker i's firm in `firms`. The latent
// columns x/h (and firm theta) exist to support oracle checks; the
// measurement pipeline never reads them.
struct Panel {
  std::int64_t year_label = 0;
  std::vector<FirmRecord> firms;
  std::vector<std::int64_t> worker_ids;
  std::vector<std::int32_t> firm_index;
  std::vector<double> x;
  std::vector<double> h;
  std::vector<double> log_wage;
  std::optional<ModelParams> params_used;

  std::size_t n_workers() const { return worker_ids.size(); }
  bool has_latent() const { return !x.empty(); }
  WorkerRecord worker(std::size_t i) const {
    return WorkerRecord{worker_ids[i], firms[firm_index[i]].firm_id,
                        has_latent() ? x[i] : 0.0, has_latent() ? h[i] : 0.0,
                        log_wage[i]};
  }
};

// Generates a panel from a solved equilibrium. Firm productivities are
// N(0, sigma_theta^2); integer sizes follow largest-remainder rounding of the
// L*(theta) shares with a min_firm_size floor, rebalanced so the total equals
// n_workers; within firm j jobs are h ~ N(theta_j, 1) i.i.d. and
// x = (sigma_x/sigma) h. Stored wages equal log_wage(x, theta_j) bit for bit.
// Deterministic in (seed); firm j draws from stream (seed, j) so generation
// order does not matter.
Panel simulate_panel(const ModelParams& params, const Equilibrium& eq,
                     std::int64_t n_workers, std::int64_t n_firms,
                     std::int64_t min_firm_size, std::uint64_t seed,
                     int n_threads = 0);

// One draw from the size-weighted firm productivity distribution,
// N(0, sigma^2 - 1).
double draw_sizeweighted_theta(const Equilibrium& eq, RngStream& stream);

// CSV row error with 1-based row number (header is row 1).
struct SchemaError : std::runtime_error {
  SchemaError(const std::string& msg, std::size_t row)
      : std::runtime_error(msg + " (row " + std::to_string(row) + ")"), row(row) {}
  std::size_t row;
};

struct IoError : std::runtime_error {
  enum class Kind { OpenInput, WriteOutput };
  IoError(Kind kind, const std::string& path)
      : std::runtime_error((kind == Kind::OpenInput ? "cannot open input: "
                                                    : "cannot write output: ") + path),
        kind(kind), path(path) {}
  Kind kind;
  std::string path;
};

// Worker file: header worker_id,firm_id,log_wage[,x,h,theta]. Latent columns
// are written unless include_latent is false and required to be all-present
// or all-absent on read.
void write_panel_csv(const Panel& panel, const std::string& path,
                     bool include_latent = true);
Panel read_panel_csv(const std::string& path);

// Optional firm file: header firm_id,theta,size.
void write_firm_csv(const Panel& panel, const std::string& path);

}  // namespace sorteq
