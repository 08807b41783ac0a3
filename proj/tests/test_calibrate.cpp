#include <doctest.h>

#include <array>
#include <cmath>

#include "sorteq/calibrate.hpp"
#include "sorteq/panel.hpp"
#include "test_helpers.hpp"

using namespace sorteq;

namespace {
const ModelParams kWorked{0.5, 0.5, 4.0, 0.1953125, 0.75};
}

TEST_CASE("identify inverts the worked example exactly") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const MomentSet m = targeted_moments(eq, kWorked);
  const Identified id = identify(m);
  CHECK(id.sigma * id.sigma == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(id.params.sigma_x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(id.params.sigma_theta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(id.params.c_a == doctest::Approx(4.0).epsilon(1e-11));
  CHECK(id.params.c_l == doctest::Approx(0.1953125).epsilon(1e-11));
  CHECK(id.params.ln_A == doctest::Approx(0.75).epsilon(1e-11));
}

TEST_CASE("identification round trip over the random grid") {
  RngStream rs(71, 0);
  for (int i = 0; i < 300; ++i) {
    const ModelParams p = testutil::random_params(rs);
    const Equilibrium eq = solve_equilibrium(p);
    const MomentSet m = targeted_moments(eq, p);
    const Identified id = identify(m);
    // Tolerance floors at the one-ulp input sensitivity of the inversion: at
    // degenerate corners (alpha -> 0) the moments hold the cost parameters
    // only through near-cancelling differences, and no inversion can do
    // better than the input rounding allows.
    std::array<double, 6> floor{};
    for (int which = 0; which < 5; ++which) {
      MomentSet mp = m;
      double* field = &mp.wfwi_weighted + which;
      *field = std::nextafter(*field, 2.0 * *field);
      const Identified idp = identify(mp);
      floor[0] += std::abs(idp.params.sigma_x - id.params.sigma_x) / id.params.sigma_x;
      floor[1] += std::abs(idp.params.sigma_theta - id.params.sigma_theta) /
                  id.params.sigma_theta;
      floor[2] += std::abs(idp.params.c_a - id.params.c_a) / id.params.c_a;
      floor[3] += std::abs(idp.params.c_l - id.params.c_l) / id.params.c_l;
      floor[4] += std::abs(idp.params.ln_A - id.params.ln_A) / std::abs(id.params.ln_A);
      floor[5] += std::abs(idp.sigma - id.sigma) / id.sigma;
    }
    const auto tol = [&](int k) { return std::max(1e-10, 8.0 * floor[k]); };
    CHECK(std::abs(id.params.sigma_x - p.sigma_x) / p.sigma_x < tol(0));
    CHECK(std::abs(id.params.sigma_theta - p.sigma_theta) / p.sigma_theta < tol(1));
    CHECK(std::abs(id.params.c_a - p.c_a) / p.c_a < tol(2));
    CHECK(std::abs(id.params.c_l - p.c_l) / p.c_l < tol(3));
    CHECK(std::abs(id.params.ln_A - p.ln_A) / std::abs(p.ln_A) < tol(4));
    CHECK(std::abs(id.sigma - eq.sigma) / eq.sigma < tol(5));
  }
}

TEST_CASE("shifting the mean log wage moves only ln A, by half the shift") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  MomentSet m = targeted_moments(eq, kWorked);
  const Identified base = identify(m);
  m.mean_log_wage += 0.3;
  const Identified shifted = identify(m);
  CHECK(shifted.params.ln_A - base.params.ln_A ==
        doctest::Approx(0.15).epsilon(1e-12));
  CHECK(shifted.params.sigma_x == base.params.sigma_x);
  CHECK(shifted.params.sigma_theta == base.params.sigma_theta);
  CHECK(shifted.params.c_a == base.params.c_a);
  CHECK(shifted.params.c_l == base.params.c_l);
}

TEST_CASE("vanishing variance-of-variances is rejected (sigma -> 1 boundary)") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  MomentSet m = targeted_moments(eq, kWorked);
  m.var_of_within_var = 0.0;
  CHECK_THROWS_AS(identify(m), InfeasibleMoments);
  // And the error names the violated inequality.
  try {
    identify(m);
  } catch (const InfeasibleMoments& e) {
    CHECK(std::string(e.what()).find("sigma must exceed 1") != std::string::npos);
  }
}

TEST_CASE("infeasible moment combinations name the inequality") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const MomentSet good = targeted_moments(eq, kWorked);

  MomentSet m = good;
  m.var_of_within_var = 10.0;  // sqrt(VoV) overtakes sqrt(2) WFWI
  CHECK_THROWS_WITH_AS(identify(m),
                       doctest::Contains("sqrt(2)*WFWI > sqrt(VoV)"),
                       InfeasibleMoments);

  m = good;
  m.var_log_wage = m.wfwi_weighted * 0.5;  // BFWI < 0
  CHECK_THROWS_WITH_AS(identify(m), doctest::Contains("Var(lnW) > WFWI"),
                       InfeasibleMoments);

  m = good;
  m.wfwi_unweighted = 1e-9;  // sigma_theta^2 < 0
  CHECK_THROWS_AS(identify(m), InfeasibleMoments);

  m = good;
  // Overall variance consistent with zero amenity response: c_a infeasible.
  m.var_log_wage = m.wfwi_weighted + 1e-12;
  CHECK_THROWS_AS(identify(m), InfeasibleMoments);
}

TEST_CASE("perturbing one moment moves the recovered parameters smoothly") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const MomentSet base = targeted_moments(eq, kWorked);
  const Identified id0 = identify(base);
  for (int which = 0; which < 5; ++which) {
    MomentSet m = base;
    double* field = &m.wfwi_weighted + which;
    *field *= 1.01;
    const Identified id1 = identify(m);
    // Finite, same-sign parameters with a bounded response.
    CHECK(std::isfinite(id1.params.c_a));
    CHECK(id1.params.c_a > 0);
    CHECK(id1.params.c_l > 0);
    CHECK(std::abs(id1.params.sigma_x / id0.params.sigma_x - 1.0) < 0.5);
    CHECK(std::abs(id1.sigma / id0.sigma - 1.0) < 0.5);
  }
}

TEST_CASE("bootstrap: identical replicate seeds give zero-width intervals") {
  const ModelParams sim = testutil::kSimPoint;
  const Equilibrium eq = solve_equilibrium(sim);
  const Panel panel = simulate_panel(sim, eq, 30000, 1000, 5, 44);
  const std::uint64_t seeds[2] = {5, 5};
  const CalibrationResult r = bootstrap_calibrate_with_seeds(panel, seeds, 5);
  CHECK(r.n_failed == 0);
  CHECK(r.ci_low.sigma_x == r.ci_high.sigma_x);
  CHECK(r.ci_low.c_l == r.ci_high.c_l);
  CHECK(r.central.sigma_x == r.per_replicate[0].params.sigma_x);
}

TEST_CASE("bootstrap is deterministic and brackets the point estimate") {
  const ModelParams sim = testutil::kSimPoint;
  const Equilibrium eq = solve_equilibrium(sim);
  const Panel panel = simulate_panel(sim, eq, 60000, 2000, 5, 46);
  const CalibrationResult a = bootstrap_calibrate(panel, 40, 9, 5);
  const CalibrationResult b = bootstrap_calibrate(panel, 40, 9, 5);
  CHECK(a.central.sigma_x == b.central.sigma_x);
  CHECK(a.ci_low.c_a == b.ci_low.c_a);
  CHECK(a.n_replicates == 40);
  CHECK(a.ci_low.sigma_x <= a.central.sigma_x);
  CHECK(a.central.sigma_x <= a.ci_high.sigma_x);
  CHECK(a.ci_low.ln_A <= a.ci_high.ln_A);
}

TEST_CASE("bootstrap aborts when most replicates fail identification") {
  // Five identical wages per firm: zero within-firm variance everywhere, so
  // every replicate is infeasible.
  Panel p;
  for (int j = 0; j < 10; ++j) {
    p.firms.push_back(FirmRecord{j, 0.0, 5});
    for (int i = 0; i < 5; ++i) {
      p.worker_ids.push_back(j * 5 + i);
      p.firm_index.push_back(j);
      p.log_wage.push_back(1.0);
    }
  }
  CHECK_THROWS_AS(bootstrap_calibrate(p, 10, 1, 2), std::runtime_error);
}

TEST_CASE("percentile interpolates order statistics") {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 1.0) == 4.0);
  CHECK(percentile(v, 0.5) == doctest::Approx(2.5));
  CHECK(percentile(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("quadrupling the panel roughly halves the sigma_x interval") {
  const ModelParams sim = testutil::kSimPoint;
  const Equilibrium eq = solve_equilibrium(sim);
  const Panel small = simulate_panel(sim, eq, 50000, 2500, 5, 81);
  const Panel big = simulate_panel(sim, eq, 200000, 10000, 5, 82);
  const CalibrationResult rs = bootstrap_calibrate(small, 60, 3, 5);
  const CalibrationResult rb = bootstrap_calibrate(big, 60, 3, 5);
  const double ws = rs.ci_high.sigma_x - rs.ci_low.sigma_x;
  const double wb = rb.ci_high.sigma_x - rb.ci_low.sigma_x;
  CHECK(ws / wb == doctest::Approx(2.0).epsilon(0.45));
}
