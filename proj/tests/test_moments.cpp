#include <doctest.h>

#include <cmath>

#include "sorteq/moments.hpp"
#include "sorteq/quadrature.hpp"
#include "test_helpers.hpp"

using namespace sorteq;

namespace {
const ModelParams kWorked{0.5, 0.5, 4.0, 0.1953125, 0.0};
}

TEST_CASE("welfare report reproduces the worked example") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const WelfareReport r = welfare_report(eq, kWorked);
  CHECK(r.var_u == doctest::Approx(0.28125).epsilon(1e-10));
  CHECK(r.bfui == doctest::Approx(0.0868055556).epsilon(1e-8));
  CHECK(r.wfui == doctest::Approx(0.1944444444).epsilon(1e-8));
  CHECK(r.bfui_share == doctest::Approx(0.3086419753).epsilon(1e-8));
}

TEST_CASE("welfare identities on the random grid") {
  RngStream rs(31, 0);
  for (int i = 0; i < 1000; ++i) {
    const ModelParams p = testutil::random_params(rs);
    const Equilibrium eq = solve_equilibrium(p);
    const WelfareReport r = welfare_report(eq, p);
    CHECK(r.var_u == r.bfui + r.wfui);  // law of total variance, exact
    const double rho4 = eq.rho_sq * eq.rho_sq;
    CHECK(std::abs(r.bfui_share - rho4) < 1e-12);
    const double direct = 1.0 - 1.0 / (eq.sigma * eq.sigma);
    CHECK(r.bfui / r.var_u == doctest::Approx(direct * direct).epsilon(1e-12));
    CHECK(r.var_u == doctest::Approx(0.5 * p.sigma_x * p.sigma_x * eq.sigma *
                                     eq.sigma)
                         .epsilon(1e-14));
    CHECK(r.wfui == doctest::Approx(0.5 * p.sigma_x * p.sigma_x *
                                    (2.0 - 1.0 / (eq.sigma * eq.sigma)))
                        .epsilon(1e-12));
  }
}

TEST_CASE("no firm heterogeneity kills between-firm welfare inequality") {
  ModelParams p{0.8, 1e-4, 4.0, 0.5, 0.0};
  const Equilibrium eq = solve_equilibrium(p);
  CHECK(welfare_report(eq, p).bfui < 1e-6);
}

TEST_CASE("wage report reproduces the worked example") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const WageReport r = wage_report(eq, kWorked);
  CHECK(r.var_w == doctest::Approx(0.3585611979).epsilon(1e-8));
  CHECK(r.bfwi == doctest::Approx(0.1641167535).epsilon(1e-8));
  CHECK(r.wfwi == doctest::Approx(0.1944444444).epsilon(1e-8));
  CHECK(r.wfwi == welfare_report(eq, kWorked).wfui);
  CHECK(r.var_w == r.bfwi + r.wfwi);
}

TEST_CASE("between-firm wage share closed form") {
  RngStream rs(32, 0);
  for (int i = 0; i < 500; ++i) {
    const ModelParams p = testutil::random_params(rs);
    const Equilibrium eq = solve_equilibrium(p);
    const WageReport r = wage_report(eq, p);
    const double rho4 = eq.rho_sq * eq.rho_sq;
    const double q = 1.0 / (p.c_a * (1.0 - p.sigma_x / eq.sigma));
    const double expected =
        1.0 / (1.0 + (1.0 / rho4 - 1.0) / ((1.0 + q) * (1.0 + q)));
    CHECK(r.bfwi_share == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("amenity shutdown: wage inequality collapses to welfare inequality") {
  ModelParams p{0.5, 0.5, 1e9, 0.1953125, 0.0};
  const Equilibrium eq = solve_equilibrium(p);
  const WageReport wr = wage_report(eq, p);
  const WelfareReport ur = welfare_report(eq, p);
  CHECK(std::abs(wr.var_w - ur.var_u) < 1e-6);
  CHECK(wr.bfwi_share == doctest::Approx(ur.bfui_share).epsilon(1e-6));
}

TEST_CASE("conditional moments: values at the origin and aggregation") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const ConditionalMoments m0 = conditional_moments(0.0, eq, kWorked);
  CHECK(m0.e_x2 == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(m0.var_lnw == doctest::Approx(1.0 / 18.0).epsilon(1e-12));

  // E over the size-weighted firm distribution of Var(lnW|theta) is WFWI.
  const double sd = std::sqrt(eq.sigma * eq.sigma - 1.0);
  const auto integrand = [&](double theta) {
    return conditional_moments(theta, eq, kWorked).var_lnw *
           normal_pdf(theta / sd) / sd;
  };
  const QuadResult q = integrate(integrand, -12 * sd, 12 * sd, 1e-12, 1e-12);
  CHECK(q.value ==
        doctest::Approx(wage_report(eq, kWorked).wfwi).epsilon(1e-10));

  // E over the unweighted firm distribution matches the closed form.
  const double st = kWorked.sigma_theta;
  const auto integrand_u = [&](double theta) {
    return conditional_moments(theta, eq, kWorked).var_lnw *
           normal_pdf(theta / st) / st;
  };
  const QuadResult qu = integrate(integrand_u, -12 * st, 12 * st, 1e-12, 1e-12);
  const double ratio = kWorked.sigma_x / eq.sigma;
  CHECK(qu.value ==
        doctest::Approx(0.5 * ratio * ratio * (1.0 + 2.0 * st * st))
            .epsilon(1e-10));

  CHECK(conditional_moments(1.0, eq, kWorked).e_lnw >
        conditional_moments(0.5, eq, kWorked).e_lnw);
}

TEST_CASE("targeted moments reproduce the worked example") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const MomentSet m = targeted_moments(eq, kWorked);
  CHECK(m.var_of_within_var == doctest::Approx(0.0385802469).epsilon(1e-8));
  CHECK(m.wfwi_unweighted == doctest::Approx(0.0833333333).epsilon(1e-8));
  const WageReport wr = wage_report(eq, kWorked);
  CHECK(m.var_log_wage == wr.var_w);
  CHECK(m.wfwi_weighted == wr.wfwi);
  CHECK(m.mean_log_wage == wr.mean_log_wage);
}

TEST_CASE("akm report: worked example and identities") {
  const Equilibrium eq = solve_equilibrium(kWorked);
  const AkmReport r = akm_report(eq, kWorked);
  CHECK(r.var_wfe == doctest::Approx(0.28125).epsilon(1e-10));
  CHECK(r.var_ffe == doctest::Approx(0.0122070313).epsilon(1e-8));
  CHECK(r.two_cov == doctest::Approx(0.0651041667).epsilon(1e-8));
  CHECK(r.var_avg_wfe == doctest::Approx(0.0868055556).epsilon(1e-8));
  CHECK(r.corr_wfe_ffe == doctest::Approx(5.0 / 9.0).epsilon(1e-10));

  RngStream rs(33, 0);
  for (int i = 0; i < 500; ++i) {
    const ModelParams p = testutil::random_params(rs);
    const Equilibrium eq2 = solve_equilibrium(p);
    const AkmReport a = akm_report(eq2, p);
    const WageReport w = wage_report(eq2, p);
    const WelfareReport u = welfare_report(eq2, p);
    CHECK(a.var_wfe + a.var_ffe + a.two_cov ==
          doctest::Approx(w.var_w).epsilon(1e-11));
    CHECK(a.var_ffe + a.two_cov + a.var_avg_wfe ==
          doctest::Approx(w.bfwi).epsilon(1e-11));
    CHECK(a.var_avg_wfe == u.bfui);
    CHECK(std::abs(a.corr_wfe_ffe - eq2.rho_sq) < 1e-12);
    CHECK(a.two_cov / (2.0 * std::sqrt(a.var_wfe * a.var_ffe)) ==
          doctest::Approx(eq2.rho_sq).epsilon(1e-11));
  }
}

TEST_CASE("amenity shutdown kills the firm effect") {
  ModelParams p{0.5, 0.5, 1e9, 0.1953125, 0.0};
  const Equilibrium eq = solve_equilibrium(p);
  const AkmReport r = akm_report(eq, p);
  CHECK(std::abs(r.var_ffe) < 1e-12);
  CHECK(std::abs(r.two_cov) < 1e-6);
}

TEST_CASE("finite differences: headline comparative statics") {
  const ModelParams p = kWorked;
  CHECK(finite_diff_sensitivity(p, Outcome::Sigma, Primitive::SigmaTheta,
                                1e-5 * p.sigma_theta) > 0);
  CHECK(finite_diff_sensitivity(p, Outcome::VarW, Primitive::SigmaX,
                                1e-5 * p.sigma_x) > 0);
  CHECK(finite_diff_sensitivity(p, Outcome::BfwiShare, Primitive::CostAmenity,
                                1e-5 * p.c_a) < 0);
}

TEST_CASE("step halving agrees at second order") {
  const ModelParams p = kWorked;
  const double d1 = finite_diff_sensitivity(p, Outcome::VarW, Primitive::CostSpan,
                                            1e-4 * p.c_l);
  const double d2 = finite_diff_sensitivity(p, Outcome::VarW, Primitive::CostSpan,
                                            5e-5 * p.c_l);
  // Central differences are O(h^2); the two estimates must be far closer to
  // each other than any first-order scheme would allow.
  CHECK(std::abs(d1 - d2) < 1e-6 * std::abs(d2) + 1e-12);
}

TEST_CASE("welfare outcomes rise with dispersions and fall with costs") {
  RngStream rs(34, 0);
  const Outcome outcomes[] = {Outcome::Sigma, Outcome::VarU, Outcome::Bfui,
                              Outcome::Wfui, Outcome::BfuiShare};
  for (int i = 0; i < 60; ++i) {
    const ModelParams p = testutil::random_params(rs);
    for (const Outcome o : outcomes) {
      for (const Primitive prim : kPrimitives) {
        const double step = 1e-5 * get_primitive(p, prim);
        const double d = finite_diff_sensitivity(p, o, prim, step);
        const bool positive =
            prim == Primitive::SigmaX || prim == Primitive::SigmaTheta;
        CHECK((positive ? d > 0 : d < 0));
      }
    }
  }
}

TEST_CASE("wage outcomes: monotone signs on the sigma_x < 0.99 subgrid") {
  RngStream rs(35, 0);
  const Outcome outcomes[] = {Outcome::VarW, Outcome::Bfwi, Outcome::BfwiShare};
  int used = 0;
  for (int i = 0; used < 40 && i < 500; ++i) {
    ModelParams p = testutil::random_params(rs);
    if (p.sigma_x >= 0.99) continue;
    ++used;
    for (const Outcome o : outcomes) {
      CHECK(finite_diff_sensitivity(p, o, Primitive::SigmaX, 1e-5 * p.sigma_x) > 0);
      CHECK(finite_diff_sensitivity(p, o, Primitive::CostAmenity, 1e-5 * p.c_a) < 0);
      CHECK(finite_diff_sensitivity(p, o, Primitive::SigmaTheta,
                                    1e-5 * p.sigma_theta) > 0);
      CHECK(finite_diff_sensitivity(p, o, Primitive::CostSpan, 1e-5 * p.c_l) < 0);
    }
  }
  CHECK(used == 40);
}

TEST_CASE("sensitivity rejects non-positive steps and invalid perturbations") {
  CHECK_THROWS_AS(
      finite_diff_sensitivity(kWorked, Outcome::VarW, Primitive::SigmaX, 0.0),
      std::domain_error);
  // A step that pushes the parameter negative must be rejected.
  CHECK_THROWS_AS(finite_diff_sensitivity(kWorked, Outcome::VarW,
                                          Primitive::SigmaX, 1.0),
                  std::domain_error);
}
