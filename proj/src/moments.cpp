#include "sorteq/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace sorteq {

WelfareReport welfare_report(const Equilibrium& eq, const ModelParams& params) {
  WelfareReport r;
  const double rho4 = eq.rho_sq * eq.rho_sq;
  const double sx2 = params.sigma_x * params.sigma_x;
  const double s2 = eq.sigma * eq.sigma;
  // Components from their own closed forms; the total is their literal sum so
  // the law-of-total-variance identity holds bit for bit.
  r.bfui = 0.5 * sx2 * s2 * rho4;
  r.wfui = 0.5 * sx2 * (2.0 - 1.0 / s2);
  r.var_u = r.bfui + r.wfui;
  r.bfui_share = rho4;
  return r;
}

WageReport wage_report(const Equilibrium& eq, const ModelParams& params) {
  WageReport r;
  const WelfareReport wf = welfare_report(eq, params);
  const double rho4 = eq.rho_sq * eq.rho_sq;
  const double q = 1.0 / (params.c_a * (1.0 - params.sigma_x / eq.sigma));
  r.wfwi = wf.wfui;
  r.bfwi = wf.var_u * rho4 * (1.0 + q) * (1.0 + q);
  r.var_w = r.wfwi + r.bfwi;
  r.bfwi_share = r.bfwi / r.var_w;
  const double s = eq.sigma, sx = params.sigma_x;
  r.mean_log_wage = 0.5 * sx * s +
                    0.5 * sx * (s * s - 1.0) / (params.c_a * (s - sx)) +
                    eq.b_const;
  return r;
}

ConditionalMoments conditional_moments(double theta, const Equilibrium& eq,
                                       const ModelParams& params) {
  ConditionalMoments m;
  const double ratio = params.sigma_x / eq.sigma;
  const double t2 = theta * theta;
  const double q = 1.0 / (params.c_a * (1.0 - ratio));
  m.e_x2 = ratio * ratio * (1.0 + t2);
  m.var_lnw = 0.5 * ratio * ratio * (1.0 + 2.0 * t2);
  m.e_lnw = 0.5 * ratio * (1.0 + t2 * (1.0 + q)) + eq.b_const;
  return m;
}

MomentSet targeted_moments(const Equilibrium& eq, const ModelParams& params) {
  const WageReport wr = wage_report(eq, params);
  MomentSet m;
  m.wfwi_weighted = wr.wfwi;
  // Var over the size-weighted firm distribution of the within-firm wage
  // variance: thetabar^2 has variance 2(sigma^2-1)^2.
  const double sx2 = params.sigma_x * params.sigma_x;
  const double c = 1.4142135623730950488016887242097 * sx2 * eq.rho_sq;
  m.var_of_within_var = c * c;
  const double ratio = params.sigma_x / eq.sigma;
  m.wfwi_unweighted =
      0.5 * ratio * ratio * (1.0 + 2.0 * params.sigma_theta * params.sigma_theta);
  m.var_log_wage = wr.var_w;
  m.mean_log_wage = wr.mean_log_wage;
  return m;
}

AkmReport akm_report(const Equilibrium& eq, const ModelParams& params) {
  AkmReport r;
  const double sxs = params.sigma_x * eq.sigma;
  const double rho2 = eq.rho_sq;
  const double q = 1.0 / (params.c_a * (1.0 - params.sigma_x / eq.sigma));
  r.var_wfe = 0.5 * sxs * sxs;
  r.var_ffe = 0.5 * (sxs * rho2 * q) * (sxs * rho2 * q);
  r.two_cov = (sxs * rho2) * (sxs * rho2) * q;
  r.var_avg_wfe = welfare_report(eq, params).bfui;
  r.corr_wfe_ffe = rho2;
  return r;
}

const char* primitive_name(Primitive p) {
  switch (p) {
    case Primitive::SigmaTheta: return "sigma_theta";
    case Primitive::SigmaX: return "sigma_x";
    case Primitive::CostAmenity: return "c_a";
    case Primitive::CostSpan: return "c_l";
  }
  return "?";
}

double get_primitive(const ModelParams& params, Primitive p) {
  switch (p) {
    case Primitive::SigmaTheta: return params.sigma_theta;
    case Primitive::SigmaX: return params.sigma_x;
    case Primitive::CostAmenity: return params.c_a;
    case Primitive::CostSpan: return params.c_l;
  }
  throw std::logic_error("bad primitive");
}

void set_primitive(ModelParams& params, Primitive p, double value) {
  switch (p) {
    case Primitive::SigmaTheta: params.sigma_theta = value; return;
    case Primitive::SigmaX: params.sigma_x = value; return;
    case Primitive::CostAmenity: params.c_a = value; return;
    case Primitive::CostSpan: params.c_l = value; return;
  }
  throw std::logic_error("bad primitive");
}

double evaluate_outcome(const ModelParams& params, Outcome outcome) {
  const Equilibrium eq = solve_equilibrium(params);
  switch (outcome) {
    case Outcome::Sigma: return eq.sigma;
    case Outcome::VarU: return welfare_report(eq, params).var_u;
    case Outcome::Bfui: return welfare_report(eq, params).bfui;
    case Outcome::Wfui: return welfare_report(eq, params).wfui;
    case Outcome::BfuiShare: return welfare_report(eq, params).bfui_share;
    case Outcome::VarW: return wage_report(eq, params).var_w;
    case Outcome::Bfwi: return wage_report(eq, params).bfwi;
    case Outcome::BfwiShare: return wage_report(eq, params).bfwi_share;
    case Outcome::Wfwi: return wage_report(eq, params).wfwi;
    case Outcome::MeanLogWage: return wage_report(eq, params).mean_log_wage;
  }
  throw std::logic_error("bad outcome");
}

double finite_diff_sensitivity(const ModelParams& params, Outcome outcome,
                               Primitive p, double step) {
  if (!(step > 0)) throw std::domain_error("finite_diff_sensitivity: step <= 0");
  ModelParams up = params, down = params;
  set_primitive(up, p, get_primitive(params, p) + step);
  set_primitive(down, p, get_primitive(params, p) - step);
  up.validate();
  down.validate();
  return (evaluate_outcome(up, outcome) - evaluate_outcome(down, outcome)) /
         (2.0 * step);
}

}  // namespace sorteq
