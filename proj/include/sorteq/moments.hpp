#pragma once

#include "sorteq/model.hpp"

namespace sorteq {

// Law-of-total-variance split of log utility.
struct WelfareReport {
  double var_u;       // overall welfare inequality, 0.5*sigma_x^2*sigma^2
  double bfui;        // between-firm component, var_u * rho^4
  double wfui;        // within-firm component, var_u - bfui
  double bfui_share;  // bfui / var_u = rho^4
};

// Law-of-total-variance split of log wages.
struct WageReport {
  double var_w;
  double bfwi;
  double wfwi;  // equals wfui of the same equilibrium
  double bfwi_share;
  double mean_log_wage;
};

// The five calibration-target moments.
struct MomentSet {
  double wfwi_weighted;      // within-firm wage inequality, firm-size weighted
  double var_of_within_var;  // variance of within-firm wage variances
  double wfwi_unweighted;    // within-firm inequality, equal firm weights
  double var_log_wage;
  double mean_log_wage;
};

// Closed-form two-way fixed-effects decomposition. Worker effects coincide
// with log utility and firm effects with log amenities, so no regression is
// ever run.
struct AkmReport {
  double var_wfe;
  double var_ffe;
  double two_cov;      // 2*Cov(WFE, FFE)
  double var_avg_wfe;  // variance of firm-average worker effects (= BFUI)
  double corr_wfe_ffe; // = rho^2
};

WelfareReport welfare_report(const Equilibrium& eq, const ModelParams& params);
WageReport wage_report(const Equilibrium& eq, const ModelParams& params);
MomentSet targeted_moments(const Equilibrium& eq, const ModelParams& params);
AkmReport akm_report(const Equilibrium& eq, const ModelParams& params);

// Firm-conditional moments at productivity theta.
struct ConditionalMoments {
  double e_x2;     // E(X^2 | theta)       = (sigma_x/sigma)^2 (1 + theta^2)
  double var_lnw;  // Var(ln W | theta)    = 0.5 (sigma_x/sigma)^2 (1 + 2 theta^2)
  double e_lnw;    // E(ln W | theta)
};

ConditionalMoments conditional_moments(double theta, const Equilibrium& eq,
                                       const ModelParams& params);

// Selectors for the comparative-statics machinery. The primitive order
// (sigma_theta, sigma_x, c_a, c_l) is the one used by the counterfactual
// tables.
enum class Primitive { SigmaTheta = 0, SigmaX = 1, CostAmenity = 2, CostSpan = 3 };

enum class Outcome {
  Sigma,
  VarU,
  Bfui,
  Wfui,
  BfuiShare,
  VarW,
  Bfwi,
  BfwiShare,
  Wfwi,
  MeanLogWage,
};

inline constexpr Primitive kPrimitives[4] = {
    Primitive::SigmaTheta, Primitive::SigmaX, Primitive::CostAmenity,
    Primitive::CostSpan};

const char* primitive_name(Primitive p);
double get_primitive(const ModelParams& params, Primitive p);
void set_primitive(ModelParams& params, Primitive p, double value);

// Solves the model at `params` and evaluates one outcome.
double evaluate_outcome(const ModelParams& params, Outcome outcome);

// Central finite difference of an outcome with respect to one primitive.
// step is absolute; callers usually pass 1e-5 * parameter magnitude.
double finite_diff_sensitivity(const ModelParams& params, Outcome outcome,
                               Primitive p, double step);

}  // namespace sorteq
