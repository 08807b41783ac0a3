#pragma once

#include <stdexcept>

namespace sorteq {

// The five exogenous primitives of the sorting economy.
struct ModelParams {
  double sigma_x;      // std. dev. of worker skill
  double sigma_theta;  // std. dev. of firm productivity
  double c_a;          // convexity of the amenity-provision cost
  double c_l;          // convexity of the span-of-control cost
  double ln_A = 0.0;   // log total factor productivity

  // alpha = (1+c_a)/(c_l*c_a), the cost composite the job supply depends on.
  double alpha() const { return (1.0 + c_a) / (c_l * c_a); }

  // Throws std::domain_error unless all primitives are finite and the four
  // cost/dispersion parameters are strictly positive.
  void validate() const;
};

// Solved endogenous state. All downstream closed forms are functions of this
// plus the primitives.
struct Equilibrium {
  double sigma;     // std. dev. of the equilibrium job distribution
  double alpha;     // (1+c_a)/(c_l*c_a)
  double rho_sq;    // sorting strength Corr(X^2, thetabar^2) = 1 - 1/sigma^2
  double ln_u0;     // log utility of the skill-0 worker
  double l_star_0;  // size of the theta = 0 firm
  double b_const;   // non-stochastic log-wage intercept
};

struct SolveOptions {
  int max_bracket_doublings = 200;
  double exp_cap = 700.0;  // overflow guard for exp() in size/profit
};

// Inverse map from the job-supply level to the cost composite:
//   alpha = (sigma/sigma_x - 1) * (1/sigma_theta^2 - 1/(sigma^2 - 1)).
// Strictly increasing in sigma on sigma > max(sigma_x, sqrt(1+sigma_theta^2)).
// Throws std::domain_error when sigma <= 1 or sigma < sigma_x.
double inverse_alpha(double sigma, double sigma_x, double sigma_theta);

// Solves the equilibrium fixed point for sigma by bracketed bisection refined
// with safeguarded Newton on the strictly increasing inverse map, then fills
// in the remaining closed-form objects.
Equilibrium solve_equilibrium(const ModelParams& params,
                              const SolveOptions& opts = {});

// Worker of skill mu(h) fills job h: mu(h) = (sigma_x/sigma)*h.
double assignment_mu(double h, const Equilibrium& eq, const ModelParams& params);

// ln u(x) = (sigma/sigma_x)*x^2/2 + ln u(0).
double log_utility(double x, const Equilibrium& eq, const ModelParams& params);

// ln L*(theta) = ln L*(0) + alpha*theta^2 / (2*(sigma/sigma_x - 1)).
double log_firm_size(double theta, const Equilibrium& eq, const ModelParams& params);

// L*(theta); throws std::overflow_error if the exponent exceeds opts.exp_cap.
double firm_size(double theta, const Equilibrium& eq, const ModelParams& params,
                 const SolveOptions& opts = {});

// ln a*(theta): log of the profit-maximising amenity level.
double log_amenity(double theta, const Equilibrium& eq, const ModelParams& params);

// ln e*(x,theta) from the effort first-order condition:
//   2 ln A + (sigma/sigma_x) x^2 + 2 ln a*(theta) - 2 ln u(x) - ln 4.
double log_effort(double x, double theta, const Equilibrium& eq,
                  const ModelParams& params);

// ln w(x,theta) = (sigma/(2 sigma_x)) x^2
//               + theta^2 / (2 c_a (sigma/sigma_x - 1)) + B.
double log_wage(double x, double theta, const Equilibrium& eq,
                const ModelParams& params);

// Maximised profit r(theta) = c_l * L*(theta)^(1+c_l); same overflow guard
// as firm_size.
double firm_profit(double theta, const Equilibrium& eq, const ModelParams& params,
                   const SolveOptions& opts = {});

// The equilibrium job density evaluated as the numerical mixture integral
//   f(h) = int L*(theta) phi(h-theta) phi(theta/sigma_theta)/sigma_theta dtheta.
// In equilibrium this equals phi(h/sigma)/sigma; evaluating the integral is
// the normality verification. Throws std::runtime_error on quadrature failure.
double job_density(double h, const Equilibrium& eq, const ModelParams& params,
                   double abs_tol = 1e-11);

// Shared coefficients of the log-wage plane. Both the closed-form log_wage
// and the panel simulator derive wages from this one struct so that stored
// and recomputed wages agree bit for bit.
struct WageCoeffs {
  double skill_scale;  // sigma_x/sigma:  x = skill_scale * h
  double worker_coef;  // sigma/(2 sigma_x), multiplies x^2
  double firm_coef;    // 1/(2 c_a (sigma/sigma_x - 1)), multiplies theta^2
  double intercept;    // B

  double firm_component(double theta) const {
    return firm_coef * (theta * theta) + intercept;
  }
  double wage(double x, double theta) const {
    return worker_coef * (x * x) + firm_component(theta);
  }
};

WageCoeffs wage_coeffs(const Equilibrium& eq, const ModelParams& params);

}  // namespace sorteq
