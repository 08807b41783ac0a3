#include "sorteq/model.hpp"

#include <cmath>
#include <string>

#include "sorteq/quadrature.hpp"

namespace sorteq {
namespace {

constexpr double kLn4 = 1.3862943611198906188344642429164;

double inverse_alpha_deriv(double sigma, double sigma_x, double sigma_theta) {
  const double s2m1 = sigma * sigma - 1.0;
  return (1.0 / sigma_x) * (1.0 / (sigma_theta * sigma_theta) - 1.0 / s2m1) +
         (sigma / sigma_x - 1.0) * (2.0 * sigma / (s2m1 * s2m1));
}

}  // namespace

void ModelParams::validate() const {
  const auto bad = [](double v) { return !std::isfinite(v); };
  if (bad(sigma_x) || bad(sigma_theta) || bad(c_a) || bad(c_l) || bad(ln_A))
    throw std::domain_error("model parameters must be finite");
  if (sigma_x <= 0) throw std::domain_error("sigma_x must be positive");
  if (sigma_theta <= 0) throw std::domain_error("sigma_theta must be positive");
  if (c_a <= 0) throw std::domain_error("c_a must be positive");
  if (c_l <= 0) throw std::domain_error("c_l must be positive");
}

double inverse_alpha(double sigma, double sigma_x, double sigma_theta) {
  if (!(sigma > 1.0))
    throw std::domain_error("inverse_alpha: sigma must exceed 1");
  if (sigma < sigma_x)
    throw std::domain_error("inverse_alpha: sigma must be at least sigma_x");
  return (sigma / sigma_x - 1.0) *
         (1.0 / (sigma_theta * sigma_theta) - 1.0 / (sigma * sigma - 1.0));
}

Equilibrium solve_equilibrium(const ModelParams& params, const SolveOptions& opts) {
  params.validate();
  const double sx = params.sigma_x;
  const double st = params.sigma_theta;
  const double alpha = params.alpha();

  // The root lives strictly above sigma_lo = max(sigma_x, sqrt(1+sigma_theta^2)),
  // where the inverse map rises from 0; it is strictly increasing there, so
  // the root is unique. (We only look in the class of normal job
  // distributions; that is where the model has its equilibrium.)
  const double sigma_lo = std::max(sx, std::sqrt(1.0 + st * st));
  double lo = sigma_lo + 1e-9;
  double hi = 2.0 * sigma_lo;
  const auto f = [&](double s) { return inverse_alpha(s, sx, st) - alpha; };
  int doublings = 0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (++doublings > opts.max_bracket_doublings)
      throw std::runtime_error(
          "solve_equilibrium: bracket expansion exceeded cap (" +
          std::to_string(opts.max_bracket_doublings) + " doublings)");
  }
  if (f(lo) > 0.0) lo = sigma_lo * (1.0 + 1e-15);

  // Safeguarded Newton: fall back to bisection whenever the Newton step
  // leaves the bracket. Iterate to machine precision; downstream round trips
  // need the alpha residual at ~1e-15 relative.
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    const double fs = f(s);
    if (fs == 0.0) break;
    if (fs > 0.0)
      hi = s;
    else
      lo = s;
    const double step = fs / inverse_alpha_deriv(s, sx, st);
    double next = s - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s) break;
    s = next;
  }
  // Close the bracket to adjacent doubles on the clear-denominator form of
  // the equilibrium condition, evaluated in extended precision:
  //   (sigma^2 - 1)(1 - alpha*st^2/(sigma/sx - 1)) - st^2 = 0.
  // This form stays well-conditioned both near the domain edge (where the
  // inverse map is nearly vertical) and at large sigma (where the plain
  // residual is nearly vertical), so the returned sigma is the representable
  // point closest to the root.
  const auto r2 = [&](double sig) -> long double {
    const long double st2 = static_cast<long double>(st) * st;
    const long double sl = sig;
    const long double d = 1.0L - static_cast<long double>(alpha) * st2 / (sl / sx - 1.0L);
    return (sl * sl - 1.0L) * d - st2;
  };
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (r2(mid) > 0.0L ? hi : lo) = mid;
  }
  const long double rlo = r2(lo), rhi = r2(hi);
  s = (rlo < 0 ? -rlo : rlo) <= (rhi < 0 ? -rhi : rhi) ? lo : hi;

  Equilibrium eq;
  eq.sigma = s;
  eq.alpha = alpha;
  eq.rho_sq = 1.0 - 1.0 / (s * s);
  eq.l_star_0 = std::sqrt(1.0 - alpha * st * st / (s / sx - 1.0));
  const double s2m1 = s * s - 1.0;
  eq.ln_u0 = 2.0 * params.ln_A - 0.5 * std::log1p(-sx / s) - kLn4 -
             (1.0 / alpha) * (std::log(st) - 0.5 * std::log(s2m1)) -
             (params.c_a / (1.0 + params.c_a)) * std::log1p(params.c_l);
  eq.b_const = eq.ln_u0 + std::log1p(1.0 / params.c_a) +
               (params.c_l / (1.0 + params.c_a)) *
                   (std::log(st) - 0.5 * std::log(s2m1) +
                    std::log1p(params.c_l) / params.c_l);
  return eq;
}

double assignment_mu(double h, const Equilibrium& eq, const ModelParams& params) {
  return (params.sigma_x / eq.sigma) * h;
}

double log_utility(double x, const Equilibrium& eq, const ModelParams& params) {
  return (eq.sigma / params.sigma_x) * x * x * 0.5 + eq.ln_u0;
}

double log_firm_size(double theta, const Equilibrium& eq, const ModelParams& params) {
  const double k = eq.alpha / (eq.sigma / params.sigma_x - 1.0);
  return std::log(eq.l_star_0) + 0.5 * k * theta * theta;
}

double firm_size(double theta, const Equilibrium& eq, const ModelParams& params,
                 const SolveOptions& opts) {
  const double ln_l = log_firm_size(theta, eq, params);
  if (ln_l > opts.exp_cap)
    throw std::overflow_error("firm_size: exponent " + std::to_string(ln_l) +
                              " exceeds cap " + std::to_string(opts.exp_cap));
  return std::exp(ln_l);
}

double log_amenity(double theta, const Equilibrium& eq, const ModelParams& params) {
  const double ln_r0 = 2.0 * params.ln_A - kLn4 - eq.ln_u0 -
                       0.5 * std::log1p(-params.sigma_x / eq.sigma);
  const double quad = theta * theta / (2.0 * (eq.sigma / params.sigma_x - 1.0));
  return std::log1p(1.0 / params.c_a) + (ln_r0 + quad) / params.c_a;
}

double log_effort(double x, double theta, const Equilibrium& eq,
                  const ModelParams& params) {
  return 2.0 * params.ln_A + (eq.sigma / params.sigma_x) * x * x +
         2.0 * log_amenity(theta, eq, params) - 2.0 * log_utility(x, eq, params) -
         kLn4;
}

WageCoeffs wage_coeffs(const Equilibrium& eq, const ModelParams& params) {
  WageCoeffs c;
  c.skill_scale = params.sigma_x / eq.sigma;
  c.worker_coef = eq.sigma / (2.0 * params.sigma_x);
  c.firm_coef = 1.0 / (2.0 * params.c_a * (eq.sigma / params.sigma_x - 1.0));
  c.intercept = eq.b_const;
  return c;
}

double log_wage(double x, double theta, const Equilibrium& eq,
                const ModelParams& params) {
  return wage_coeffs(eq, params).wage(x, theta);
}

double firm_profit(double theta, const Equilibrium& eq, const ModelParams& params,
                   const SolveOptions& opts) {
  const double ln_r =
      std::log(params.c_l) + (1.0 + params.c_l) * log_firm_size(theta, eq, params);
  if (ln_r > opts.exp_cap)
    throw std::overflow_error("firm_profit: exponent " + std::to_string(ln_r) +
                              " exceeds cap " + std::to_string(opts.exp_cap));
  return std::exp(ln_r);
}

double job_density(double h, const Equilibrium& eq, const ModelParams& params,
                   double abs_tol) {
  const double st = params.sigma_theta;
  const double k = eq.alpha / (eq.sigma / params.sigma_x - 1.0);
  const double ln_l0 = std::log(eq.l_star_0);
  // Integrand in log space; as a function of theta it is an unnormalised
  // Gaussian with precision p = 1/sigma_theta^2 + 1 - k.
  const double p = 1.0 / (st * st) + 1.0 - k;
  const double mean = h / p;
  const double sd = 1.0 / std::sqrt(p);
  const auto integrand = [&](double theta) {
    const double d = h - theta;
    const double z = theta / st;
    const double ln_val = ln_l0 + 0.5 * k * theta * theta - 0.5 * d * d -
                          0.5 * z * z -
                          std::log(st) - 1.8378770664093454835606594728112;
    return std::exp(ln_val);
  };
  // ln(2*pi) above accounts for both normal densities' constants.
  const QuadResult q =
      integrate(integrand, mean - 12.0 * sd, mean + 12.0 * sd, abs_tol, 1e-12);
  return q.value;
}

}  // namespace sorteq
