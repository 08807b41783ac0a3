#pragma once

#include <functional>

namespace sorteq {

struct QuadResult {
  double value;
  double abs_error;  // estimated
  int evaluations;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a,b]. Splits the worst interval until
// the summed error estimate meets max(abs_tol, rel_tol*|value|) or the
// interval budget is exhausted, in which case it throws std::runtime_error.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-12, double rel_tol = 1e-12,
                     int max_intervals = 4000);

double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace sorteq
