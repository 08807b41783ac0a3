#include "sorteq/kernels.hpp"

// Reference kernels. Reductions run four interleaved partial sums so the
// AVX2 variant (one partial per lane) produces bit-identical results.

namespace sorteq::kernels {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i];
    s1 += x[i + 1];
    s2 += x[i + 2];
    s3 += x[i + 3];
  }
  double total = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) total += x[i];
  return total;
}

DevSums dev_sums_scalar(const double* x, std::size_t n, double center) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;  // d
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0;  // d^2
  double c0 = 0, c1 = 0, c2 = 0, c3 = 0;  // d^4
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = x[i] - center, d1 = x[i + 1] - center;
    const double d2 = x[i + 2] - center, d3 = x[i + 3] - center;
    const double q0 = d0 * d0, q1 = d1 * d1, q2 = d2 * d2, q3 = d3 * d3;
    a0 += d0; a1 += d1; a2 += d2; a3 += d3;
    b0 += q0; b1 += q1; b2 += q2; b3 += q3;
    c0 += q0 * q0; c1 += q1 * q1; c2 += q2 * q2; c3 += q3 * q3;
  }
  DevSums out{(a0 + a1) + (a2 + a3), (b0 + b1) + (b2 + b3),
              (c0 + c1) + (c2 + c3)};
  for (; i < n; ++i) {
    const double d = x[i] - center;
    const double q = d * d;
    out.d1 += d;
    out.d2 += q;
    out.d4 += q * q;
  }
  return out;
}

void skill_wage_scalar(const double* h, std::size_t n, double s, double a,
                       double b, double* xo, double* wo) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xv = s * h[i];
    xo[i] = xv;
    wo[i] = a * (xv * xv) + b;
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{sum_scalar, dev_sums_scalar, skill_wage_scalar, "scalar"};
  return ops;
}

}  // namespace sorteq::kernels
