#pragma once

#include <cstddef>

// Data-parallel inner loops used by the panel simulator and the moment
// estimators. Each kernel has a scalar reference implementation and, on
// x86-64, an AVX2 variant selected once at runtime. Both variants accumulate
// through the same four interleaved partial sums (lane k holds x[k], x[k+4],
// ...; lanes combine as (s0+s1)+(s2+s3), then the tail is added in order), so
// scalar and AVX2 reductions are bit-identical, not merely close.
// The elementwise transform performs the same rounded operations in the same
// order in both variants and never contracts to FMA.

namespace sorteq::kernels {

struct DevSums {
  double d1;  // sum of (x - center)
  double d2;  // sum of (x - center)^2
  double d4;  // sum of (x - center)^4
};

struct Ops {
  // Plain sum of x[0..n).
  double (*sum)(const double* x, std::size_t n);
  // Centered power sums about `center` in one sweep.
  DevSums (*dev_sums)(const double* x, std::size_t n, double center);
  // xo[i] = s*h[i]; wo[i] = a*(xo[i]*xo[i]) + b.  xo/wo may not alias h.
  void (*skill_wage_transform)(const double* h, std::size_t n, double s,
                               double a, double b, double* xo, double* wo);
  const char* name;
};

const Ops& scalar_ops();

#if defined(SORTEQ_HAVE_AVX2)
const Ops& avx2_ops();
bool avx2_supported();
#endif

// Dispatched implementation: AVX2 when the CPU supports it, unless the
// environment variable SORTEQ_KERNEL=scalar forces the reference path.
// The choice is made once and cached.
const Ops& active();

inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline DevSums dev_sums(const double* x, std::size_t n, double center) {
  return active().dev_sums(x, n, center);
}
inline void skill_wage_transform(const double* h, std::size_t n, double s,
                                 double a, double b, double* xo, double* wo) {
  active().skill_wage_transform(h, n, s, a, b, xo, wo);
}

}  // namespace sorteq::kernels
