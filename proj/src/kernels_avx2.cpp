#include "sorteq/kernels.hpp"

#if defined(SORTEQ_HAVE_AVX2)

#include <immintrin.h>

// AVX2 variants. Lane k of each accumulator matches partial sum k of the
// scalar reference, and explicit mul/add (never FMA) keeps the elementwise
// transform bit-identical to it.

namespace sorteq::kernels {
namespace {

inline double reduce_lanes(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double total = reduce_lanes(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

DevSums dev_sums_avx2(const double* x, std::size_t n, double center) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d a = _mm256_setzero_pd();
  __m256d b = _mm256_setzero_pd();
  __m256d q4 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    const __m256d q = _mm256_mul_pd(d, d);
    a = _mm256_add_pd(a, d);
    b = _mm256_add_pd(b, q);
    q4 = _mm256_add_pd(q4, _mm256_mul_pd(q, q));
  }
  DevSums out{reduce_lanes(a), reduce_lanes(b), reduce_lanes(q4)};
  for (; i < n; ++i) {
    const double d = x[i] - center;
    const double q = d * d;
    out.d1 += d;
    out.d2 += q;
    out.d4 += q * q;
  }
  return out;
}

void skill_wage_avx2(const double* h, std::size_t n, double s, double a,
                     double b, double* xo, double* wo) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_mul_pd(vs, _mm256_loadu_pd(h + i));
    _mm256_storeu_pd(xo + i, xv);
    const __m256d wv =
        _mm256_add_pd(_mm256_mul_pd(va, _mm256_mul_pd(xv, xv)), vb);
    _mm256_storeu_pd(wo + i, wv);
  }
  for (; i < n; ++i) {
    const double xv = s * h[i];
    xo[i] = xv;
    wo[i] = a * (xv * xv) + b;
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops{sum_avx2, dev_sums_avx2, skill_wage_avx2, "avx2"};
  return ops;
}

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

}  // namespace sorteq::kernels

#endif  // SORTEQ_HAVE_AVX2
