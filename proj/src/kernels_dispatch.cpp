#include <cstdlib>
#include <cstring>

#include "sorteq/kernels.hpp"

namespace sorteq::kernels {

static const Ops& pick() {
  if (const char* env = std::getenv("SORTEQ_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return scalar_ops();
#if defined(SORTEQ_HAVE_AVX2)
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return avx2_ops();
#endif
  }
#if defined(SORTEQ_HAVE_AVX2)
  if (avx2_supported()) return avx2_ops();
#endif
  return scalar_ops();
}

const Ops& active() {
  static const Ops& ops = pick();
  return ops;
}

}  // namespace sorteq::kernels
