// Compiled with -mavx2 (and without -mfma: lane arithmetic must round
// exactly like the scalar kernel). tanh goes through libm per lane for the
// same reason.

#include <cmath>

#include "kernels_detail.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace pinnev::kernels {

#if defined(__AVX2__)
namespace {

struct PackAvx2 {
  static constexpr std::size_t width = 4;
  __m256d v;
  static PackAvx2 load(const double* p) { return {_mm256_loadu_pd(p)}; }
  void store(double* p) const { _mm256_storeu_pd(p, v); }
  static PackAvx2 bcast(double x) { return {_mm256_set1_pd(x)}; }
  static PackAvx2 tanh_lanes(PackAvx2 a) {
    alignas(32) double t[4];
    _mm256_store_pd(t, a.v);
    for (double& x : t) x = std::tanh(x);
    return {_mm256_load_pd(t)};
  }
  friend PackAvx2 operator+(PackAvx2 a, PackAvx2 b) {
    return {_mm256_add_pd(a.v, b.v)};
  }
  friend PackAvx2 operator-(PackAvx2 a, PackAvx2 b) {
    return {_mm256_sub_pd(a.v, b.v)};
  }
  friend PackAvx2 operator*(PackAvx2 a, PackAvx2 b) {
    return {_mm256_mul_pd(a.v, b.v)};
  }
};

void eval_jets(const NetPlan& plan, const double* w, const BatchView& in,
               int seed_var, int order, JetsOut& out) {
  detail::eval_jets_any<PackAvx2>(plan, w, in, seed_var, order, out);
}

void eval_jets_grad(const NetPlan& plan, const double* w, const BatchView& in,
                    int seed_var, int order, JetsOut& out, TangentsOut& tan) {
  detail::eval_jets_grad_any<PackAvx2>(plan, w, in, seed_var, order, out, tan);
}

}  // namespace

const Kernel* avx2_kernel() {
  static const Kernel k{"avx2", eval_jets, eval_jets_grad};
  return __builtin_cpu_supports("avx2") ? &k : nullptr;
}

#else

const Kernel* avx2_kernel() { return nullptr; }

#endif

}  // namespace pinnev::kernels
