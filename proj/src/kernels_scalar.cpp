#include <cmath>

#include "kernels_detail.hpp"

namespace pinnev::kernels {
namespace {

struct PackD {
  static constexpr std::size_t width = 1;
  double v;
  static PackD load(const double* p) { return {*p}; }
  void store(double* p) const { *p = v; }
  static PackD bcast(double x) { return {x}; }
  static PackD tanh_lanes(PackD a) { return {std::tanh(a.v)}; }
  friend PackD operator+(PackD a, PackD b) { return {a.v + b.v}; }
  friend PackD operator-(PackD a, PackD b) { return {a.v - b.v}; }
  friend PackD operator*(PackD a, PackD b) { return {a.v * b.v}; }
};

void eval_jets(const NetPlan& plan, const double* w, const BatchView& in,
               int seed_var, int order, JetsOut& out) {
  detail::eval_jets_any<PackD>(plan, w, in, seed_var, order, out);
}

void eval_jets_grad(const NetPlan& plan, const double* w, const BatchView& in,
                    int seed_var, int order, JetsOut& out, TangentsOut& tan) {
  detail::eval_jets_grad_any<PackD>(plan, w, in, seed_var, order, out, tan);
}

}  // namespace

const Kernel& scalar_kernel() {
  static const Kernel k{"scalar", eval_jets, eval_jets_grad};
  return k;
}

}  // namespace pinnev::kernels
