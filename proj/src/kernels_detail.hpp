#pragma once

// Pack-generic batched evaluators, included by each kernel translation unit.
// The arithmetic mirrors the scalar jet ops expression-for-expression so that
// every kernel produces bitwise identical lanes (no FMA, per-lane libm tanh).

#include <cassert>
#include <cstddef>

#include "pinnev/kernels.hpp"

namespace pinnev::kernels::detail {

template <class P, int ORDER>
struct JetP {
  P c[ORDER + 1];
};

template <class P, int ORDER>
inline JetP<P, ORDER> jp_const(P x) {
  JetP<P, ORDER> r;
  r.c[0] = x;
  for (int k = 1; k <= ORDER; ++k) r.c[k] = P::bcast(0.0);
  return r;
}

template <class P, int ORDER>
inline void jp_axpy(JetP<P, ORDER>& acc, P s, const JetP<P, ORDER>& x) {
  for (int k = 0; k <= ORDER; ++k) acc.c[k] = acc.c[k] + s * x.c[k];
}

template <class P, int ORDER>
inline JetP<P, ORDER> jp_mul(const JetP<P, ORDER>& a, const JetP<P, ORDER>& b) {
  JetP<P, ORDER> r;
  r.c[0] = a.c[0] * b.c[0];
  if constexpr (ORDER >= 1) r.c[1] = a.c[1] * b.c[0] + a.c[0] * b.c[1];
  if constexpr (ORDER >= 2)
    r.c[2] = a.c[2] * b.c[0] + P::bcast(2.0) * a.c[1] * b.c[1] +
             a.c[0] * b.c[2];
  if constexpr (ORDER >= 3)
    r.c[3] = a.c[3] * b.c[0] + P::bcast(3.0) * a.c[2] * b.c[1] +
             P::bcast(3.0) * a.c[1] * b.c[2] + a.c[0] * b.c[3];
  return r;
}

template <class P, int ORDER>
inline JetP<P, ORDER> jp_sub(const JetP<P, ORDER>& a, const JetP<P, ORDER>& b) {
  JetP<P, ORDER> r;
  for (int k = 0; k <= ORDER; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

template <class P, int ORDER>
inline JetP<P, ORDER> jp_tanh(const JetP<P, ORDER>& u) {
  const P t = P::tanh_lanes(u.c[0]);
  const P s = P::bcast(1.0) - t * t;
  JetP<P, ORDER> r;
  r.c[0] = t;
  if constexpr (ORDER >= 1) r.c[1] = s * u.c[1];
  if constexpr (ORDER >= 2) {
    const P f2 = P::bcast(-2.0) * t * s;
    r.c[2] = f2 * u.c[1] * u.c[1] + s * u.c[2];
    if constexpr (ORDER >= 3) {
      const P f3 =
          P::bcast(-2.0) * s * (P::bcast(1.0) - P::bcast(3.0) * t * t);
      r.c[3] = f3 * u.c[1] * u.c[1] * u.c[1] + P::bcast(3.0) * f2 * u.c[1] * u.c[2] +
               s * u.c[3];
    }
  }
  return r;
}

// Jet of tanh'(pre-activation) = 1 - tanh(u)^2 as a full jet in the seed
// variable, needed to push tangents through saturating nodes.
template <class P, int ORDER>
inline JetP<P, ORDER> jp_tanh_deriv(const JetP<P, ORDER>& tanh_jet) {
  JetP<P, ORDER> one = jp_const<P, ORDER>(P::bcast(1.0));
  return jp_sub(one, jp_mul(tanh_jet, tanh_jet));
}

template <class P, int ORDER>
void eval_jets_impl(const NetPlan& plan, const double* w, const BatchView& in,
                    int seed_var, JetsOut& out) {
  const std::size_t n_pad = padded(in.n);
  assert(out.n_pad >= n_pad && out.n_out == plan.output_dim &&
         out.n_comp == ORDER + 1);
  JetP<P, ORDER> buf_a[kMaxWidth], buf_b[kMaxWidth];
  for (std::size_t base = 0; base < n_pad; base += P::width) {
    JetP<P, ORDER>* cur = buf_a;
    JetP<P, ORDER>* nxt = buf_b;
    for (int i = 0; i < plan.input_dim; ++i) {
      cur[i] = jp_const<P, ORDER>(P::load(in.coords[i] + base));
      cur[i].c[1] = P::bcast(i == seed_var ? 1.0 : 0.0);
    }
    for (const auto& L : plan.layers) {
      for (int j = 0; j < L.fan_out; ++j) {
        JetP<P, ORDER> acc =
            jp_const<P, ORDER>(P::bcast(L.b_off >= 0 ? w[L.b_off + j] : 0.0));
        const double* wrow = w + L.w_off + static_cast<std::size_t>(j) * L.fan_in;
        for (int i = 0; i < L.fan_in; ++i)
          jp_axpy(acc, P::bcast(wrow[i]), cur[i]);
        nxt[j] = L.tanh_act ? jp_tanh(acc) : acc;
      }
      std::swap(cur, nxt);
    }
    for (int o = 0; o < plan.output_dim; ++o)
      for (int k = 0; k <= ORDER; ++k) cur[o].c[k].store(out.at(o, k) + base);
  }
}

template <class P, int ORDER>
void eval_jets_grad_impl(const NetPlan& plan, const double* w,
                         const BatchView& in, int seed_var, JetsOut& out,
                         TangentsOut& tan) {
  const std::size_t n_pad = padded(in.n);
  const int n_layers = static_cast<int>(plan.layers.size());
  assert(n_layers <= 6 && tan.n_dirs == plan.n_params &&
         tan.n_comp == ORDER + 1);
  JetP<P, ORDER> acts[7][kMaxWidth];  // acts[0] = inputs, acts[l+1] = layer l
  JetP<P, ORDER> dact[6][kMaxWidth];  // jet of tanh'(u) per saturating node
  JetP<P, ORDER> buf_a[kMaxWidth], buf_b[kMaxWidth];
  const JetP<P, ORDER> zero = jp_const<P, ORDER>(P::bcast(0.0));
  const JetP<P, ORDER> unit = jp_const<P, ORDER>(P::bcast(1.0));

  for (std::size_t base = 0; base < n_pad; base += P::width) {
    for (int i = 0; i < plan.input_dim; ++i) {
      acts[0][i] = jp_const<P, ORDER>(P::load(in.coords[i] + base));
      acts[0][i].c[1] = P::bcast(i == seed_var ? 1.0 : 0.0);
    }
    for (int l = 0; l < n_layers; ++l) {
      const auto& L = plan.layers[l];
      for (int j = 0; j < L.fan_out; ++j) {
        JetP<P, ORDER> acc =
            jp_const<P, ORDER>(P::bcast(L.b_off >= 0 ? w[L.b_off + j] : 0.0));
        const double* wrow = w + L.w_off + static_cast<std::size_t>(j) * L.fan_in;
        for (int i = 0; i < L.fan_in; ++i)
          jp_axpy(acc, P::bcast(wrow[i]), acts[l][i]);
        if (L.tanh_act) {
          acts[l + 1][j] = jp_tanh(acc);
          dact[l][j] = jp_tanh_deriv(acts[l + 1][j]);
        } else {
          acts[l + 1][j] = acc;
        }
      }
    }
    for (int o = 0; o < plan.output_dim; ++o)
      for (int k = 0; k <= ORDER; ++k)
        acts[n_layers][o].c[k].store(out.at(o, k) + base);

    // One forward tangent pass per parameter, in packing order. A direction
    // owned by layer l0 has zero tangent upstream of l0, so propagation
    // starts there.
    int dir = 0;
    auto run_tangent = [&](int l0, int j0, const JetP<P, ORDER>& seed_jet) {
      JetP<P, ORDER>* t_cur = buf_a;
      JetP<P, ORDER>* t_nxt = buf_b;
      const auto& L0 = plan.layers[l0];
      for (int j = 0; j < L0.fan_out; ++j) t_cur[j] = zero;
      t_cur[j0] = L0.tanh_act ? jp_mul(seed_jet, dact[l0][j0]) : seed_jet;
      for (int l = l0 + 1; l < n_layers; ++l) {
        const auto& L = plan.layers[l];
        for (int j = 0; j < L.fan_out; ++j) {
          JetP<P, ORDER> acc = zero;
          const double* wrow =
              w + L.w_off + static_cast<std::size_t>(j) * L.fan_in;
          for (int i = 0; i < L.fan_in; ++i)
            jp_axpy(acc, P::bcast(wrow[i]), t_cur[i]);
          t_nxt[j] = L.tanh_act ? jp_mul(acc, dact[l][j]) : acc;
        }
        std::swap(t_cur, t_nxt);
      }
      for (int o = 0; o < plan.output_dim; ++o)
        for (int k = 0; k <= ORDER; ++k)
          t_cur[o].c[k].store(tan.at(o, dir, k) + base);
      ++dir;
    };
    for (int l0 = 0; l0 < n_layers; ++l0) {
      const auto& L0 = plan.layers[l0];
      for (int j0 = 0; j0 < L0.fan_out; ++j0)
        for (int i0 = 0; i0 < L0.fan_in; ++i0)
          run_tangent(l0, j0, acts[l0][i0]);
      if (L0.b_off >= 0)
        for (int j0 = 0; j0 < L0.fan_out; ++j0) run_tangent(l0, j0, unit);
    }
    assert(dir == plan.n_params);
  }
}

template <class P>
void eval_jets_any(const NetPlan& plan, const double* w, const BatchView& in,
                   int seed_var, int order, JetsOut& out) {
  switch (order) {
    case 1: eval_jets_impl<P, 1>(plan, w, in, seed_var, out); break;
    case 2: eval_jets_impl<P, 2>(plan, w, in, seed_var, out); break;
    case 3: eval_jets_impl<P, 3>(plan, w, in, seed_var, out); break;
    default: assert(false);
  }
}

template <class P>
void eval_jets_grad_any(const NetPlan& plan, const double* w,
                        const BatchView& in, int seed_var, int order,
                        JetsOut& out, TangentsOut& tan) {
  switch (order) {
    case 1: eval_jets_grad_impl<P, 1>(plan, w, in, seed_var, out, tan); break;
    case 2: eval_jets_grad_impl<P, 2>(plan, w, in, seed_var, out, tan); break;
    case 3: eval_jets_grad_impl<P, 3>(plan, w, in, seed_var, out, tan); break;
    default: assert(false);
  }
}

}  // namespace pinnev::kernels::detail
