#include "pinnev/network.hpp"

#include <cassert>
#include <stdexcept>

namespace pinnev {

bool NetworkSpec::chain_valid() const {
  if (layers.empty()) return false;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    if (layers[l].fan_out != layers[l + 1].fan_in) return false;
  for (const auto& L : layers)
    if (L.fan_in <= 0 || L.fan_out <= 0) return false;
  return true;
}

int NetworkSpec::max_width() const {
  int w = input_dim();
  for (const auto& L : layers) w = std::max(w, L.fan_out);
  return w;
}

int param_count(const NetworkSpec& spec) {
  int n = 0;
  for (const auto& L : spec.layers)
    n += L.fan_in * L.fan_out + (L.has_bias ? L.fan_out : 0);
  return n;
}

int layer_weight_offset(const NetworkSpec& spec, int layer) {
  int off = 0;
  for (int l = 0; l < layer; ++l) {
    const auto& L = spec.layers[l];
    off += L.fan_in * L.fan_out + (L.has_bias ? L.fan_out : 0);
  }
  return off;
}

int layer_bias_offset(const NetworkSpec& spec, int layer) {
  if (!spec.layers[layer].has_bias) return -1;
  const auto& L = spec.layers[layer];
  return layer_weight_offset(spec, layer) + L.fan_in * L.fan_out;
}

NetworkSpec net_conv_diff() {
  return {{{1, 5, true, Activation::Tanh},
           {5, 5, true, Activation::Tanh},
           {5, 1, false, Activation::Linear}}};
}

NetworkSpec net_projectile() {
  return {{{1, 3, true, Activation::Tanh},
           {3, 3, true, Activation::Tanh},
           {3, 3, true, Activation::Tanh},
           {3, 3, false, Activation::Linear},
           {3, 2, false, Activation::Linear}}};
}

NetworkSpec net_burgers() {
  return {{{2, 4, true, Activation::Tanh},
           {4, 4, true, Activation::Tanh},
           {4, 4, true, Activation::Tanh},
           {4, 1, false, Activation::Linear}}};
}

NetworkSpec net_kdv() {
  return {{{2, 4, true, Activation::Tanh},
           {4, 4, true, Activation::Tanh},
           {4, 4, true, Activation::Tanh},
           {4, 4, false, Activation::Linear},
           {4, 1, false, Activation::Linear}}};
}

std::vector<double> forward(const NetworkSpec& spec,
                            const std::vector<double>& w,
                            const std::vector<double>& inputs) {
  assert(static_cast<int>(w.size()) == param_count(spec));
  assert(static_cast<int>(inputs.size()) == spec.input_dim());
  std::vector<double> cur = inputs;
  std::vector<double> next;
  int off = 0;
  for (const auto& L : spec.layers) {
    next.assign(L.fan_out, 0.0);
    const int w_off = off;
    const int b_off = w_off + L.fan_in * L.fan_out;
    for (int j = 0; j < L.fan_out; ++j) {
      double acc = L.has_bias ? w[b_off + j] : 0.0;
      for (int i = 0; i < L.fan_in; ++i) acc += w[w_off + j * L.fan_in + i] * cur[i];
      next[j] = L.activation == Activation::Tanh ? std::tanh(acc) : acc;
    }
    off = b_off + (L.has_bias ? L.fan_out : 0);
    cur.swap(next);
  }
  return cur;
}

std::vector<Jet> forward_jet(const NetworkSpec& spec,
                             const std::vector<double>& w,
                             const std::vector<Jet>& inputs) {
  assert(static_cast<int>(w.size()) == param_count(spec));
  assert(static_cast<int>(inputs.size()) == spec.input_dim());
#ifndef NDEBUG
  {
    int seeded = 0;
    for (const auto& j : inputs)
      if (j.v1 == 1.0 && j.v2 == 0.0 && j.v3 == 0.0)
        ++seeded;
      else
        assert(j.v1 == 0.0 && j.v2 == 0.0 && j.v3 == 0.0);
    assert(seeded == 1);
  }
#endif
  std::vector<Jet> cur = inputs;
  std::vector<Jet> next;
  int off = 0;
  for (const auto& L : spec.layers) {
    next.assign(L.fan_out, Jet{});
    const int w_off = off;
    const int b_off = w_off + L.fan_in * L.fan_out;
    for (int j = 0; j < L.fan_out; ++j) {
      Jet acc = L.has_bias ? jet_const(w[b_off + j]) : jet_const(0.0);
      for (int i = 0; i < L.fan_in; ++i)
        acc = jet_add(acc, jet_scale(cur[i], w[w_off + j * L.fan_in + i]));
      next[j] = L.activation == Activation::Tanh ? jet_tanh(acc) : acc;
    }
    off = b_off + (L.has_bias ? L.fan_out : 0);
    cur.swap(next);
  }
  return cur;
}

std::string describe(const NetworkSpec& spec) {
  std::string s = std::to_string(spec.input_dim());
  for (const auto& L : spec.layers) {
    s += "-" + std::to_string(L.fan_out);
    s += L.activation == Activation::Tanh ? "t" : "l";
    if (!L.has_bias) s += "nb";
  }
  return s;
}

}  // namespace pinnev
