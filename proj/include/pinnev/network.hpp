#pragma once

#include <string>
#include <vector>

#include "pinnev/jet.hpp"

namespace pinnev {

enum class Activation { Tanh, Linear };

struct LayerSpec {
  int fan_in = 0;
  int fan_out = 0;
  bool has_bias = true;
  Activation activation = Activation::Tanh;
};

// Dense feed-forward network. The flat weight vector is packed layer by
// layer: the weight matrix in output-neuron-major (row-major) order, then the
// bias vector if present.
struct NetworkSpec {
  std::vector<LayerSpec> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().fan_in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().fan_out; }
  bool chain_valid() const;
  int max_width() const;
};

int param_count(const NetworkSpec& spec);
int layer_weight_offset(const NetworkSpec& spec, int layer);
int layer_bias_offset(const NetworkSpec& spec, int layer);  // -1 if no bias

NetworkSpec net_conv_diff();   // 1-5-5-1, 45 parameters
NetworkSpec net_projectile();  // 1-3-3-3-3-2, 45 parameters
NetworkSpec net_burgers();     // 2-4-4-4-1, 56 parameters
NetworkSpec net_kdv();         // 2-4-4-4-4-1, 72 parameters

std::vector<double> forward(const NetworkSpec& spec,
                            const std::vector<double>& w,
                            const std::vector<double>& inputs);

// Forward pass over jets. Exactly one input jet carries the seed (v1 == 1,
// v2 == v3 == 0); the rest must be constants.
std::vector<Jet> forward_jet(const NetworkSpec& spec,
                             const std::vector<double>& w,
                             const std::vector<Jet>& inputs);

std::string describe(const NetworkSpec& spec);

}  // namespace pinnev
