#include "pinnev/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace pinnev::kernels {

NetPlan compile(const NetworkSpec& spec) {
  if (!spec.chain_valid()) throw std::invalid_argument("invalid network spec");
  if (spec.max_width() > kMaxWidth)
    throw std::invalid_argument("network too wide for batched evaluators");
  NetPlan plan;
  plan.input_dim = spec.input_dim();
  plan.output_dim = spec.output_dim();
  plan.n_params = param_count(spec);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& L = spec.layers[l];
    NetPlan::Layer out;
    out.fan_in = L.fan_in;
    out.fan_out = L.fan_out;
    out.w_off = layer_weight_offset(spec, static_cast<int>(l));
    out.b_off = layer_bias_offset(spec, static_cast<int>(l));
    out.tanh_act = L.activation == Activation::Tanh;
    plan.layers.push_back(out);
  }
  return plan;
}

namespace {
std::atomic<const Kernel*> g_active{nullptr};

const Kernel* pick_default() {
  if (const Kernel* k = avx2_kernel()) return k;
  return &scalar_kernel();
}
}  // namespace

const Kernel& active_kernel() {
  const Kernel* k = g_active.load(std::memory_order_acquire);
  if (!k) {
    k = pick_default();
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

bool set_active_kernel(const std::string& name) {
  if (name == "scalar") {
    g_active.store(&scalar_kernel(), std::memory_order_release);
    return true;
  }
  if (name == "avx2") {
    if (const Kernel* k = avx2_kernel()) {
      g_active.store(k, std::memory_order_release);
      return true;
    }
    return false;
  }
  return false;
}

std::vector<std::string> available_kernels() {
  std::vector<std::string> v{"scalar"};
  if (avx2_kernel()) v.push_back("avx2");
  return v;
}

}  // namespace pinnev::kernels
