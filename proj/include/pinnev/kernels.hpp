#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pinnev/network.hpp"

namespace pinnev::kernels {

// All point buffers are padded to a multiple of kPad so wide kernels can
// process full packs; pad slots replicate real points and are ignored by
// consumers.
inline constexpr std::size_t kPad = 4;
inline std::size_t padded(std::size_t n) { return (n + kPad - 1) / kPad * kPad; }

inline constexpr int kMaxWidth = 8;  // widest supported layer

// Network compiled to flat offsets for the batched evaluators.
struct NetPlan {
  struct Layer {
    int fan_in = 0;
    int fan_out = 0;
    int w_off = 0;
    int b_off = -1;  // -1: no bias
    bool tanh_act = false;
  };
  std::vector<Layer> layers;
  int input_dim = 0;
  int output_dim = 0;
  int n_params = 0;
};

NetPlan compile(const NetworkSpec& spec);

// Structure-of-arrays view of a point batch: coords[i] points at the i-th
// input coordinate array, each of length >= padded(n).
struct BatchView {
  const double* const* coords;
  int input_dim;
  std::size_t n;
};

// Output jets, one array of length n_pad per (output, component).
struct JetsOut {
  double* data = nullptr;
  std::size_t n_pad = 0;
  int n_out = 0;
  int n_comp = 0;  // truncation order + 1
  double* at(int out, int comp) {
    return data + (static_cast<std::size_t>(out) * n_comp + comp) * n_pad;
  }
  const double* at(int out, int comp) const {
    return data + (static_cast<std::size_t>(out) * n_comp + comp) * n_pad;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(n_out) * n_comp * n_pad;
  }
};

// Per-weight directional derivatives of the output jets (forward tangents),
// laid out [output][direction][component][point].
struct TangentsOut {
  double* data = nullptr;
  std::size_t n_pad = 0;
  int n_out = 0;
  int n_dirs = 0;
  int n_comp = 0;
  double* at(int out, int dir, int comp) {
    return data +
           ((static_cast<std::size_t>(out) * n_dirs + dir) * n_comp + comp) *
               n_pad;
  }
  const double* at(int out, int dir, int comp) const {
    return data +
           ((static_cast<std::size_t>(out) * n_dirs + dir) * n_comp + comp) *
               n_pad;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(n_out) * n_dirs * n_comp * n_pad;
  }
};

// order in {1, 2, 3}: highest derivative carried through the pass.
struct Kernel {
  const char* name;
  void (*eval_jets)(const NetPlan&, const double* w, const BatchView&,
                    int seed_var, int order, JetsOut&);
  void (*eval_jets_grad)(const NetPlan&, const double* w, const BatchView&,
                         int seed_var, int order, JetsOut&, TangentsOut&);
};

const Kernel& scalar_kernel();
const Kernel* avx2_kernel();  // nullptr when unavailable

const Kernel& active_kernel();
bool set_active_kernel(const std::string& name);
std::vector<std::string> available_kernels();

}  // namespace pinnev::kernels
