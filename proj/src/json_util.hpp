#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "pinnev/network.hpp"

namespace pinnev::detail {

// Doubles cross JSON as %.17g decimal strings: shortest form that survives a
// round trip bit-for-bit, and strtod handles "inf"/"nan" spellings too.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse17(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string())
    throw std::runtime_error(std::string("expected a number for ") + what);
  const std::string& s = j.get_ref<const std::string&>();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str())
    throw std::runtime_error(std::string("unparsable number for ") + what);
  return v;
}

inline nlohmann::json network_to_json(const NetworkSpec& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    nlohmann::json lj;
    lj["fan_in"] = l.fan_in;
    lj["fan_out"] = l.fan_out;
    lj["bias"] = l.has_bias;
    lj["activation"] = l.activation == Activation::Tanh ? "tanh" : "linear";
    layers.push_back(std::move(lj));
  }
  return layers;
}

inline NetworkSpec network_from_json(const nlohmann::json& layers) {
  NetworkSpec net;
  for (const auto& l : layers) {
    LayerSpec ls;
    ls.fan_in = l.at("fan_in").get<int>();
    ls.fan_out = l.at("fan_out").get<int>();
    ls.has_bias = l.at("bias").get<bool>();
    const std::string act = l.at("activation").get<std::string>();
    if (act == "tanh")
      ls.activation = Activation::Tanh;
    else if (act == "linear")
      ls.activation = Activation::Linear;
    else
      throw std::runtime_error("unknown activation: " + act);
    net.layers.push_back(ls);
  }
  if (net.layers.empty() || !net.chain_valid())
    throw std::runtime_error("network layers do not chain");
  return net;
}

}  // namespace pinnev::detail
