#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace pinnev {

// Deterministic splittable randomness. Streams are addressed by folding words
// (cell hash, run index, generation, offspring index, ...) into a 64-bit key
// with the splitmix64 finalizer; each key seeds an independent xoshiro256++
// generator. Replays are exact for a fixed key regardless of how many other
// streams were consumed elsewhere.

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fold_key(std::uint64_t key, std::uint64_t word) {
  return mix64((key ^ mix64(word + 0x9E3779B97F4A7C15ull)) +
               0x9E3779B97F4A7C15ull);
}

inline std::uint64_t fold_key(std::uint64_t key, std::uint64_t a,
                              std::uint64_t b) {
  return fold_key(fold_key(key, a), b);
}

inline std::uint64_t fold_key(std::uint64_t key, std::uint64_t a,
                              std::uint64_t b, std::uint64_t c) {
  return fold_key(fold_key(key, a, b), c);
}

inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

namespace streams {
inline constexpr std::uint64_t kInit = 1;      // weight initialization
inline constexpr std::uint64_t kSampling = 2;  // offspring draws
inline constexpr std::uint64_t kBatch = 3;     // collocation batches
inline constexpr std::uint64_t kRun = 4;       // per-run master keys
}  // namespace streams

class Rng {
 public:
  explicit Rng(std::uint64_t key) {
    std::uint64_t sm = key;
    for (auto& w : s_) w = next_splitmix(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // in [0, 1)
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // standard normal via Box-Muller, second draw of each pair cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t next_splitmix(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    return mix64(state);
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pinnev
