#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace honeyfilter {

// SplitMix64 stream. The exact draw semantics are part of the artifact's
// reproducibility contract (other implementations replay them bit for bit):
//
//   next():           state += 0x9E3779B97F4A7C15; z = state;
//                     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//                     z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//                     return z ^ (z >> 31);
//   uniform01():      (next() >> 11) * 2^-53, in [0, 1)
//   uniform_below(n): threshold = (2^64 - n) mod n; draw r = next() until
//                     r >= threshold; return r mod n (unbiased)
//   shuffle(v):       Fisher-Yates, i = n-1 down to 1, j = uniform_below(i+1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform01();
  std::uint64_t uniform_below(std::uint64_t n);
  // Uniform float in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <typename T>
  void shuffle(std::span<T> items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i + 1));
      std::swap(items[i], items[j]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// SplitMix64 output finalizer applied to a single value.
std::uint64_t mix64(std::uint64_t x);

// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);
// 32-bit FNV-1a over raw bytes.
std::uint32_t fnv1a32(std::string_view bytes);

// Stage seeds: derive_seed(master, tag) = mix64(master ^ fnv1a64(tag)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);
// Per-item seeds: derive_seed(master, i) = mix64(master + (i + 1) * 0x9E3779B97F4A7C15).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace honeyfilter
