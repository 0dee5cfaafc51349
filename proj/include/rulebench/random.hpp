#pragma once

// Reproducible randomness.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// Standard distributions are implementation-defined, so every draw goes
// through the helpers below instead:
//   uniform_below(n)  rejection sampling on raw 64-bit outputs, rejecting
//                     values below (2^64 - n) mod n, then taking x mod n.
//   uniform01()       top 53 bits of one output times 2^-53.
// Seeds are combined with the SplitMix64 finalizer (mix64); strings are
// hashed with 64-bit FNV-1a before mixing.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace rulebench {

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Order-sensitive fold: h = mix64(h ^ part) over the parts, starting from
// mix64(first).
constexpr std::uint64_t derive_seed(std::uint64_t first, std::initializer_list<std::uint64_t> rest) {
  std::uint64_t h = mix64(first);
  for (auto part : rest) h = mix64(h ^ part);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rulebench
