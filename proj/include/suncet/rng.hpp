#pragma once

#include <cmath>
#include <cstdint>

namespace suncet {

// Counter-mode SplitMix64. The k-th output (k = 0, 1, ...) is
//   mix64(seed + (k + 1) * 0x9E3779B97F4A7C15)
// where mix64 is the SplitMix64 finalizer (Steele/Lea/Flood 2014). The whole
// generator state is (seed, counter), so it can be checkpointed as two u64s
// and any output can be recomputed from scratch. Streams never overlap for
// distinct seeds in practice because mix64 is a bijection on u64.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

// Deterministic sub-stream seed: separates the init / unsupervised /
// supervised / eval generators that share one run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ull));
}

class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }
  void set_counter(std::uint64_t c) { counter_ = c; }

  std::uint64_t next_u64() {
    std::uint64_t k = counter_++;
    return mix64(seed_ + (k + 1) * 0x9E3779B97F4A7C15ull);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform below n via modulo. The bias is ~n/2^64, negligible for the
  // dataset-scale n used here; modulo keeps the draw count fixed at one.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Box-Muller, cosine branch only. Always consumes exactly two draws so the
  // counter advance per sample is constant.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    // u1 = 0 would blow up the log; nudge onto (0, 1].
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace suncet
