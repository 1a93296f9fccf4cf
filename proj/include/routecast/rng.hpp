#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace routecast {

// splitmix64 finalizer. Used to derive independent, well-separated substreams
// from a single run seed so that adding a consumer never shifts another
// consumer's draw sequence.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

// Deterministic random source. mt19937_64 has a standardized output sequence,
// and the uniform/normal transforms below are fixed arithmetic, so the same
// seed produces bit-identical streams on every platform. The std::
// distribution adapters are implementation-defined and deliberately avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1]. Never returns 0, so it is safe under log().
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Box-Muller without the cached spare: exactly two engine draws per call.
  double normal(double mean, double stddev) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, bound). Modulo bias is ~bound/2^64, irrelevant for
  // the small bounds used here.
  std::uint32_t uniform_below(std::uint32_t bound) {
    return static_cast<std::uint32_t>(next_u64() % bound);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace routecast
