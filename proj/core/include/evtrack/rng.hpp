#pragma once

#include <cmath>
#include <cstdint>

namespace evtrack {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so sweeps are reproducible regardless of
// scheduling and encoder/decoder can regenerate a shared dither stream
// without transmitting it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1) + counter;
    z = splitmix(z);
    z ^= splitmix(stream ^ 0xda942042e4dd58b5ull);
    return splitmix(z + counter);
  }

  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const {
    return to_unit(mix(seed_, stream_, counter));
  }

  /// Uniform on [-1/2, 1/2).
  double uniform_centered(std::uint64_t counter) const {
    return uniform(counter) - 0.5;
  }

  /// Standard normal via Box-Muller; one value per counter.
  double normal(std::uint64_t counter) const {
    const double u1 = to_unit(mix(seed_, stream_, 2 * counter));
    const double u2 = to_unit(mix(seed_, stream_, 2 * counter + 1));
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace evtrack
