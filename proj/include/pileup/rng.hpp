#pragma once
#include <cstdint>
#include <random>

#include "pileup/errors.hpp"
#include "pileup/numeric.hpp"

namespace pileup {

/// Deterministic RNG stream. All samplers below are built on the raw
/// 64-bit output only, so streams are bit-identical across platforms
/// (libstdc++ distribution objects are not used anywhere).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Exponential with rate lambda.
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// Standard normal via the inverse CDF.
  double normal() { return normal_quantile(uniform_pos()); }

private:
  std::mt19937_64 engine_;
};

/// Derive a child seed for worker `index` from a base seed (splitmix64 mix).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Gamma(shape, scale 1) sampler, Marsaglia-Tsang; requires shape >= 1.
double sample_gamma(double shape, Rng& rng);

/// Gamma(shape, scale 1) conditioned on X <= trunc, by plain rejection.
/// Throws REJECTION_STALL when the estimated acceptance rate drops
/// below 1e-6 (at least a million consecutive rejections).
double sample_truncated_gamma(double shape, double trunc, Rng& rng);

} // namespace pileup
