#pragma once

#include <cstdint>
#include <random>

namespace ohmgrad {

/// Seedable generator with a fixed, portable transform from raw 64-bit draws
/// to floating point values.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are implementation-defined, so they
/// are not used: uniforms take the top 53 bits of one draw, normals use the
/// cosine branch of Box-Muller on two uniforms, and integer indices use
/// rejection sampling on one or more draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Derive an independent stream seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace ohmgrad
