#pragma once

#include <cstdint>
#include <random>

namespace causalign {

/// Mixes `seed` and `index` into a new 64-bit seed (splitmix64 finalizer).
/// Used to derive independent per-item and per-subsystem streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded random stream. Wraps mt19937_64 and implements its own
/// distributions so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();

  /// Independent stream for item `index`; does not advance this stream.
  Rng split(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace causalign
