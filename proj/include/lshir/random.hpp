#pragma once

#include <cstdint>
#include <random>

namespace lshir {

/// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for hash function slot (table, slot) under a master seed.
/// A given slot always sees the same stream regardless of L or K, so an
/// index with more tables (or more functions per table) extends a smaller
/// one instead of replacing it.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t table,
                                    std::uint64_t slot) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ (table + 0x5bd1e995ULL)) ^
                    (slot + 0x27d4eb2dULL));
}

/// Seeded generator with fully specified output.
///
/// The standard distributions leave their algorithms to the implementation,
/// so uniform and Gaussian variates are produced here from raw mt19937_64
/// words: uniforms take the top 53 bits, Gaussians use the Marsaglia polar
/// method (second variate of each pair cached).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal N(0, 1).
  double gaussian() noexcept;

  /// Uniform integer in [0, bound), bound > 0. Rejection-sampled, unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lshir
