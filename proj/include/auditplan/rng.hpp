#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace auditplan {

/// Deterministic xoshiro256++ generator. All stochastic code in this library
/// draws through this class so that results are reproducible from a seed
/// independently of the platform's standard-library distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Unbiased uniform integer in [0, bound); bound must be >= 1.
  std::uint64_t below(std::uint64_t bound);

  double uniform(double lo, double hi);

 private:
  std::array<std::uint64_t, 4> state_;
};

/// Counter-based seed derivation: replicate r of a run with root seed s uses
/// mix_seed(s, r). Streams are independent of evaluation order, so replicates
/// may be computed in any partition and still reproduce exactly.
std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream);

/// Exact hypergeometric draw: number of marked items obtained when sampling
/// `draws` items without replacement from `total` items of which `success`
/// are marked. Inverse transform; walks outward from the mode for wide
/// supports so the pmf never underflows.
std::int64_t hypergeometric(Rng& rng, std::int64_t total, std::int64_t success,
                            std::int64_t draws);

/// Sample `draws` items without replacement from a population given as
/// per-group sizes; returns how many sampled items fall in each group.
/// Uniform over all subsets of the expanded population, but runs in
/// O(draws log groups) via Floyd's subset sampling on the index space.
std::vector<std::int64_t> sample_group_counts(Rng& rng,
                                              std::span<const std::int64_t> group_sizes,
                                              std::int64_t draws);

}  // namespace auditplan
