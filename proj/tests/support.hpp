#pragma once

#include <cstdint>
#include <vector>

#include "auditplan/population.hpp"
#include "auditplan/rng.hpp"

namespace auditplan::testing {

/// Random positive population in run-length form, for property checks.
inline ClaimPopulation random_population(Rng& rng, std::int64_t max_unique,
                                         std::int64_t max_count,
                                         std::int64_t max_amount_cents = 100'000) {
  const auto unique = 1 + static_cast<std::int64_t>(rng.below(max_unique));
  std::vector<ClaimEntry> entries;
  entries.reserve(static_cast<std::size_t>(unique));
  for (std::int64_t i = 0; i < unique; ++i)
    entries.push_back({static_cast<Cents>(1 + rng.below(max_amount_cents)),
                       static_cast<std::int64_t>(1 + rng.below(max_count))});
  return ClaimPopulation::from_entries(std::move(entries));
}

/// Random population of exactly n claims with unit counts (small, for
/// enumeration oracles).
inline ClaimPopulation random_expanded(Rng& rng, std::int64_t n,
                                       std::int64_t max_amount_cents = 2'000) {
  std::vector<Cents> amounts;
  amounts.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    amounts.push_back(static_cast<Cents>(1 + rng.below(max_amount_cents)));
  return ClaimPopulation::from_amounts(amounts);
}

}  // namespace auditplan::testing
