#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "auditplan/planner.hpp"
#include "auditplan/population.hpp"
#include "auditplan/variance.hpp"

namespace auditplan {

/// Exact totals of a contiguous block of claims (dollars, derived from
/// integer-cent prefix sums).
struct BlockTotals {
  std::int64_t count = 0;
  double sum = 0;
  double sum_sq = 0;
  double sum_cube = 0;
};

BlockTotals population_block(const ClaimPopulation& pop);
BlockTotals block_plus_run(const BlockTotals& block, double value, std::int64_t copies);

/// Per-stratum size, exact totals, and the modeled standard deviation of the
/// disallowed amounts under the chosen estimator.
struct StratumStats {
  std::int64_t n_units = 0;
  double total = 0;
  double total_sq = 0;
  double mean = 0;
  double mean_sq = 0;
  double sigma_y = 0;
};

/// Stratum 1 takes `take_count` claims of entries[entry_index] plus every
/// smaller amount; stratum 2 takes the rest.
struct Boundary {
  std::size_t entry_index = 0;
  std::int64_t take_count = 0;
};

struct Stratification {
  Boundary boundary;
  std::array<StratumStats, 2> strata;
  EstimatorKind kind = EstimatorKind::simple_expansion;
  double pi = 0;
  double objective = 0;   // sum of N_h * sigma_yh
  bool degenerate = false;

  /// Standard error of the stratified total under optimal allocation with a
  /// total sample of n, ignoring the finite population correction.
  double se_for(std::int64_t n) const;
};

/// Search objective for a candidate two-stratum split. For ratio-kind
/// designs the error-rate factor is a common positive constant, so the
/// search value omits it and the choice of boundary is rate-free.
double two_strata_objective(EstimatorKind kind, double pi, const BlockTotals& stratum1,
                            const BlockTotals& stratum2);

/// Candidate within-run split points where the two-stratum objective can be
/// minimal, from the closed-form stationarity quadratic. At most four
/// integers strictly inside [0, run_count]; the run endpoints are covered by
/// the plain boundary scan.
std::vector<std::int64_t> run_split_candidates(const BlockTotals& prefix, double run_value,
                                               std::int64_t run_count, const BlockTotals& suffix,
                                               double pi);

/// Exhaustive optimal two-stratum design over unique-value boundaries, plus
/// within-run splits when allow_run_split is set. Deterministic tie-break:
/// smallest boundary entry, then smallest split count.
Stratification optimal_two_strata(const ClaimPopulation& pop, ErrorRate pi, EstimatorKind kind,
                                  bool allow_run_split);

/// Builds the stats/objective for an explicit boundary (used to score
/// comparison designs such as the cumulative-root-frequency rule).
Stratification make_stratification(const ClaimPopulation& pop, Boundary boundary, ErrorRate pi,
                                   EstimatorKind kind);

/// Classic cumulative sqrt(frequency) rule on an equal-width histogram;
/// returns the L-1 boundaries snapped to unique values at or below each cut.
std::vector<Boundary> cum_sqrt_f(const ClaimPopulation& pop, int strata, int bins);

/// Single-stratum (simple random sampling) value of the same objective, for
/// comparison rows: N * sigma_y under the matching variance model.
double srs_objective(const ClaimPopulation& pop, ErrorRate pi, EstimatorKind kind);

struct Allocation {
  std::vector<std::int64_t> n_h;
  bool proportional_fallback = false;  // all sigma_y were zero
  bool capped = false;                 // some stratum hit n_h = N_h
  bool minimum_bumped = false;         // small strata raised to the reporting floor
};

/// Optimal (Neyman) allocation of n across strata: real-valued shares
/// proportional to N_h * sigma_yh, rounded by largest remainder, capped at
/// stratum sizes with redistribution.
Allocation optimal_allocation(std::span<const StratumStats> strata, std::int64_t n);

/// Raises allocations below `floor_size` (default 2) where the stratum
/// allows, taking from the largest allocation; flags the adjustment.
void enforce_allocation_floor(Allocation& alloc, std::span<const StratumStats> strata,
                              std::int64_t floor_size = 2);

/// Variance of the stratified expansion estimator at an explicit allocation,
/// finite population correction included.
double stratified_variance(std::span<const StratumStats> strata,
                           std::span<const std::int64_t> allocation);

struct StratifiedPlan {
  std::int64_t n = 0;
  Allocation allocation;
  double achieved_margin = 0;         // with finite population correction
  double achieved_margin_no_fpc = 0;  // from the search objective at n
  double z = 0;
};

/// Total sample size for a target margin under the stratified design, then
/// the optimal allocation and the margins achieved at it.
StratifiedPlan stratified_sample_size(const Stratification& design, double margin,
                                      double confidence);

}  // namespace auditplan
