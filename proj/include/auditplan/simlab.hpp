#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "auditplan/planner.hpp"
#include "auditplan/population.hpp"

namespace auditplan {

/// Realized disallowed amounts for one entry of the run-length population:
/// `full` claims with y = x plus one y value per partially wrong claim.
/// Claims not accounted for here have y = 0.
struct EntryErrorDraw {
  std::int64_t full = 0;
  std::vector<double> partial_y;  // dollars
};

/// One synthetic audit outcome over a claim population. Overstatements only:
/// 0 <= y <= x for every claim.
struct RealizedAudit {
  const ClaimPopulation* pop = nullptr;
  std::vector<EntryErrorDraw> per_entry;
  std::int64_t error_claims = 0;
  double total_disallowed = 0;  // dollars
  double realized_rate = 0;
  std::uint64_t seed = 0;
};

/// Distribution of the disallowed fraction q of a partial error.
struct PartialFraction {
  double lo = 0.5;
  double hi = 0.5;
  static PartialFraction fixed(double q) { return {q, q}; }
  static PartialFraction uniform(double lo, double hi) { return {lo, hi}; }
  bool is_fixed() const { return lo == hi; }
};

/// Error-generation scenario: overall error rate, share of errors that are
/// full, and the q distribution for the partial remainder.
struct ScenarioSpec {
  double full_fraction = 1.0;
  PartialFraction fraction = PartialFraction::uniform(0.2, 0.8);
  double overall_rate = 0;
};

/// Exactly `error_count` claims drawn without replacement get y = x.
RealizedAudit all_or_nothing_audit(const ClaimPopulation& pop, std::int64_t error_count,
                                   std::uint64_t seed);

/// Scenario audit: round(rate*N) error claims, round(full_fraction*T) of them
/// full, the rest partial with per-claim q draws. Partial amounts are rounded
/// half-even to cents unless disabled (the enumeration oracles compare
/// against unrounded arithmetic).
RealizedAudit scenario_audit(const ClaimPopulation& pop, const ScenarioSpec& spec,
                             std::uint64_t seed, bool round_to_cents = true);

/// Realized variance of the ratio-estimator residuals y - (tau_y/tau_x) x.
double realized_ratio_variance(const RealizedAudit& audit);

struct BandRow {
  std::size_t scenario = 0;
  double rate = 0;
  double mean = 0;
  double p05 = 0;
  double p95 = 0;
};

/// Replicated realized ratio variances per (scenario, rate) cell, summarized
/// as mean and the 5th/95th percentile band. Deterministic per seed.
std::vector<BandRow> ratio_variance_bands(const ClaimPopulation& pop,
                                          std::span<const ScenarioSpec> scenarios,
                                          std::span<const double> rates,
                                          std::int64_t replicates, std::uint64_t seed);

struct AllOrNothingModel {
  double rate = 0;
};
using ErrorModel = std::variant<AllOrNothingModel, ScenarioSpec>;

struct CoverageResult {
  double coverage = 0;
  double mean_halfwidth = 0;  // dollars
  std::int64_t replicates = 0;
};

/// Per replicate: realize an audit, draw a without-replacement sample of n
/// claims, build the estimator's large-sample interval from sample variances
/// (n-1 divisor), and record whether the true total is covered. Zero-width
/// intervals count as covered only when the estimate matches the truth.
CoverageResult coverage_experiment(const ClaimPopulation& pop, const ErrorModel& model,
                                   std::int64_t n, EstimatorKind estimator, double confidence,
                                   std::int64_t replicates, std::uint64_t seed);

/// Synthetic populations echoing two published audit-population shapes:
/// a low-variance right-skewed population of 9000 claims totalling about
/// $1.1M with a heavy spike near $100-$150, and a higher-variance
/// right-skewed population of 4033 claims totalling about $7.5M.
ClaimPopulation make_edwards_like(std::uint64_t seed);
ClaimPopulation make_neter_like(std::uint64_t seed);

/// Brute-force enumeration over all error subsets of a small population;
/// ground truth for the closed-form estimators.
struct SubsetEnumeration {
  double mean_conditional_variance = 0;    // average of Var(Y | subset)
  double variance_of_conditional_mean = 0; // spread of E(Y | subset) across subsets
  double mean_ratio_variance = 0;          // average realized ratio variance
  double mean_xbar_cross = 0;              // average of mean(x_s) * mean(x_s^2)
  double criterion_positive_fraction = 0;  // subsets whose decision statistic is > 0
  std::int64_t subsets = 0;
};
SubsetEnumeration enumerate_error_subsets(const ClaimPopulation& pop, std::int64_t error_count);

/// Two-stage enumeration (error set, then partial subset) of the expected
/// conditional variance under the fixed-fraction partial error model.
double enumerate_partial_variance(const ClaimPopulation& pop, std::int64_t total_errors,
                                  std::int64_t partial_errors, double q);

}  // namespace auditplan
