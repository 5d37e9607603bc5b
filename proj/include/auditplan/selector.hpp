#pragma once

#include <cstdint>
#include <optional>

#include "auditplan/population.hpp"
#include "auditplan/variance.hpp"

namespace auditplan {

/// Mean and variance of the decision statistic g that is positive exactly
/// when ratio estimation has smaller variance than simple expansion.
/// The mean equals variance/2 of the claim amounts and does not depend on
/// the error rate.
struct CriterionMoments {
  double mean = 0;
  double variance = 0;
};

CriterionMoments criterion_moments(const PopulationMoments& m, ErrorRate pi);

/// Normal-approximation probability that ratio estimation beats simple
/// expansion; always > 0.5 for non-constant populations.
double prob_ratio_beats(const PopulationMoments& m, ErrorRate pi);

/// Monte Carlo estimate of the same probability: fraction of error-set draws
/// whose decision statistic is strictly positive. Deterministic given seed.
double prob_ratio_beats_mc(const ClaimPopulation& pop, ErrorRate pi,
                           std::int64_t replicates, std::uint64_t seed);

enum class Recommendation { ratio, simple_expansion, indeterminate };

const char* to_string(Recommendation r);

struct SelectorOptions {
  double threshold = 0.5;  // recommend ratio when prob_normal >= threshold
  std::int64_t mc_replicates = 0;  // 0 = skip the Monte Carlo column
  std::uint64_t seed = 0;
};

struct SelectorReport {
  double mean_g = 0;
  double var_g = 0;
  double prob_normal = 0;
  std::optional<double> prob_mc;
  std::int64_t mc_replicates = 0;
  std::uint64_t seed = 0;
  std::int64_t error_count = 0;  // rounded error-claim count backing the rate
  bool degenerate = false;       // var_g == 0; the statistic has no spread
  Recommendation recommendation = Recommendation::indeterminate;
};

SelectorReport select_estimator(const ClaimPopulation& pop, ErrorRate pi,
                                const SelectorOptions& options = {});

}  // namespace auditplan
