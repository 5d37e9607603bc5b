#pragma once

#include <cstdint>
#include <optional>

#include "auditplan/population.hpp"

namespace auditplan {

/// Fraction of claims containing any error. Carries the exact error-claim
/// count when the rate was given as a count over the population size.
struct ErrorRate {
  double value = 0;
  std::optional<std::int64_t> error_count;

  static ErrorRate of(double pi);
  static ErrorRate of_count(std::int64_t errors, std::int64_t population);
};

/// Error structure where partial errors disallow a fixed fraction of the
/// claim: `partial_errors` claims have y = q*x, the remaining
/// `total_errors - partial_errors` have y = x, and all others y = 0.
struct PartialErrorSpec {
  std::int64_t population = 0;      // N
  std::int64_t total_errors = 0;    // claims with any error
  std::int64_t partial_errors = 0;  // claims only partially in error
  double error_fraction = 0.5;      // q: disallowed fraction of a partial claim

  static PartialErrorSpec from_counts(std::int64_t population, std::int64_t total_errors,
                                      std::int64_t partial_errors, double error_fraction);
  /// Rounds rate*N to integer counts.
  static PartialErrorSpec from_rates(std::int64_t population, double total_rate,
                                     double partial_rate, double error_fraction);

  double total_rate() const { return static_cast<double>(total_errors) / static_cast<double>(population); }
  double partial_rate() const { return static_cast<double>(partial_errors) / static_cast<double>(population); }
};

enum class VarianceMethod {
  conditional_expected,  // expected conditional variance under a fixed error count
  roberts,               // Roberts' estimator under the independent-error model
  total,                 // unconditional variance under the independent-error model
  partial_expected,      // expected conditional variance with partial errors
  partial_bound,         // upper bound on the partial-error variance
  ratio_expected,        // expected squared ratio-residual variance
  ratio_roberts,         // Roberts' analog for the ratio estimator
  ratio_large_n,         // large-population limit of the ratio variance
};

const char* to_string(VarianceMethod method);

struct VarianceEstimate {
  double value = 0;  // dollars^2
  VarianceMethod method = VarianceMethod::total;
  double pi = 0;  // error rate used, when applicable
  std::optional<PartialErrorSpec> partial;
  bool clamped = false;  // negative rounding residue clamped to zero
};

/// Estimators of the variance of the disallowed amounts for an
/// all-or-nothing error population with error rate pi. They satisfy
/// roberts <= conditional_expected <= total for every population.
VarianceEstimate expected_conditional_variance(const PopulationMoments& m, ErrorRate pi);
VarianceEstimate roberts_variance(const PopulationMoments& m, ErrorRate pi);
VarianceEstimate total_variance(const PopulationMoments& m, ErrorRate pi);

/// Error rate maximizing the expected conditional variance, with the maximum
/// itself; used for conservative sample sizes when no rate estimate exists.
struct WorstCaseErrorRate {
  double critical_exact = 0;   // unclamped stationary point
  double critical_approx = 0;  // mean_sq / (2 mean^2) approximation
  double attained = 0;         // rate in [0,1] where the maximum occurs
  VarianceEstimate max_variance;
  bool endpoint_only = false;  // stationary point was unusable; endpoints compared
};
WorstCaseErrorRate worst_case_error_rate(const PopulationMoments& m);

/// Partial-error model variance: exact expectation, its convenient upper
/// bound, and the worst case over all (rates, fraction) combinations.
VarianceEstimate partial_error_variance(const PopulationMoments& m, const PartialErrorSpec& spec);
VarianceEstimate partial_error_variance_bound(const PopulationMoments& m, const PartialErrorSpec& spec);
VarianceEstimate worst_case_partial_variance(const PopulationMoments& m);

/// Variance of the ratio-estimator residuals y - R*x under the fixed error
/// count model. The kernel multiplying pi*(1-pi) does not depend on pi.
VarianceEstimate expected_ratio_variance(const PopulationMoments& m, ErrorRate pi);
double ratio_variance_kernel(const PopulationMoments& m);
VarianceEstimate roberts_ratio_variance(const PopulationMoments& m, ErrorRate pi);
VarianceEstimate large_n_ratio_variance(const PopulationMoments& m, ErrorRate pi);

}  // namespace auditplan
