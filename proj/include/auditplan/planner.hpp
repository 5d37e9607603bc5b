#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "auditplan/population.hpp"
#include "auditplan/variance.hpp"

namespace auditplan {

/// Inverse standard normal CDF, accurate to well under 1e-9 over (0,1).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

enum class EstimatorKind { simple_expansion, ratio };

const char* to_string(EstimatorKind kind);

struct SamplePlan {
  std::int64_t n = 0;
  VarianceEstimate variance_used;
  double achieved_margin = 0;  // recomputed at the returned n, FPC included
  double z = 0;
  bool conservative = false;
  std::vector<std::string> warnings;
};

/// Large-sample margin of error of the expansion-type total estimate at
/// sample size n: z * N * sqrt(variance/n * (N-n)/(N-1)).
double margin_of_error(std::int64_t population_size, std::int64_t n, double variance,
                       double confidence);

/// Smallest n whose margin of error does not exceed `margin`; the achieved
/// margin is recomputed at that n (so it is <= the request by construction).
SamplePlan sample_size(std::int64_t population_size, const VarianceEstimate& variance,
                       double margin, double confidence);

struct GivenRate { ErrorRate rate; };
struct ConservativeRate {};                      // maximize variance over the rate
struct PartialSource { PartialErrorSpec spec; bool exact = false; };
struct ConservativePartial {};                   // worst case over all partial specs
using VarianceSource = std::variant<GivenRate, ConservativeRate, PartialSource, ConservativePartial>;

struct PlanRequest {
  double margin = 0;       // dollars
  double confidence = 0;   // e.g. 0.90
  EstimatorKind estimator = EstimatorKind::simple_expansion;
  VarianceSource source = ConservativeRate{};
};

/// Routes the request to the matching variance estimator and sizes the
/// sample. Partial-error specs are only supported under simple expansion.
SamplePlan plan(const ClaimPopulation& pop, const PlanRequest& request);

}  // namespace auditplan
