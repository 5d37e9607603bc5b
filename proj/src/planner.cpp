#include "auditplan/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace auditplan {

namespace {

// Wichura's AS 241 rational approximation (PPND16 coefficient set).
double quantile_as241(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0 ? p : 1 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0 ? -value : value;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile probability must lie in (0,1)");
  double x = quantile_as241(p);
  // One Halley step against erfc-based CDF tightens the tail digits.
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  if (pdf > 1e-300) {
    const double diff = (normal_cdf(x) - p) / pdf;
    x -= diff / (1.0 + 0.5 * x * diff);
  }
  return x;
}

const char* to_string(EstimatorKind kind) {
  return kind == EstimatorKind::simple_expansion ? "simple_expansion" : "ratio";
}

double margin_of_error(std::int64_t population_size, std::int64_t n, double variance,
                       double confidence) {
  if (population_size < 2) throw std::domain_error("margin of error needs N >= 2");
  if (n < 1 || n > population_size) throw std::domain_error("sample size must lie in [1,N]");
  if (variance < 0) throw std::domain_error("variance must be nonnegative");
  const double z = normal_quantile(0.5 + confidence / 2);
  const auto big_n = static_cast<double>(population_size);
  const double fpc = (big_n - static_cast<double>(n)) / (big_n - 1.0);
  return z * big_n * std::sqrt(variance / static_cast<double>(n) * fpc);
}

SamplePlan sample_size(std::int64_t population_size, const VarianceEstimate& variance,
                       double margin, double confidence) {
  if (population_size < 1) throw std::domain_error("population size must be positive");
  if (!(margin > 0)) throw std::domain_error("margin must be positive");
  if (!(confidence > 0 && confidence < 1))
    throw std::domain_error("confidence must lie in (0,1)");

  SamplePlan out;
  out.variance_used = variance;
  out.z = normal_quantile(0.5 + confidence / 2);
  if (variance.value <= 0) return out;  // n = 0, margin 0

  if (population_size == 1) {  // a single claim: any sample is a census
    out.n = 1;
    return out;
  }

  const auto big_n = static_cast<double>(population_size);
  const double z2v = out.z * out.z * variance.value;
  const double raw =
      z2v * big_n * big_n * big_n / (margin * margin * (big_n - 1.0) + z2v * big_n * big_n);
  std::int64_t n = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(raw)), 1,
                                            population_size);
  // Settle floating residue so the ceiling is tight in both directions.
  while (n < population_size && margin_of_error(population_size, n, variance.value, confidence) > margin)
    ++n;
  while (n > 1 && margin_of_error(population_size, n - 1, variance.value, confidence) <= margin)
    --n;
  out.n = n;
  out.achieved_margin = margin_of_error(population_size, n, variance.value, confidence);
  return out;
}

SamplePlan plan(const ClaimPopulation& pop, const PlanRequest& request) {
  const PopulationMoments m = moments(pop);
  VarianceEstimate variance;
  bool conservative = false;
  double rate_for_warning = -1;

  const bool ratio = request.estimator == EstimatorKind::ratio;
  if (const auto* given = std::get_if<GivenRate>(&request.source)) {
    variance = ratio ? expected_ratio_variance(m, given->rate)
                     : expected_conditional_variance(m, given->rate);
    rate_for_warning = given->rate.value;
  } else if (std::holds_alternative<ConservativeRate>(request.source)) {
    conservative = true;
    if (ratio) {
      variance = expected_ratio_variance(m, ErrorRate::of(0.5));  // rate maximizing the kernel
      rate_for_warning = 0.5;
    } else {
      const WorstCaseErrorRate worst = worst_case_error_rate(m);
      variance = worst.max_variance;
      rate_for_warning = worst.attained;
    }
  } else if (const auto* partial = std::get_if<PartialSource>(&request.source)) {
    if (ratio)
      throw std::invalid_argument(
          "partial-error planning is unavailable under ratio estimation; "
          "use the simulation lab instead");
    variance = partial->exact ? partial_error_variance(m, partial->spec)
                              : partial_error_variance_bound(m, partial->spec);
    rate_for_warning = partial->spec.total_rate();
  } else {
    if (ratio)
      throw std::invalid_argument(
          "partial-error planning is unavailable under ratio estimation; "
          "use the simulation lab instead");
    conservative = true;
    variance = worst_case_partial_variance(m);
    rate_for_warning = variance.pi;
  }

  SamplePlan out = sample_size(pop.size(), variance, request.margin, request.confidence);
  out.conservative = conservative;
  if (variance.clamped)
    out.warnings.push_back("variance estimate was a negative rounding residue, clamped to zero");
  if (out.n > 0 && out.n < 30)
    out.warnings.push_back("sample size below 30; the normal approximation may be inaccurate");
  if (out.n > 0 && rate_for_warning >= 0 && static_cast<double>(out.n) * rate_for_warning < 10)
    out.warnings.push_back(
        "expected error count in the sample is below 10; validate coverage by simulation");
  return out;
}

}  // namespace auditplan
