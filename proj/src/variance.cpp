#include "auditplan/variance.hpp"

#include <cmath>
#include <stdexcept>

namespace auditplan {

namespace {

VarianceEstimate finalize(double value, VarianceMethod method, double pi,
                          const PopulationMoments& m,
                          std::optional<PartialErrorSpec> partial = std::nullopt) {
  VarianceEstimate est;
  est.method = method;
  est.pi = pi;
  est.partial = std::move(partial);
  if (value < 0) {
    if (value < -1e-9 * m.mean_sq)
      throw std::domain_error("variance estimate is negative beyond rounding tolerance");
    est.clamped = true;
    value = 0;
  }
  est.value = value;
  return est;
}

}  // namespace

const char* to_string(VarianceMethod method) {
  switch (method) {
    case VarianceMethod::conditional_expected: return "conditional_expected";
    case VarianceMethod::roberts: return "roberts";
    case VarianceMethod::total: return "total";
    case VarianceMethod::partial_expected: return "partial_expected";
    case VarianceMethod::partial_bound: return "partial_bound";
    case VarianceMethod::ratio_expected: return "ratio_expected";
    case VarianceMethod::ratio_roberts: return "ratio_roberts";
    case VarianceMethod::ratio_large_n: return "ratio_large_n";
  }
  return "unknown";
}

ErrorRate ErrorRate::of(double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw std::domain_error("error rate must lie in [0,1]");
  return ErrorRate{pi, std::nullopt};
}

ErrorRate ErrorRate::of_count(std::int64_t errors, std::int64_t population) {
  if (population < 1 || errors < 0 || errors > population)
    throw std::domain_error("error count must lie in [0,N]");
  return ErrorRate{static_cast<double>(errors) / static_cast<double>(population), errors};
}

PartialErrorSpec PartialErrorSpec::from_counts(std::int64_t population, std::int64_t total_errors,
                                               std::int64_t partial_errors, double error_fraction) {
  if (population < 1) throw std::domain_error("population must be positive");
  if (partial_errors < 0 || partial_errors > total_errors || total_errors > population)
    throw std::domain_error("need 0 <= partial errors <= total errors <= N");
  if (!(error_fraction > 0.0 && error_fraction < 1.0))
    throw std::domain_error("partial error fraction must lie in (0,1)");
  return PartialErrorSpec{population, total_errors, partial_errors, error_fraction};
}

PartialErrorSpec PartialErrorSpec::from_rates(std::int64_t population, double total_rate,
                                              double partial_rate, double error_fraction) {
  if (!(total_rate >= 0 && total_rate <= 1) || !(partial_rate >= 0 && partial_rate <= total_rate))
    throw std::domain_error("need 0 <= partial rate <= total rate <= 1");
  const auto t = static_cast<std::int64_t>(std::llround(total_rate * static_cast<double>(population)));
  auto p = static_cast<std::int64_t>(std::llround(partial_rate * static_cast<double>(population)));
  p = std::min(p, t);
  return from_counts(population, t, p, error_fraction);
}

VarianceEstimate expected_conditional_variance(const PopulationMoments& m, ErrorRate pi) {
  const double p = pi.value;
  if (m.n < 2 && p > 0.0 && p < 1.0)
    throw std::domain_error("expected conditional variance needs N >= 2 for interior rates");
  const double correction =
      m.n >= 2 ? p * (1 - p) * m.variance / static_cast<double>(m.n - 1) : 0.0;
  const double value = p * m.mean_sq - (p * m.mean) * (p * m.mean) - correction;
  return finalize(value, VarianceMethod::conditional_expected, p, m);
}

VarianceEstimate roberts_variance(const PopulationMoments& m, ErrorRate pi) {
  const double p = pi.value;
  const double value = p * m.mean_sq - (p * m.mean) * (p * m.mean) -
                       p * (1 - p) * (m.variance + m.mean * m.mean) / static_cast<double>(m.n);
  return finalize(value, VarianceMethod::roberts, p, m);
}

VarianceEstimate total_variance(const PopulationMoments& m, ErrorRate pi) {
  const double p = pi.value;
  return finalize(p * m.mean_sq - (p * m.mean) * (p * m.mean), VarianceMethod::total, p, m);
}

WorstCaseErrorRate worst_case_error_rate(const PopulationMoments& m) {
  if (m.n < 2) throw std::domain_error("worst-case error rate needs N >= 2");
  const double adj = m.variance / static_cast<double>(m.n - 1);
  const double denom = m.mean * m.mean - adj;

  WorstCaseErrorRate out;
  out.critical_approx = m.mean_sq / (2 * m.mean * m.mean);
  const auto h_of = [&](double p) { return expected_conditional_variance(m, ErrorRate::of(p)); };

  // h(0) = 0, so only h(1) and an interior stationary point can attain the max.
  double best_pi = 1.0;
  VarianceEstimate best = h_of(1.0);
  if (denom == 0) {
    out.endpoint_only = true;
    out.critical_exact = out.critical_approx;
  } else {
    out.critical_exact = 0.5 * (m.mean_sq - adj) / denom;
    if (out.critical_exact > 0 && out.critical_exact < 1) {
      VarianceEstimate interior = h_of(out.critical_exact);
      if (interior.value > best.value) {
        best = interior;
        best_pi = out.critical_exact;
      }
    }
  }
  out.attained = best_pi;
  out.max_variance = best;
  return out;
}

VarianceEstimate partial_error_variance(const PopulationMoments& m, const PartialErrorSpec& spec) {
  const double q = spec.error_fraction;
  const double pi_t = spec.total_rate();
  const double pi_p = spec.partial_rate();
  if (spec.total_errors == 0)
    return finalize(0.0, VarianceMethod::partial_expected, 0.0, m, spec);

  const double a = pi_t - pi_p * (1 - q * q);
  const double b = pi_t - pi_p * (1 - q);
  const double p_over_t = static_cast<double>(spec.partial_errors) / static_cast<double>(spec.total_errors);
  double correction = 0.0;
  if (m.n >= 2) {
    correction = m.variance / static_cast<double>(m.n - 1) *
                 (pi_p * (1 - q) * (1 - q) * (1 - p_over_t) +
                  (1 - pi_t) * (1 - p_over_t * (1 - q)) * b);
  }
  const double value = a * m.mean_sq - b * b * m.mean * m.mean - correction;
  return finalize(value, VarianceMethod::partial_expected, pi_t, m, spec);
}

VarianceEstimate partial_error_variance_bound(const PopulationMoments& m,
                                              const PartialErrorSpec& spec) {
  const double q = spec.error_fraction;
  const double pi_t = spec.total_rate();
  const double pi_p = spec.partial_rate();
  const double a = pi_t - pi_p * (1 - q * q);
  const double b = pi_t - pi_p * (1 - q);
  const double value = a * m.mean_sq - b * b * m.mean * m.mean;
  return finalize(value, VarianceMethod::partial_bound, pi_t, m, spec);
}

VarianceEstimate worst_case_partial_variance(const PopulationMoments& m) {
  const double pi_star = std::min(m.mean_sq / (2 * m.mean * m.mean), 1.0);
  const double value = pi_star * m.mean_sq - pi_star * pi_star * m.mean * m.mean;
  return finalize(value, VarianceMethod::partial_bound, pi_star, m);
}

double ratio_variance_kernel(const PopulationMoments& m) {
  if (m.n < 2) return m.mean_sq;
  const double fpc = static_cast<double>(m.n) / static_cast<double>(m.n - 1);
  return m.mean_sq +
         fpc * (m.total_sq / (m.total * m.total) * m.variance - 2 * m.cov_x_x2 / m.total);
}

VarianceEstimate expected_ratio_variance(const PopulationMoments& m, ErrorRate pi) {
  if (!(m.total > 0)) throw std::domain_error("ratio variance needs a positive claim total");
  const double p = pi.value;
  return finalize(p * (1 - p) * ratio_variance_kernel(m), VarianceMethod::ratio_expected, p, m);
}

VarianceEstimate roberts_ratio_variance(const PopulationMoments& m, ErrorRate pi) {
  if (!(m.variance > 0))
    throw std::domain_error(
        "Roberts ratio variance undefined for constant populations; use expected_ratio_variance");
  const double p = pi.value;
  const double cv2 = m.variance / (m.mean * m.mean);
  const double mu_over_sigma = m.mean / std::sqrt(m.variance);
  const double bracket = 1.0 + (cv2 + 4.0 / (1.0 + cv2) -
                                m.skewness / (mu_over_sigma * (1.0 + mu_over_sigma * mu_over_sigma)) -
                                5.0) /
                                   static_cast<double>(m.n);
  return finalize(p * (1 - p) * m.mean_sq * bracket, VarianceMethod::ratio_roberts, p, m);
}

VarianceEstimate large_n_ratio_variance(const PopulationMoments& m, ErrorRate pi) {
  const double p = pi.value;
  return finalize(p * (1 - p) * m.mean_sq, VarianceMethod::ratio_large_n, p, m);
}

}  // namespace auditplan
