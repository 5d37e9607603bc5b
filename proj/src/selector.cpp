#include "auditplan/selector.hpp"

#include <cmath>
#include <stdexcept>

#include "auditplan/planner.hpp"
#include "auditplan/rng.hpp"

namespace auditplan {

const char* to_string(Recommendation r) {
  switch (r) {
    case Recommendation::ratio: return "ratio";
    case Recommendation::simple_expansion: return "simple_expansion";
    case Recommendation::indeterminate: return "indeterminate";
  }
  return "unknown";
}

CriterionMoments criterion_moments(const PopulationMoments& m, ErrorRate pi) {
  if (!(pi.value > 0))
    throw std::domain_error("criterion undefined at a zero error rate");
  if (m.n < 2) throw std::domain_error("criterion needs N >= 2");
  if (!(m.mean > 0)) throw std::domain_error("criterion needs a positive mean claim");
  const double k = m.mean + m.variance / (2 * m.mean);
  const double spread = m.var_x2 + k * k * m.variance - 2 * k * m.cov_x_x2;
  CriterionMoments out;
  out.mean = m.variance / 2;
  out.variance = std::max(0.0, (1.0 / pi.value - 1.0) / static_cast<double>(m.n - 1) * spread);
  return out;
}

double prob_ratio_beats(const PopulationMoments& m, ErrorRate pi) {
  const CriterionMoments g = criterion_moments(m, pi);
  if (g.variance <= 0) return g.mean > 0 ? 1.0 : 0.5;
  return normal_cdf(g.mean / std::sqrt(g.variance));
}

double prob_ratio_beats_mc(const ClaimPopulation& pop, ErrorRate pi,
                           std::int64_t replicates, std::uint64_t seed) {
  const auto n = pop.size();
  const auto error_count =
      pi.error_count ? *pi.error_count
                     : static_cast<std::int64_t>(std::llround(pi.value * static_cast<double>(n)));
  if (error_count < 1) throw std::domain_error("Monte Carlo needs at least one error claim");
  if (replicates < 1) throw std::domain_error("need at least one replicate");

  const PopulationMoments m = moments(pop);
  const double k = m.mean + (m.mean > 0 ? m.variance / (2 * m.mean) : 0.0);
  std::vector<double> u_value(pop.entries().size());
  std::vector<std::int64_t> sizes(pop.entries().size());
  for (std::size_t i = 0; i < pop.entries().size(); ++i) {
    const double a = dollars(pop.entries()[i].amount_cents);
    u_value[i] = a * a - k * a;
    sizes[i] = pop.entries()[i].count;
  }

  std::int64_t positive = 0;
  for (std::int64_t rep = 0; rep < replicates; ++rep) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(rep)));
    const std::vector<std::int64_t> counts = sample_group_counts(rng, sizes, error_count);
    double sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      sum += static_cast<double>(counts[i]) * u_value[i];
    if (sum > 0) ++positive;
  }
  return static_cast<double>(positive) / static_cast<double>(replicates);
}

SelectorReport select_estimator(const ClaimPopulation& pop, ErrorRate pi,
                                const SelectorOptions& options) {
  const PopulationMoments m = moments(pop);
  SelectorReport report;
  report.error_count =
      pi.error_count ? *pi.error_count
                     : static_cast<std::int64_t>(std::llround(pi.value * static_cast<double>(m.n)));
  report.seed = options.seed;

  const CriterionMoments g = criterion_moments(m, pi);
  report.mean_g = g.mean;
  report.var_g = g.variance;
  report.prob_normal = prob_ratio_beats(m, pi);
  report.degenerate = g.variance <= 0;

  if (options.mc_replicates > 0 && report.error_count >= 1) {
    report.mc_replicates = options.mc_replicates;
    report.prob_mc = prob_ratio_beats_mc(pop, pi, options.mc_replicates, options.seed);
  }

  if (report.degenerate && g.mean <= 0)
    report.recommendation = Recommendation::indeterminate;
  else if (report.prob_normal >= options.threshold)
    report.recommendation = Recommendation::ratio;
  else
    report.recommendation = Recommendation::simple_expansion;
  return report;
}

}  // namespace auditplan
