#include "auditplan/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "auditplan/rng.hpp"

namespace auditplan {

namespace {

std::vector<std::int64_t> entry_sizes(const ClaimPopulation& pop) {
  std::vector<std::int64_t> sizes;
  sizes.reserve(pop.entries().size());
  for (const ClaimEntry& e : pop.entries()) sizes.push_back(e.count);
  return sizes;
}

double standard_normal(Rng& rng) {
  // Strictly interior uniform so the quantile never sees 0 or 1.
  const double u = (static_cast<double>(rng.next() >> 11) + 0.5) * 0x1.0p-53;
  return normal_quantile(u);
}

double round_to_cents(double dollars_value) {
  return std::nearbyint(dollars_value * 100.0) / 100.0;
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::domain_error("percentile of empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::int64_t binomial_guarded(std::int64_t n, std::int64_t k, std::int64_t limit) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  double value = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    value *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (value > static_cast<double>(limit)) return limit + 1;
  }
  return static_cast<std::int64_t>(std::llround(value));
}

// Lexicographic combination odometer over indices [0, n).
bool next_combination(std::vector<std::int64_t>& idx, std::int64_t n) {
  const auto k = static_cast<std::int64_t>(idx.size());
  std::int64_t i = k - 1;
  while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[static_cast<std::size_t>(i)];
  for (std::int64_t j = i + 1; j < k; ++j)
    idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

// First k of a partial Fisher-Yates pass over a copy of `values`.
void sample_values(std::vector<double>& out, const std::vector<double>& values,
                   std::int64_t k, Rng& rng) {
  out.assign(values.begin(), values.end());
  for (std::int64_t j = 0; j < k; ++j) {
    const auto pick =
        j + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(
                static_cast<std::int64_t>(out.size()) - j)));
    std::swap(out[static_cast<std::size_t>(j)], out[static_cast<std::size_t>(pick)]);
  }
  out.resize(static_cast<std::size_t>(k));
}

}  // namespace

RealizedAudit all_or_nothing_audit(const ClaimPopulation& pop, std::int64_t error_count,
                                   std::uint64_t seed) {
  if (error_count < 0 || error_count > pop.size())
    throw std::domain_error("error count must lie in [0,N]");
  Rng rng(seed);
  const auto sizes = entry_sizes(pop);
  const auto counts = sample_group_counts(rng, sizes, error_count);

  RealizedAudit audit;
  audit.pop = &pop;
  audit.seed = seed;
  audit.error_claims = error_count;
  audit.realized_rate = static_cast<double>(error_count) / static_cast<double>(pop.size());
  audit.per_entry.resize(pop.entries().size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    audit.per_entry[i].full = counts[i];
    audit.total_disallowed +=
        static_cast<double>(counts[i]) * dollars(pop.entries()[i].amount_cents);
  }
  return audit;
}

RealizedAudit scenario_audit(const ClaimPopulation& pop, const ScenarioSpec& spec,
                             std::uint64_t seed, bool round_cents) {
  if (!(spec.overall_rate >= 0 && spec.overall_rate <= 1))
    throw std::domain_error("overall error rate must lie in [0,1]");
  if (!(spec.full_fraction >= 0 && spec.full_fraction <= 1))
    throw std::domain_error("full-error fraction must lie in [0,1]");
  if (!(spec.fraction.lo > 0 && spec.fraction.lo <= spec.fraction.hi && spec.fraction.hi < 1))
    throw std::domain_error("partial fraction bounds must satisfy 0 < lo <= hi < 1");

  const auto total = static_cast<std::int64_t>(
      std::llround(spec.overall_rate * static_cast<double>(pop.size())));
  const auto full = static_cast<std::int64_t>(
      std::llround(spec.full_fraction * static_cast<double>(total)));
  const std::int64_t partial = total - full;

  Rng rng(seed);
  const auto sizes = entry_sizes(pop);
  const auto errors = sample_group_counts(rng, sizes, total);
  const auto partials = sample_group_counts(rng, errors, partial);

  RealizedAudit audit;
  audit.pop = &pop;
  audit.seed = seed;
  audit.error_claims = total;
  audit.realized_rate = static_cast<double>(total) / static_cast<double>(pop.size());
  audit.per_entry.resize(pop.entries().size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    EntryErrorDraw& draw = audit.per_entry[i];
    draw.full = errors[i] - partials[i];
    const double amount = dollars(pop.entries()[i].amount_cents);
    audit.total_disallowed += static_cast<double>(draw.full) * amount;
    draw.partial_y.reserve(static_cast<std::size_t>(partials[i]));
    for (std::int64_t j = 0; j < partials[i]; ++j) {
      const double q = spec.fraction.is_fixed()
                           ? spec.fraction.lo
                           : rng.uniform(spec.fraction.lo, spec.fraction.hi);
      double y = q * amount;
      if (round_cents) y = round_to_cents(y);
      draw.partial_y.push_back(y);
      audit.total_disallowed += y;
    }
  }
  return audit;
}

double realized_ratio_variance(const RealizedAudit& audit) {
  const ClaimPopulation& pop = *audit.pop;
  const double tau_x = dollars(pop.total_cents());
  if (!(tau_x > 0)) throw std::domain_error("claim total must be positive");
  const double ratio = audit.total_disallowed / tau_x;

  double sum_sq = 0;
  for (std::size_t i = 0; i < pop.entries().size(); ++i) {
    const ClaimEntry& e = pop.entries()[i];
    const EntryErrorDraw& draw = audit.per_entry[i];
    const double x = dollars(e.amount_cents);
    const double fitted = ratio * x;
    const auto partial_count = static_cast<std::int64_t>(draw.partial_y.size());
    const std::int64_t clean = e.count - draw.full - partial_count;
    sum_sq += static_cast<double>(clean) * fitted * fitted;
    sum_sq += static_cast<double>(draw.full) * (x - fitted) * (x - fitted);
    for (double y : draw.partial_y) sum_sq += (y - fitted) * (y - fitted);
  }
  return sum_sq / static_cast<double>(pop.size());
}

std::vector<BandRow> ratio_variance_bands(const ClaimPopulation& pop,
                                          std::span<const ScenarioSpec> scenarios,
                                          std::span<const double> rates,
                                          std::int64_t replicates, std::uint64_t seed) {
  if (replicates < 1) throw std::domain_error("need at least one replicate");
  std::vector<BandRow> rows;
  rows.reserve(scenarios.size() * rates.size());
  std::uint64_t stream = 0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (double rate : rates) {
      ScenarioSpec spec = scenarios[s];
      spec.overall_rate = rate;
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(replicates));
      for (std::int64_t rep = 0; rep < replicates; ++rep, ++stream) {
        const RealizedAudit audit = scenario_audit(pop, spec, mix_seed(seed, stream));
        values.push_back(realized_ratio_variance(audit));
      }
      std::sort(values.begin(), values.end());
      BandRow row;
      row.scenario = s;
      row.rate = rate;
      row.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size());
      row.p05 = percentile(values, 0.05);
      row.p95 = percentile(values, 0.95);
      rows.push_back(row);
    }
  }
  return rows;
}

CoverageResult coverage_experiment(const ClaimPopulation& pop, const ErrorModel& model,
                                   std::int64_t n, EstimatorKind estimator, double confidence,
                                   std::int64_t replicates, std::uint64_t seed) {
  if (n < 2 || n > pop.size()) throw std::domain_error("sample size must lie in [2,N]");
  if (replicates < 1) throw std::domain_error("need at least one replicate");
  const double z = normal_quantile(0.5 + confidence / 2);
  const double tau_x = dollars(pop.total_cents());
  const auto big_n = static_cast<double>(pop.size());
  const auto sizes = entry_sizes(pop);

  std::int64_t covered = 0;
  double halfwidth_sum = 0;
  std::vector<double> scratch;
  for (std::int64_t rep = 0; rep < replicates; ++rep) {
    const std::uint64_t audit_seed = mix_seed(seed, 2 * static_cast<std::uint64_t>(rep));
    RealizedAudit audit;
    if (const auto* aon = std::get_if<AllOrNothingModel>(&model)) {
      const auto errors = static_cast<std::int64_t>(std::llround(aon->rate * big_n));
      audit = all_or_nothing_audit(pop, errors, audit_seed);
    } else {
      audit = scenario_audit(pop, std::get<ScenarioSpec>(model), audit_seed);
    }

    Rng rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(rep) + 1));
    const auto sampled = sample_group_counts(rng, sizes, n);

    double sum_x = 0, sum_x2 = 0, sum_y = 0, sum_y2 = 0, sum_xy = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const std::int64_t s = sampled[i];
      if (s == 0) continue;
      const ClaimEntry& entry = pop.entries()[i];
      const EntryErrorDraw& draw = audit.per_entry[i];
      const double x = dollars(entry.amount_cents);
      const auto partial_count = static_cast<std::int64_t>(draw.partial_y.size());
      const std::int64_t error_count = draw.full + partial_count;

      const std::int64_t hit_errors = hypergeometric(rng, entry.count, error_count, s);
      const std::int64_t hit_partials = hypergeometric(rng, error_count, partial_count, hit_errors);
      const std::int64_t hit_full = hit_errors - hit_partials;

      sum_x += static_cast<double>(s) * x;
      sum_x2 += static_cast<double>(s) * x * x;
      sum_y += static_cast<double>(hit_full) * x;
      sum_y2 += static_cast<double>(hit_full) * x * x;
      sum_xy += static_cast<double>(hit_full) * x * x;
      if (hit_partials == partial_count) {
        for (double y : draw.partial_y) {
          sum_y += y;
          sum_y2 += y * y;
          sum_xy += x * y;
        }
      } else if (hit_partials > 0) {
        sample_values(scratch, draw.partial_y, hit_partials, rng);
        for (double y : scratch) {
          sum_y += y;
          sum_y2 += y * y;
          sum_xy += x * y;
        }
      }
    }

    const auto nd = static_cast<double>(n);
    double estimate = 0, sample_var = 0;
    if (estimator == EstimatorKind::simple_expansion) {
      estimate = big_n / nd * sum_y;
      const double mean_y = sum_y / nd;
      sample_var = std::max(0.0, (sum_y2 - nd * mean_y * mean_y) / (nd - 1));
    } else {
      const double r_hat = sum_y / sum_x;
      estimate = r_hat * tau_x;
      sample_var =
          std::max(0.0, (sum_y2 - 2 * r_hat * sum_xy + r_hat * r_hat * sum_x2) / (nd - 1));
    }
    const double variance = big_n * big_n * (1.0 - nd / big_n) * sample_var / nd;
    const double halfwidth = z * std::sqrt(std::max(0.0, variance));
    halfwidth_sum += halfwidth;

    const double miss = std::abs(estimate - audit.total_disallowed);
    if (halfwidth > 0 ? miss <= halfwidth
                      : miss <= 1e-9 * std::max(1.0, std::abs(audit.total_disallowed)))
      ++covered;
  }
  return CoverageResult{static_cast<double>(covered) / static_cast<double>(replicates),
                        halfwidth_sum / static_cast<double>(replicates), replicates};
}

ClaimPopulation make_edwards_like(std::uint64_t seed) {
  constexpr std::int64_t kSize = 9000;
  constexpr double kTarget = 1.1e6;
  constexpr double kSpikeWeight = 0.55;  // share of claims in the $100-$150 spike
  Rng rng(seed);
  std::vector<double> raw(kSize);
  for (double& v : raw) {
    if (rng.uniform01() < kSpikeWeight)
      v = rng.uniform(100.0, 150.0);
    else
      v = std::exp(std::log(80.0) + 0.8 * standard_normal(rng));
  }
  const double scale = kTarget / std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<Cents> amounts(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    amounts[i] = std::max<Cents>(1, static_cast<Cents>(std::llround(raw[i] * scale * 100.0)));
  return ClaimPopulation::from_amounts(amounts);
}

ClaimPopulation make_neter_like(std::uint64_t seed) {
  constexpr std::int64_t kSize = 4033;
  constexpr double kTarget = 7.5e6;
  Rng rng(seed);
  std::vector<double> raw(kSize);
  for (double& v : raw) v = std::exp(std::log(900.0) + 1.2 * standard_normal(rng));
  const double scale = kTarget / std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<Cents> amounts(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    amounts[i] = std::max<Cents>(1, static_cast<Cents>(std::llround(raw[i] * scale * 100.0)));
  return ClaimPopulation::from_amounts(amounts);
}

SubsetEnumeration enumerate_error_subsets(const ClaimPopulation& pop, std::int64_t error_count) {
  const std::int64_t n = pop.size();
  if (error_count < 0 || error_count > n)
    throw std::domain_error("error count must lie in [0,N]");
  if (binomial_guarded(n, error_count, 1'000'000) > 1'000'000)
    throw std::domain_error("too many subsets to enumerate");

  const std::vector<double> x = pop.expand_dollars();
  const PopulationMoments m = moments(pop);
  const double pi = static_cast<double>(error_count) / static_cast<double>(n);
  const double tau_x = m.total;
  const double tau_x2 = m.total_sq;
  const double k = m.mean + (m.mean > 0 ? m.variance / (2 * m.mean) : 0.0);

  SubsetEnumeration out;
  if (error_count == 0) {
    out.subsets = 1;
    return out;
  }

  std::vector<std::int64_t> idx(static_cast<std::size_t>(error_count));
  std::iota(idx.begin(), idx.end(), 0);
  double sum_var = 0, sum_mean = 0, sum_mean_sq = 0, sum_sigma_r = 0, sum_cross = 0;
  std::int64_t subsets = 0, positive = 0;
  do {
    double s1 = 0, s2 = 0;
    for (std::int64_t i : idx) {
      const double v = x[static_cast<std::size_t>(i)];
      s1 += v;
      s2 += v * v;
    }
    const auto ne = static_cast<double>(error_count);
    const double xbar = s1 / ne;
    const double xbar2 = s2 / ne;
    const double cond_mean = pi * xbar;
    const double cond_var = pi * xbar2 - cond_mean * cond_mean;
    const double n_sigma_r = tau_x2 / (tau_x * tau_x) * s1 * s1 + s2 - 2 * s1 * s2 / tau_x;

    sum_var += cond_var;
    sum_mean += cond_mean;
    sum_mean_sq += cond_mean * cond_mean;
    sum_sigma_r += n_sigma_r / static_cast<double>(n);
    sum_cross += xbar * xbar2;
    if (s2 - k * s1 > 0) ++positive;
    ++subsets;
  } while (next_combination(idx, n));

  const auto count = static_cast<double>(subsets);
  out.mean_conditional_variance = sum_var / count;
  out.variance_of_conditional_mean = sum_mean_sq / count - (sum_mean / count) * (sum_mean / count);
  out.mean_ratio_variance = sum_sigma_r / count;
  out.mean_xbar_cross = sum_cross / count;
  out.criterion_positive_fraction = static_cast<double>(positive) / count;
  out.subsets = subsets;
  return out;
}

double enumerate_partial_variance(const ClaimPopulation& pop, std::int64_t total_errors,
                                  std::int64_t partial_errors, double q) {
  const std::int64_t n = pop.size();
  if (total_errors < 1 || total_errors > n || partial_errors < 0 ||
      partial_errors > total_errors)
    throw std::domain_error("inconsistent partial enumeration counts");
  const std::int64_t outer = binomial_guarded(n, total_errors, 1'000'000);
  const std::int64_t inner = binomial_guarded(total_errors, partial_errors, 1'000'000);
  if (outer > 1'000'000 || inner > 1'000'000 || outer * inner > 1'000'000)
    throw std::domain_error("too many configurations to enumerate");

  const std::vector<double> x = pop.expand_dollars();
  const auto nd = static_cast<double>(n);

  double sum = 0;
  std::int64_t cases = 0;
  std::vector<std::int64_t> errors(static_cast<std::size_t>(total_errors));
  std::iota(errors.begin(), errors.end(), 0);
  do {
    std::vector<std::int64_t> part(static_cast<std::size_t>(partial_errors));
    std::iota(part.begin(), part.end(), 0);
    do {
      double sum_y = 0, sum_y2 = 0;
      std::size_t p = 0;
      for (std::size_t t = 0; t < errors.size(); ++t) {
        const double value = x[static_cast<std::size_t>(errors[t])];
        const bool is_partial =
            p < part.size() && part[p] == static_cast<std::int64_t>(t);
        const double y = is_partial ? q * value : value;
        if (is_partial) ++p;
        sum_y += y;
        sum_y2 += y * y;
      }
      sum += sum_y2 / nd - (sum_y / nd) * (sum_y / nd);
      ++cases;
    } while (next_combination(part, total_errors));
  } while (next_combination(errors, n));
  return sum / static_cast<double>(cases);
}

}  // namespace auditplan
