#include "auditplan/stratify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace auditplan {

namespace {

struct PrefixTables {
  // prefix[i] = exact totals of entries[0..i], converted to dollars
  std::vector<BlockTotals> prefix;
  BlockTotals whole;
};

PrefixTables build_prefix(const ClaimPopulation& pop) {
  PrefixTables t;
  t.prefix.reserve(pop.entries().size());
  std::int64_t n = 0;
  __int128 s1 = 0, s2 = 0, s3 = 0;  // cents, cents^2, cents^3
  for (const ClaimEntry& e : pop.entries()) {
    n += e.count;
    const auto a = static_cast<__int128>(e.amount_cents);
    s1 += a * e.count;
    s2 += a * a * e.count;
    s3 += a * a * a * e.count;
    t.prefix.push_back(BlockTotals{n, static_cast<double>(s1) / 1e2,
                                   static_cast<double>(s2) / 1e4,
                                   static_cast<double>(s3) / 1e6});
  }
  t.whole = t.prefix.back();
  return t;
}

BlockTotals block_minus(const BlockTotals& whole, const BlockTotals& part) {
  return BlockTotals{whole.count - part.count, whole.sum - part.sum,
                     whole.sum_sq - part.sum_sq, whole.sum_cube - part.sum_cube};
}

double ratio_kernel(const BlockTotals& b) {
  const auto n = static_cast<double>(b.count);
  const double mean = b.sum / n;
  const double mean_sq = b.sum_sq / n;
  if (b.count < 2) return mean_sq;
  const double variance = std::max(0.0, mean_sq - mean * mean);
  const double cov_x_x2 = b.sum_cube / n - mean * mean_sq;
  const double fpc = n / (n - 1.0);
  return mean_sq + fpc * (b.sum_sq / (b.sum * b.sum) * variance - 2.0 * cov_x_x2 / b.sum);
}

// N_h * sigma_yh up to the rate factor: for ratio designs sqrt(pi*(1-pi)) is
// a common constant and is left out so boundary choice is rate-free.
// An empty block contributes nothing, which keeps the within-run objective
// defined over the whole split range.
double block_term(EstimatorKind kind, double pi, const BlockTotals& b) {
  if (b.count < 0) throw std::domain_error("negative stratum size");
  if (b.count == 0) return 0.0;
  if (kind == EstimatorKind::simple_expansion) {
    const auto n = static_cast<double>(b.count);
    return std::sqrt(std::max(0.0, pi * n * b.sum_sq - pi * pi * b.sum * b.sum));
  }
  return static_cast<double>(b.count) * std::sqrt(std::max(0.0, ratio_kernel(b)));
}

double rate_factor(EstimatorKind kind, double pi) {
  return kind == EstimatorKind::ratio ? std::sqrt(pi * (1 - pi)) : 1.0;
}

void check_rate(EstimatorKind kind, double pi) {
  if (kind == EstimatorKind::simple_expansion) {
    if (!(pi > 0 && pi <= 1))
      throw std::domain_error("stratification under simple expansion needs a rate in (0,1]");
  } else if (!(pi > 0 && pi < 1)) {
    throw std::domain_error("stratification under ratio estimation needs a rate in (0,1)");
  }
}

StratumStats stats_from_block(const BlockTotals& b, EstimatorKind kind, double pi) {
  StratumStats s;
  s.n_units = b.count;
  s.total = b.sum;
  s.total_sq = b.sum_sq;
  s.mean = b.sum / static_cast<double>(b.count);
  s.mean_sq = b.sum_sq / static_cast<double>(b.count);
  s.sigma_y = rate_factor(kind, pi) * block_term(kind, pi, b) / static_cast<double>(b.count);
  return s;
}

}  // namespace

BlockTotals population_block(const ClaimPopulation& pop) {
  return build_prefix(pop).whole;
}

BlockTotals block_plus_run(const BlockTotals& block, double value, std::int64_t copies) {
  const auto c = static_cast<double>(copies);
  return BlockTotals{block.count + copies, block.sum + c * value,
                     block.sum_sq + c * value * value,
                     block.sum_cube + c * value * value * value};
}

double two_strata_objective(EstimatorKind kind, double pi, const BlockTotals& stratum1,
                            const BlockTotals& stratum2) {
  return block_term(kind, pi, stratum1) + block_term(kind, pi, stratum2);
}

double Stratification::se_for(std::int64_t n) const {
  if (n < 1) throw std::domain_error("sample size must be positive");
  return objective / std::sqrt(static_cast<double>(n));
}

std::vector<std::int64_t> run_split_candidates(const BlockTotals& prefix, double run_value,
                                               std::int64_t run_count, const BlockTotals& suffix,
                                               double pi) {
  if (run_count < 1) throw std::domain_error("run must contain at least one claim");
  if (!(pi > 0 && pi <= 1)) throw std::domain_error("rate must lie in (0,1]");
  const double y = run_value;
  const auto np = static_cast<double>(run_count);
  const double c1 = prefix.sum_sq + static_cast<double>(prefix.count) * y * y - 2 * pi * prefix.sum * y;
  const double c2 = suffix.sum_sq + static_cast<double>(suffix.count) * y * y + 2 * np * y * y -
                    2 * pi * y * (suffix.sum + np * y);
  const double c3 = 2 * y * y * (1 - pi);
  const double c4 = (static_cast<double>(suffix.count) + np) * (suffix.sum_sq + np * y * y) -
                    pi * (suffix.sum + np * y) * (suffix.sum + np * y);
  const double c5 = static_cast<double>(prefix.count) * prefix.sum_sq - pi * prefix.sum * prefix.sum;

  const double a = 0.5 * c3 * (c1 * c1 - c2 * c2 + 2 * c3 * (c4 - c5));
  const double b = -c1 * c2 * (c1 + c2) + 2 * c3 * (c1 * c4 + c2 * c5);
  const double c = c1 * c1 * c4 - c2 * c2 * c5;

  std::vector<double> roots;
  if (a == 0) {
    if (b != 0) roots.push_back(-c / b);
  } else {
    double disc = b * b - 4 * a * c;
    // Rescue a knife-edge tangency lost to rounding.
    if (disc < 0 && disc > -1e-12 * std::max(b * b, std::abs(4 * a * c))) disc = 0;
    if (disc >= 0) {
      const double s = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(s, b));
      roots.push_back(q / a);
      if (q != 0) roots.push_back(c / q);
      else roots.push_back(q / a);
    }
  }

  std::vector<std::int64_t> candidates;
  for (double r : roots) {
    if (!(r > 0 && r < np)) continue;
    const auto lo = static_cast<std::int64_t>(std::floor(r));
    const auto hi = static_cast<std::int64_t>(std::ceil(r));
    candidates.push_back(std::clamp<std::int64_t>(lo, 0, run_count));
    candidates.push_back(std::clamp<std::int64_t>(hi, 0, run_count));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  return candidates;
}

namespace {

// Interior split counts to evaluate for a ratio-kind run: exhaustive for
// short runs, otherwise a shrinking grid scan (heuristic; the closed-form
// shortcut is only proven for the expansion-kind objective).
std::vector<std::int64_t> ratio_run_candidates(
    std::int64_t run_count, const std::function<double(std::int64_t)>& objective_at) {
  std::vector<std::int64_t> out;
  if (run_count <= 65) {
    for (std::int64_t k = 1; k < run_count; ++k) out.push_back(k);
    return out;
  }
  std::int64_t lo = 1, hi = run_count - 1;
  std::int64_t best = lo;
  double best_value = std::numeric_limits<double>::infinity();
  while (true) {
    const std::int64_t step = std::max<std::int64_t>(1, (hi - lo) / 64);
    for (std::int64_t k = lo; k <= hi; k += step) {
      const double v = objective_at(k);
      if (v < best_value) {
        best_value = v;
        best = k;
      }
    }
    if (step == 1) break;
    lo = std::max<std::int64_t>(1, best - step);
    hi = std::min<std::int64_t>(run_count - 1, best + step);
  }
  out.push_back(best);
  return out;
}

}  // namespace

Stratification optimal_two_strata(const ClaimPopulation& pop, ErrorRate pi, EstimatorKind kind,
                                  bool allow_run_split) {
  if (pop.size() < 2) throw std::domain_error("stratification needs at least two claims");
  check_rate(kind, pi.value);
  const PrefixTables tables = build_prefix(pop);
  const auto& entries = pop.entries();
  const std::size_t unique = entries.size();

  Boundary best_boundary{0, 0};
  double best_value = std::numeric_limits<double>::infinity();
  bool found = false;

  const auto block_before = [&](std::size_t e) {  // totals of entries [0, e)
    return e == 0 ? BlockTotals{} : tables.prefix[e - 1];
  };
  const auto evaluate = [&](std::size_t e, std::int64_t k) {
    const BlockTotals s1 = block_plus_run(block_before(e), dollars(entries[e].amount_cents), k);
    const BlockTotals s2 = block_minus(tables.whole, s1);
    return two_strata_objective(kind, pi.value, s1, s2);
  };

  for (std::size_t e = 0; e < unique; ++e) {
    std::vector<std::int64_t> splits;
    const std::int64_t run = entries[e].count;
    const bool interior_needed = (allow_run_split || unique == 1) && run >= 2;
    if (interior_needed) {
      if (kind == EstimatorKind::simple_expansion) {
        splits = run_split_candidates(block_before(e), dollars(entries[e].amount_cents), run,
                                      block_minus(tables.whole, tables.prefix[e]), pi.value);
        std::erase_if(splits, [&](std::int64_t k) { return k <= 0 || k >= run; });
        // Where the run has no neighbor, the stationarity equation's k=0 or
        // k=n' endpoint is an empty design, so the feasible edge split is a
        // candidate in its own right.
        if (e == 0) splits.push_back(1);
        if (e + 1 == unique) splits.push_back(run - 1);
        std::sort(splits.begin(), splits.end());
        splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
      } else {
        splits = ratio_run_candidates(run, [&](std::int64_t k) { return evaluate(e, k); });
      }
    }
    if (e + 1 < unique) splits.push_back(run);  // plain boundary after this entry
    for (std::int64_t k : splits) {
      const double value = evaluate(e, k);
      if (value < best_value) {
        best_value = value;
        best_boundary = Boundary{e, k};
        found = true;
      }
    }
  }
  if (!found) throw std::domain_error("no feasible two-stratum design");

  Stratification out = make_stratification(pop, best_boundary, pi, kind);
  out.degenerate = unique == 1;
  return out;
}

Stratification make_stratification(const ClaimPopulation& pop, Boundary boundary, ErrorRate pi,
                                   EstimatorKind kind) {
  check_rate(kind, pi.value);
  const auto& entries = pop.entries();
  if (boundary.entry_index >= entries.size())
    throw std::invalid_argument("boundary entry out of range");
  const std::int64_t run = entries[boundary.entry_index].count;
  if (boundary.take_count < 1 || boundary.take_count > run)
    throw std::invalid_argument("boundary split count out of range");

  const PrefixTables tables = build_prefix(pop);
  const BlockTotals before =
      boundary.entry_index == 0 ? BlockTotals{} : tables.prefix[boundary.entry_index - 1];
  const BlockTotals s1 = block_plus_run(before, dollars(entries[boundary.entry_index].amount_cents),
                                        boundary.take_count);
  const BlockTotals s2 = block_minus(tables.whole, s1);
  if (s2.count <= 0) throw std::invalid_argument("boundary leaves the upper stratum empty");

  Stratification out;
  out.boundary = boundary;
  out.kind = kind;
  out.pi = pi.value;
  out.strata = {stats_from_block(s1, kind, pi.value), stats_from_block(s2, kind, pi.value)};
  out.objective = rate_factor(kind, pi.value) * two_strata_objective(kind, pi.value, s1, s2);
  return out;
}

std::vector<Boundary> cum_sqrt_f(const ClaimPopulation& pop, int strata, int bins) {
  if (strata < 2) throw std::domain_error("need at least two strata");
  if (bins < strata) throw std::domain_error("need at least as many bins as strata");
  const auto& entries = pop.entries();
  if (entries.size() < static_cast<std::size_t>(strata))
    throw std::domain_error("fewer unique values than strata");

  const double lo = dollars(entries.front().amount_cents);
  const double hi = dollars(entries.back().amount_cents);
  const double width = (hi - lo) / bins;
  std::vector<double> freq(static_cast<std::size_t>(bins), 0.0);
  for (const ClaimEntry& e : entries) {
    auto bin = static_cast<std::int64_t>((dollars(e.amount_cents) - lo) / width);
    bin = std::clamp<std::int64_t>(bin, 0, bins - 1);
    freq[static_cast<std::size_t>(bin)] += static_cast<double>(e.count);
  }
  const auto nonempty = std::count_if(freq.begin(), freq.end(), [](double f) { return f > 0; });
  if (nonempty < strata)
    throw std::domain_error("fewer nonempty histogram bins than strata");

  std::vector<double> cumulative(freq.size());
  double running = 0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    running += std::sqrt(freq[i]);
    cumulative[i] = running;
  }

  std::vector<Boundary> boundaries;
  std::size_t min_entry = 0;
  for (int cut = 1; cut < strata; ++cut) {
    const double target = running * cut / strata;
    const auto bin_it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
    const auto bin = static_cast<std::size_t>(bin_it - cumulative.begin());
    const double cut_amount = lo + width * static_cast<double>(bin + 1);
    // Snap to the largest unique value at or below the cut.
    if (min_entry > entries.size() - 2)
      throw std::domain_error("cumulative sqrt(f) cuts collapsed onto the top value");
    std::size_t idx = entries.size() - 1;
    while (idx > 0 && dollars(entries[idx].amount_cents) > cut_amount) --idx;
    idx = std::clamp(idx, min_entry, entries.size() - 2);
    boundaries.push_back(Boundary{idx, entries[idx].count});
    min_entry = idx + 1;
  }
  return boundaries;
}

double srs_objective(const ClaimPopulation& pop, ErrorRate pi, EstimatorKind kind) {
  check_rate(kind, pi.value);
  const BlockTotals whole = population_block(pop);
  return rate_factor(kind, pi.value) * block_term(kind, pi.value, whole);
}

Allocation optimal_allocation(std::span<const StratumStats> strata, std::int64_t n) {
  std::int64_t population = 0;
  for (const StratumStats& s : strata) population += s.n_units;
  if (n < 0 || n > population) throw std::domain_error("allocation size out of range");

  Allocation out;
  out.n_h.assign(strata.size(), 0);

  std::vector<double> weight(strata.size());
  double total_weight = 0;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    weight[h] = static_cast<double>(strata[h].n_units) * strata[h].sigma_y;
    total_weight += weight[h];
  }
  if (total_weight <= 0) {
    out.proportional_fallback = true;
    for (std::size_t h = 0; h < strata.size(); ++h)
      weight[h] = static_cast<double>(strata[h].n_units);
  }

  // Real-valued shares with caps at stratum sizes, settled by fixed point.
  std::vector<bool> capped(strata.size(), false);
  std::vector<double> quota(strata.size(), 0.0);
  while (true) {
    double active_weight = 0;
    std::int64_t remaining = n;
    for (std::size_t h = 0; h < strata.size(); ++h) {
      if (capped[h])
        remaining -= strata[h].n_units;
      else
        active_weight += weight[h];
    }
    bool changed = false;
    for (std::size_t h = 0; h < strata.size(); ++h) {
      if (capped[h]) {
        quota[h] = static_cast<double>(strata[h].n_units);
        continue;
      }
      quota[h] = active_weight > 0
                     ? weight[h] / active_weight * static_cast<double>(remaining)
                     : 0.0;
      if (quota[h] > static_cast<double>(strata[h].n_units)) {
        capped[h] = true;
        out.capped = true;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Largest-remainder rounding of the uncapped quotas.
  std::int64_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    if (capped[h]) {
      out.n_h[h] = strata[h].n_units;
    } else {
      out.n_h[h] = static_cast<std::int64_t>(std::floor(quota[h]));
      remainders.emplace_back(quota[h] - std::floor(quota[h]), h);
    }
    assigned += out.n_h[h];
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < n; ++i) {
    const std::size_t h = remainders[i % remainders.size()].second;
    if (out.n_h[h] < strata[h].n_units) {
      ++out.n_h[h];
      ++assigned;
    }
  }
  return out;
}

void enforce_allocation_floor(Allocation& alloc, std::span<const StratumStats> strata,
                              std::int64_t floor_size) {
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const std::int64_t want = std::min(floor_size, strata[h].n_units);
    while (alloc.n_h[h] < want) {
      // Take from the largest allocation that stays above the floor.
      std::size_t donor = strata.size();
      for (std::size_t d = 0; d < strata.size(); ++d) {
        if (d == h) continue;
        if (alloc.n_h[d] > std::min(floor_size, strata[d].n_units) &&
            (donor == strata.size() || alloc.n_h[d] > alloc.n_h[donor]))
          donor = d;
      }
      if (donor == strata.size()) return;  // nothing to take; leave as is
      --alloc.n_h[donor];
      ++alloc.n_h[h];
      alloc.minimum_bumped = true;
    }
  }
}

double stratified_variance(std::span<const StratumStats> strata,
                           std::span<const std::int64_t> allocation) {
  if (strata.size() != allocation.size())
    throw std::invalid_argument("allocation size mismatch");
  double variance = 0;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const StratumStats& s = strata[h];
    const std::int64_t n_h = allocation[h];
    if (n_h < 0 || n_h > s.n_units) throw std::domain_error("stratum allocation out of range");
    if (n_h == s.n_units) continue;  // census stratum contributes nothing
    if (n_h == 0) {
      if (s.sigma_y > 0)
        throw std::domain_error("stratum with positive variance received no sample");
      continue;
    }
    const auto big_n = static_cast<double>(s.n_units);
    const double fpc = (big_n - static_cast<double>(n_h)) / (big_n - 1.0);
    variance += big_n * big_n * s.sigma_y * s.sigma_y / static_cast<double>(n_h) * fpc;
  }
  return variance;
}

StratifiedPlan stratified_sample_size(const Stratification& design, double margin,
                                      double confidence) {
  if (!(margin > 0)) throw std::domain_error("margin must be positive");
  StratifiedPlan out;
  out.z = normal_quantile(0.5 + confidence / 2);
  if (design.objective <= 0) return out;

  std::int64_t population = 0;
  std::int64_t live_strata = 0;
  for (const StratumStats& s : design.strata) {
    population += s.n_units;
    if (s.sigma_y > 0) ++live_strata;
  }
  const double raw = out.z * design.objective / margin;
  std::int64_t n = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(raw * raw)),
                                            live_strata, population);
  while (true) {
    out.allocation = optimal_allocation(design.strata, n);
    out.achieved_margin =
        out.z * std::sqrt(stratified_variance(design.strata, out.allocation.n_h));
    if (out.achieved_margin <= margin || n >= population) break;
    ++n;  // integer allocation can round a stratum short; settle upward
  }
  out.n = n;
  out.achieved_margin_no_fpc = out.z * design.objective / std::sqrt(static_cast<double>(n));
  return out;
}

}  // namespace auditplan
