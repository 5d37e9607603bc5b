#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "auditplan/rng.hpp"

using namespace auditplan;

namespace {

double exact_hyper_pmf(std::int64_t m, std::int64_t g, std::int64_t k, std::int64_t h) {
  auto lc = [](std::int64_t n, std::int64_t r) {
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(r + 1)) -
           std::lgamma(static_cast<double>(n - r + 1));
  };
  return std::exp(lc(g, h) + lc(m - g, k - h) - lc(m, k));
}

}  // namespace

TEST_CASE("bounded draws stay in range and hit both ends") {
  Rng rng(1);
  bool low = false, high = false;
  for (int i = 0; i < 10'000; ++i) {
    const std::uint64_t v = rng.below(7);
    CHECK(v < 7);
    low = low || v == 0;
    high = high || v == 6;
  }
  CHECK(low);
  CHECK(high);
}

TEST_CASE("seed mixing decorrelates streams") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(1, 5) == mix_seed(1, 5));
}

TEST_CASE("narrow-support hypergeometric matches the exact pmf") {
  Rng rng(17);
  const std::int64_t m = 10, g = 4, k = 5;
  std::vector<std::int64_t> freq(5, 0);
  const std::int64_t draws = 100'000;
  for (std::int64_t i = 0; i < draws; ++i)
    ++freq[static_cast<std::size_t>(hypergeometric(rng, m, g, k))];
  double chi2 = 0;
  for (std::int64_t h = 0; h <= 4; ++h) {
    const double expected = static_cast<double>(draws) * exact_hyper_pmf(m, g, k, h);
    const double diff = static_cast<double>(freq[static_cast<std::size_t>(h)]) - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 < 13.28);  // 99% point of chi-square with 4 dof
}

TEST_CASE("wide-support hypergeometric has the right moments") {
  Rng rng(23);
  const std::int64_t m = 100'000, g = 40'000, k = 30'000;
  const double mean = static_cast<double>(k) * g / m;
  const double variance = static_cast<double>(k) * (static_cast<double>(g) / m) *
                          (1.0 - static_cast<double>(g) / m) *
                          (static_cast<double>(m - k) / static_cast<double>(m - 1));
  const std::int64_t draws = 20'000;
  double sum = 0, sum_sq = 0;
  for (std::int64_t i = 0; i < draws; ++i) {
    const auto v = static_cast<double>(hypergeometric(rng, m, g, k));
    CHECK(v >= 0);
    CHECK(v <= 30'000);
    sum += v;
    sum_sq += v * v;
  }
  const double sample_mean = sum / static_cast<double>(draws);
  const double sample_var = sum_sq / static_cast<double>(draws) - sample_mean * sample_mean;
  const double mean_se = std::sqrt(variance / static_cast<double>(draws));
  CHECK(std::abs(sample_mean - mean) < 5 * mean_se);
  CHECK(sample_var > 0.9 * variance);
  CHECK(sample_var < 1.1 * variance);
}

TEST_CASE("hypergeometric degenerate corners need no randomness") {
  Rng rng(5);
  CHECK(hypergeometric(rng, 10, 0, 7) == 0);
  CHECK(hypergeometric(rng, 10, 10, 7) == 7);
  CHECK(hypergeometric(rng, 10, 4, 0) == 0);
  CHECK(hypergeometric(rng, 10, 4, 10) == 4);
  CHECK_THROWS_AS(hypergeometric(rng, 10, 11, 2), std::invalid_argument);
}

TEST_CASE("group-count sampling: totals, bounds, and the complement path") {
  Rng rng(31);
  const std::vector<std::int64_t> sizes{3, 1, 7, 2, 11, 1};
  std::int64_t population = 0;
  for (std::int64_t s : sizes) population += s;
  for (std::int64_t draws : {0L, 1L, 5L, 13L, 20L, population}) {
    for (int rep = 0; rep < 200; ++rep) {
      const auto counts = sample_group_counts(rng, sizes, draws);
      std::int64_t total = 0;
      for (std::size_t i = 0; i < sizes.size(); ++i) {
        CHECK(counts[i] >= 0);
        CHECK(counts[i] <= sizes[i]);
        total += counts[i];
      }
      CHECK(total == draws);
    }
  }
  CHECK_THROWS_AS(sample_group_counts(rng, sizes, population + 1), std::invalid_argument);
}

TEST_CASE("group-count sampling matches hypergeometric marginals") {
  // Marginal count of one group under subset sampling is hypergeometric.
  Rng rng(37);
  const std::vector<std::int64_t> sizes{6, 14};
  const std::int64_t draws = 9;  // above half, exercising the complement path
  std::vector<std::int64_t> freq(7, 0);
  const std::int64_t reps = 50'000;
  for (std::int64_t i = 0; i < reps; ++i)
    ++freq[static_cast<std::size_t>(sample_group_counts(rng, sizes, draws)[0])];
  double chi2 = 0;
  int dof = -1;
  for (std::int64_t h = 0; h <= 6; ++h) {
    const double p = exact_hyper_pmf(20, 6, draws, h);
    if (p * static_cast<double>(reps) < 5) continue;
    const double expected = static_cast<double>(reps) * p;
    const double diff = static_cast<double>(freq[static_cast<std::size_t>(h)]) - expected;
    chi2 += diff * diff / expected;
    ++dof;
  }
  CHECK(chi2 < 18.48);  // 99% point of chi-square with up to 7 cells
}
