#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "auditplan/simlab.hpp"
#include "auditplan/variance.hpp"
#include "support.hpp"

using namespace auditplan;
using auditplan::testing::random_expanded;
using auditplan::testing::random_population;

namespace {

ClaimPopulation one_to_four() { return ClaimPopulation::from_amounts({100, 200, 300, 400}); }

}  // namespace

TEST_CASE("all-or-nothing estimators at the endpoints") {
  const PopulationMoments m = moments(one_to_four());
  for (double pi : {0.0, 1.0}) {
    const ErrorRate rate = ErrorRate::of(pi);
    const double expected = pi == 0.0 ? 0.0 : m.variance;
    CHECK(expected_conditional_variance(m, rate).value == doctest::Approx(expected).epsilon(1e-12));
    CHECK(roberts_variance(m, rate).value == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(total_variance(m, ErrorRate::of(0)).value == 0.0);
}

TEST_CASE("three estimators on {1,2,3,4} at rate one half") {
  const PopulationMoments m = moments(one_to_four());
  const ErrorRate half = ErrorRate::of(0.5);
  CHECK(expected_conditional_variance(m, half).value ==
        doctest::Approx(25.0 / 12).epsilon(1e-12));
  CHECK(roberts_variance(m, half).value == doctest::Approx(1.71875).epsilon(1e-12));
  CHECK(total_variance(m, half).value == doctest::Approx(2.1875).epsilon(1e-12));
}

TEST_CASE("estimator ordering with gap bounds on random populations") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    ClaimPopulation pop = random_population(rng, 40, 6);
    while (pop.size() < 2) pop = random_population(rng, 40, 6);
    const PopulationMoments m = moments(pop);
    const double pi = 0.05 * static_cast<double>(1 + rng.below(19));
    const ErrorRate rate = ErrorRate::of(pi);
    const double lo = roberts_variance(m, rate).value;
    const double mid = expected_conditional_variance(m, rate).value;
    const double hi = total_variance(m, rate).value;
    const double slack = 1e-12 * std::max(1.0, hi);
    CHECK(lo <= mid + slack);
    CHECK(mid <= hi + slack);
    const double gap_bound = pi * (1 - pi) * (m.variance + m.mean * m.mean) /
                             static_cast<double>(m.n) *
                             (1.0 + static_cast<double>(m.n) / static_cast<double>(m.n - 1));
    CHECK(mid - lo <= gap_bound + slack);
    CHECK(hi - mid <= gap_bound + slack);
  }
}

TEST_CASE("conditional variance matches subset enumeration for all small populations") {
  Rng rng(3);
  for (std::int64_t n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 8; ++trial) {
      const ClaimPopulation pop = random_expanded(rng, n);
      const PopulationMoments m = moments(pop);
      for (std::int64_t ne = 0; ne <= n; ++ne) {
        const SubsetEnumeration oracle = enumerate_error_subsets(pop, ne);
        const ErrorRate rate = ErrorRate::of_count(ne, n);
        const double closed = expected_conditional_variance(m, rate).value;
        CHECK(closed ==
              doctest::Approx(oracle.mean_conditional_variance).epsilon(1e-9));
        // Law of total variance splits the unconditional variance.
        const double total = total_variance(m, rate).value;
        CHECK(total == doctest::Approx(oracle.mean_conditional_variance +
                                       oracle.variance_of_conditional_mean)
                           .epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("worst-case error rate on {1,2,3}") {
  const PopulationMoments m = moments(ClaimPopulation::from_amounts({100, 200, 300}));
  const WorstCaseErrorRate worst = worst_case_error_rate(m);
  CHECK(worst.critical_exact == doctest::Approx(13.0 / 22).epsilon(1e-12));
  CHECK(worst.critical_approx == doctest::Approx(14.0 / 24).epsilon(1e-12));
  CHECK(worst.attained == doctest::Approx(13.0 / 22).epsilon(1e-12));
  CHECK(worst.max_variance.value >
        expected_conditional_variance(m, ErrorRate::of(1.0)).value);
}

TEST_CASE("worst-case error rate of a constant population is one half") {
  const PopulationMoments m = moments(ClaimPopulation::from_amounts({700, 700, 700}));
  const WorstCaseErrorRate worst = worst_case_error_rate(m);
  CHECK(worst.attained == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(worst.critical_approx == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(worst.max_variance.value == doctest::Approx(0.25 * 49.0).epsilon(1e-12));
}

TEST_CASE("high-dispersion population pins the worst case at rate one") {
  const ClaimPopulation pop = make_neter_like(1);
  const PopulationMoments m = moments(pop);
  const WorstCaseErrorRate worst = worst_case_error_rate(m);
  CHECK(worst.critical_exact > 1.0);
  CHECK(worst.attained == 1.0);
  CHECK(worst.max_variance.value == doctest::Approx(m.variance).epsilon(1e-12));
}

TEST_CASE("worst case dominates every grid rate") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ClaimPopulation pop = random_population(rng, 30, 4);
    const PopulationMoments m = moments(pop);
    const WorstCaseErrorRate worst = worst_case_error_rate(m);
    for (int i = 0; i <= 20; ++i) {
      const double pi = static_cast<double>(i) / 20;
      CHECK(expected_conditional_variance(m, ErrorRate::of(pi)).value <=
            worst.max_variance.value * (1 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("partial-error variance frozen value and enumeration oracle") {
  const ClaimPopulation pop = one_to_four();
  const PopulationMoments m = moments(pop);
  const PartialErrorSpec spec = PartialErrorSpec::from_counts(4, 2, 1, 0.5);
  const double closed = partial_error_variance(m, spec).value;
  CHECK(closed == doctest::Approx(16.71875 / 12).epsilon(1e-12));
  CHECK(closed == doctest::Approx(enumerate_partial_variance(pop, 2, 1, 0.5)).epsilon(1e-9));
}

TEST_CASE("partial-error variance matches enumeration on small populations") {
  Rng rng(17);
  for (std::int64_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 4; ++trial) {
      const ClaimPopulation pop = random_expanded(rng, n);
      const PopulationMoments m = moments(pop);
      for (std::int64_t t = 1; t <= n; ++t) {
        for (std::int64_t p = 0; p <= t; ++p) {
          const double q = 0.1 + 0.8 * rng.uniform01();
          const PartialErrorSpec spec = PartialErrorSpec::from_counts(n, t, p, q);
          const double closed = partial_error_variance(m, spec).value;
          const double oracle = enumerate_partial_variance(pop, t, p, q);
          CHECK(closed == doctest::Approx(oracle).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("partial-error special cases collapse to the all-or-nothing forms") {
  const PopulationMoments m = moments(one_to_four());
  // No partial errors: exact equality with the conditional-expected form.
  const PartialErrorSpec no_partial = PartialErrorSpec::from_counts(4, 3, 0, 0.5);
  CHECK(partial_error_variance(m, no_partial).value ==
        doctest::Approx(expected_conditional_variance(m, ErrorRate::of(0.75)).value)
            .epsilon(1e-12));
  CHECK(partial_error_variance_bound(m, no_partial).value ==
        doctest::Approx(total_variance(m, ErrorRate::of(0.75)).value).epsilon(1e-12));
  // q near 1: a partial error pays almost nothing back, so the model converges.
  const PartialErrorSpec near_full = PartialErrorSpec::from_counts(4, 2, 1, 1 - 1e-9);
  CHECK(partial_error_variance(m, near_full).value ==
        doctest::Approx(expected_conditional_variance(m, ErrorRate::of(0.5)).value)
            .epsilon(1e-6));
}

TEST_CASE("partial bound dominates the exact value and its gap closes with N") {
  Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const ClaimPopulation pop = random_population(rng, 25, 4);
    const std::int64_t n = pop.size();
    const std::int64_t t = 1 + static_cast<std::int64_t>(rng.below(n));
    const std::int64_t p = static_cast<std::int64_t>(rng.below(t + 1));
    const double q = 0.05 + 0.9 * rng.uniform01();
    const PartialErrorSpec spec = PartialErrorSpec::from_counts(n, t, p, q);
    const PopulationMoments m = moments(pop);
    const double exact = partial_error_variance(m, spec).value;
    const double bound = partial_error_variance_bound(m, spec).value;
    CHECK(bound >= exact - 1e-12 * std::max(1.0, bound));
    // The dropped term's coefficient stays below 2 (checked, not proven here).
    if (m.n >= 2) {
      const double gap = bound - exact;
      CHECK(gap <= 2.0 * m.variance / static_cast<double>(m.n - 1) * (1 + 1e-12));
    }
  }

  // Fixed moments, growing N: the bound tightens to the exact value.
  const auto gap_at = [](std::int64_t copies) {
    std::vector<ClaimEntry> entries{{100, copies}, {200, copies}, {300, copies}, {400, copies}};
    const ClaimPopulation pop = ClaimPopulation::from_entries(std::move(entries));
    const PopulationMoments m = moments(pop);
    const PartialErrorSpec spec =
        PartialErrorSpec::from_rates(pop.size(), 0.5, 0.25, 0.5);
    return partial_error_variance_bound(m, spec).value - partial_error_variance(m, spec).value;
  };
  CHECK(gap_at(250) < gap_at(1));
  CHECK(gap_at(250'000) < 1e-5);
}

TEST_CASE("conservative partial worst case") {
  // Constant population: the worst case sits at rate one half, value c^2/4.
  const PopulationMoments flat = moments(ClaimPopulation::from_amounts({300, 300}));
  const VarianceEstimate flat_worst = worst_case_partial_variance(flat);
  CHECK(flat_worst.pi == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(flat_worst.value == doctest::Approx(0.25 * 9.0).epsilon(1e-12));

  const PopulationMoments m = moments(one_to_four());
  const VarianceEstimate worst = worst_case_partial_variance(m);
  CHECK(worst.pi == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(worst.value == doctest::Approx(2.25).epsilon(1e-12));

  for (double pi_t = 0.1; pi_t <= 1.0; pi_t += 0.1) {
    for (double pi_p = 0.0; pi_p <= pi_t + 1e-12; pi_p += 0.1) {
      for (double q = 0.1; q < 1.0; q += 0.2) {
        const PartialErrorSpec spec =
            PartialErrorSpec::from_rates(m.n, pi_t, std::min(pi_p, pi_t), q);
        CHECK(worst.value >=
              partial_error_variance_bound(m, spec).value - 1e-12);
      }
    }
  }
}

TEST_CASE("ratio variance matches subset enumeration exactly") {
  const ClaimPopulation pop = one_to_four();
  const PopulationMoments m = moments(pop);
  const double value = expected_ratio_variance(m, ErrorRate::of(0.5)).value;
  CHECK(value == doctest::Approx(19.0 / 12).epsilon(1e-12));
  CHECK(value ==
        doctest::Approx(enumerate_error_subsets(pop, 2).mean_ratio_variance).epsilon(1e-9));

  Rng rng(31);
  for (std::int64_t n = 2; n <= 8; ++n) {
    const ClaimPopulation random_pop = random_expanded(rng, n);
    const PopulationMoments rm = moments(random_pop);
    for (std::int64_t ne = 1; ne < n; ++ne) {
      const SubsetEnumeration oracle = enumerate_error_subsets(random_pop, ne);
      CHECK(expected_ratio_variance(rm, ErrorRate::of_count(ne, n)).value ==
            doctest::Approx(oracle.mean_ratio_variance).epsilon(1e-9));
    }
  }
}

TEST_CASE("ratio variance endpoints, symmetry, and grid maximum") {
  const PopulationMoments m = moments(one_to_four());
  CHECK(expected_ratio_variance(m, ErrorRate::of(0)).value == 0.0);
  CHECK(expected_ratio_variance(m, ErrorRate::of(1)).value == 0.0);
  for (int i = 1; i < 32; ++i) {  // dyadic rates, so 1 - pi is exact
    const double pi = static_cast<double>(i) / 64;
    CHECK(expected_ratio_variance(m, ErrorRate::of(pi)).value ==
          expected_ratio_variance(m, ErrorRate::of(1 - pi)).value);
  }
  double best_pi = 0;
  double best = -1;
  for (int i = 1; i <= 99; ++i) {
    const double pi = static_cast<double>(i) / 100;
    const double value = expected_ratio_variance(m, ErrorRate::of(pi)).value;
    if (value > best) {
      best = value;
      best_pi = pi;
    }
  }
  CHECK(best_pi == doctest::Approx(0.5));
}

TEST_CASE("the cross-moment identity behind the ratio variance") {
  // E[mean(x_s) * mean(x_s^2)] = (1-pi) * (N/(N-1)) * cov(x,x^2)/Ne + mean * mean_sq.
  const ClaimPopulation pop = one_to_four();
  const PopulationMoments m = moments(pop);
  const SubsetEnumeration oracle = enumerate_error_subsets(pop, 2);
  CHECK(oracle.mean_xbar_cross == doctest::Approx(125.0 / 6).epsilon(1e-12));
  const double pi = 0.5;
  const double closed = (1 - pi) * (4.0 / 3.0) * m.cov_x_x2 / 2.0 + m.mean * m.mean_sq;
  CHECK(oracle.mean_xbar_cross == doctest::Approx(closed).epsilon(1e-9));

  Rng rng(37);
  for (std::int64_t n = 3; n <= 8; ++n) {
    const ClaimPopulation random_pop = random_expanded(rng, n);
    const PopulationMoments rm = moments(random_pop);
    for (std::int64_t ne = 1; ne < n; ++ne) {
      const SubsetEnumeration e = enumerate_error_subsets(random_pop, ne);
      const double rate = static_cast<double>(ne) / static_cast<double>(n);
      const double expected = (1 - rate) * static_cast<double>(n) /
                                  static_cast<double>(n - 1) * rm.cov_x_x2 /
                                  static_cast<double>(ne) +
                              rm.mean * rm.mean_sq;
      CHECK(e.mean_xbar_cross == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("Roberts ratio analog: frozen value, endpoints, convergence") {
  const PopulationMoments m = moments(one_to_four());
  CHECK(roberts_ratio_variance(m, ErrorRate::of(0.5)).value ==
        doctest::Approx(1.1875).epsilon(1e-12));
  CHECK(roberts_ratio_variance(m, ErrorRate::of(0)).value == 0.0);

  const PopulationMoments constant = moments(ClaimPopulation::from_amounts({500, 500}));
  CHECK_THROWS_AS(roberts_ratio_variance(constant, ErrorRate::of(0.5)), std::domain_error);

  // Large population: both ratio-variance estimators approach pi(1-pi)*mean_sq.
  std::vector<ClaimEntry> entries;
  for (Cents a = 100; a <= 20000; a += 100) entries.push_back({a, 50});
  const PopulationMoments big = moments(ClaimPopulation::from_entries(std::move(entries)));
  const ErrorRate rate = ErrorRate::of(0.3);
  const double expected = expected_ratio_variance(big, rate).value;
  const double roberts = roberts_ratio_variance(big, rate).value;
  const double limit = large_n_ratio_variance(big, rate).value;
  CHECK(std::abs(roberts - expected) / expected < 1e-2);
  CHECK(std::abs(expected - limit) / limit < 1e-2);
}

TEST_CASE("domain guards") {
  CHECK_THROWS_AS(ErrorRate::of(-0.1), std::domain_error);
  CHECK_THROWS_AS(ErrorRate::of(1.1), std::domain_error);
  CHECK_THROWS_AS(ErrorRate::of_count(5, 4), std::domain_error);
  CHECK_THROWS_AS(PartialErrorSpec::from_counts(4, 2, 3, 0.5), std::domain_error);
  CHECK_THROWS_AS(PartialErrorSpec::from_counts(4, 5, 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(PartialErrorSpec::from_counts(4, 2, 1, 0.0), std::domain_error);
  CHECK_THROWS_AS(PartialErrorSpec::from_counts(4, 2, 1, 1.0), std::domain_error);
  const PopulationMoments single = moments(ClaimPopulation::from_amounts({100}));
  CHECK_THROWS_AS(expected_conditional_variance(single, ErrorRate::of(0.5)),
                  std::domain_error);
  CHECK(expected_conditional_variance(single, ErrorRate::of(1.0)).value == 0.0);
}
