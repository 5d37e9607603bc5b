#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "auditplan/planner.hpp"
#include "auditplan/simlab.hpp"
#include "support.hpp"

using namespace auditplan;
using auditplan::testing::random_population;

namespace {

// Independent quantile oracle: bisection against the erfc-based CDF.
double quantile_by_bisection(double p) {
  double lo = -10, hi = 10;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("normal quantile frozen points") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-10));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(-1.0), std::domain_error);
}

TEST_CASE("normal quantile tracks the bisection oracle to 1e-9") {
  for (double p = 0.0005; p < 1.0; p += 0.0131) {
    CHECK(std::abs(normal_quantile(p) - quantile_by_bisection(p)) < 1e-9);
  }
  for (double p : {1e-7, 1e-5, 1 - 1e-5, 1 - 1e-7}) {
    CHECK(std::abs(normal_quantile(p) - quantile_by_bisection(p)) < 1e-9);
  }
}

TEST_CASE("margin of error edge cases and a hand-computed value") {
  CHECK(margin_of_error(100, 100, 25.0, 0.95) == doctest::Approx(0.0));
  CHECK(margin_of_error(100, 10, 0.0, 0.95) == doctest::Approx(0.0));
  CHECK_THROWS_AS(margin_of_error(100, 0, 25.0, 0.95), std::domain_error);
  CHECK_THROWS_AS(margin_of_error(100, 101, 25.0, 0.95), std::domain_error);
  // z * N * sqrt(v/n * (N-n)/(N-1)) at N=100, n=25, v=400, 95%.
  const double expected =
      1.959963984540054 * 100.0 * std::sqrt(400.0 / 25.0 * 75.0 / 99.0);
  CHECK(margin_of_error(100, 25, 400.0, 0.95) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sample size at zero variance") {
  VarianceEstimate none;
  none.value = 0;
  const SamplePlan plan = sample_size(1000, none, 500.0, 0.95);
  CHECK(plan.n == 0);
  CHECK(plan.achieved_margin == 0.0);
}

TEST_CASE("sample size back-substitution on a known case") {
  VarianceEstimate v;
  v.value = 100.0;
  const SamplePlan plan = sample_size(1000, v, 500.0, 0.95);
  REQUIRE(plan.n >= 1);
  CHECK(margin_of_error(1000, plan.n, v.value, 0.95) <= 500.0);
  CHECK(margin_of_error(1000, plan.n - 1, v.value, 0.95) > 500.0);
}

TEST_CASE("sample size back-substitution holds for random requests") {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n_pop = static_cast<std::int64_t>(2 + rng.below(100'000));
    const double variance = std::exp(rng.uniform(-3, 12));
    const double margin = std::exp(rng.uniform(0, 14));
    const double confidence = rng.uniform(0.5, 0.999);
    VarianceEstimate v;
    v.value = variance;
    const SamplePlan plan = sample_size(n_pop, v, margin, confidence);
    REQUIRE(plan.n >= 1);
    REQUIRE(plan.n <= n_pop);
    CHECK(plan.achieved_margin <= margin);
    if (plan.n > 1)
      CHECK(margin_of_error(n_pop, plan.n - 1, variance, confidence) > margin);
  }
}

TEST_CASE("sample size monotonicity") {
  VarianceEstimate v;
  v.value = 250.0;
  std::int64_t last = 1'000'000;
  for (double margin = 100; margin <= 1000; margin += 50) {
    const std::int64_t n = sample_size(5000, v, margin, 0.9).n;
    CHECK(n <= last);
    last = n;
  }
  last = 0;
  for (double variance = 10; variance <= 1000; variance += 40) {
    VarianceEstimate vv;
    vv.value = variance;
    const std::int64_t n = sample_size(5000, vv, 300.0, 0.9).n;
    CHECK(n >= last);
    last = n;
  }
  last = 0;
  for (double confidence = 0.5; confidence < 0.999; confidence += 0.02) {
    const std::int64_t n = sample_size(5000, v, 300.0, confidence).n;
    CHECK(n >= last);
    last = n;
  }
}

TEST_CASE("plan routes the variance source") {
  const ClaimPopulation pop = ClaimPopulation::from_amounts({100, 200, 300, 400});
  const PopulationMoments m = moments(pop);

  PlanRequest request;
  request.margin = 1.0;
  request.confidence = 0.9;

  SUBCASE("simple expansion with a known rate") {
    request.source = GivenRate{ErrorRate::of(0.5)};
    const SamplePlan p = plan(pop, request);
    CHECK(p.variance_used.method == VarianceMethod::conditional_expected);
    CHECK(p.variance_used.value == doctest::Approx(25.0 / 12));
    CHECK_FALSE(p.conservative);
  }
  SUBCASE("zero rate needs no sample") {
    request.source = GivenRate{ErrorRate::of(0.0)};
    CHECK(plan(pop, request).n == 0);
  }
  SUBCASE("ratio conservative sizes at rate one half") {
    request.estimator = EstimatorKind::ratio;
    request.source = ConservativeRate{};
    const SamplePlan p = plan(pop, request);
    CHECK(p.conservative);
    CHECK(p.variance_used.method == VarianceMethod::ratio_expected);
    CHECK(p.variance_used.pi == doctest::Approx(0.5));
    CHECK(p.variance_used.value ==
          doctest::Approx(expected_ratio_variance(m, ErrorRate::of(0.5)).value));
  }
  SUBCASE("partial spec under ratio estimation is rejected") {
    request.estimator = EstimatorKind::ratio;
    request.source = PartialSource{PartialErrorSpec::from_counts(4, 2, 1, 0.5)};
    CHECK_THROWS_AS(plan(pop, request), std::invalid_argument);
  }
  SUBCASE("partial bound vs exact") {
    request.source = PartialSource{PartialErrorSpec::from_counts(4, 2, 1, 0.5), false};
    CHECK(plan(pop, request).variance_used.method == VarianceMethod::partial_bound);
    request.source = PartialSource{PartialErrorSpec::from_counts(4, 2, 1, 0.5), true};
    CHECK(plan(pop, request).variance_used.method == VarianceMethod::partial_expected);
  }
  SUBCASE("small plans carry a normality warning") {
    request.source = GivenRate{ErrorRate::of(0.5)};
    const SamplePlan p = plan(pop, request);
    CHECK_FALSE(p.warnings.empty());
  }
}

TEST_CASE("conservative plan uses the full-error endpoint on a dispersed population") {
  const ClaimPopulation pop = make_neter_like(3);
  const PopulationMoments m = moments(pop);
  PlanRequest request;
  request.margin = 750'000.0 / 10;
  request.confidence = 0.9;
  request.source = ConservativeRate{};
  const SamplePlan p = plan(pop, request);
  CHECK(p.variance_used.pi == 1.0);
  CHECK(p.variance_used.value == doctest::Approx(m.variance));
}

TEST_CASE("conservative plans dominate any known-rate plan") {
  Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const ClaimPopulation pop = random_population(rng, 50, 20);
    for (EstimatorKind kind : {EstimatorKind::simple_expansion, EstimatorKind::ratio}) {
      PlanRequest request;
      request.margin = moments(pop).total / 10;
      request.confidence = 0.9;
      request.estimator = kind;
      request.source = ConservativeRate{};
      const std::int64_t conservative_n = plan(pop, request).n;
      for (int i = 0; i <= 10; ++i) {
        request.source = GivenRate{ErrorRate::of(static_cast<double>(i) / 10)};
        CHECK(plan(pop, request).n <= conservative_n);
      }
    }
  }
}
