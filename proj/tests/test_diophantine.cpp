#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mdlab/core.hpp"
#include "mdlab/diophantine.hpp"
#include "mdlab/oracles.hpp"

using namespace mdlab;

TEST(ContinuedFraction, GoldenAllOnes) {
  const auto cf = cf_expand(IrrationalSpec::golden(), 40);
  ASSERT_EQ(cf.quotients.size(), 41u);
  EXPECT_EQ(cf.quotients[0], 0);
  for (std::size_t k = 1; k < cf.quotients.size(); ++k) EXPECT_EQ(cf.quotients[k], 1) << k;
  EXPECT_FALSE(cf.terminated);
}

TEST(ContinuedFraction, SqrtTwo) {
  const auto cf = cf_expand(IrrationalSpec::quadratic(0, 2, 1), 30);
  EXPECT_EQ(cf.quotients[0], 1);
  for (std::size_t k = 1; k < cf.quotients.size(); ++k) EXPECT_EQ(cf.quotients[k], 2) << k;
}

TEST(ContinuedFraction, RationalTerminates) {
  const auto cf = cf_expand(IrrationalSpec::rational(3, 8), 10);
  const std::vector<BigInt> want{0, 2, 1, 2};
  EXPECT_EQ(cf.quotients, want);
  EXPECT_TRUE(cf.terminated);
  EXPECT_FALSE(cf.irrational);
}

TEST(ContinuedFraction, LiteralRunsOutOfPrecision) {
  // 20 digits of the golden mean cannot support 80 quotients.
  const auto a = IrrationalSpec::literal("0.61803398874989484820", "1e-20");
  EXPECT_NO_THROW(cf_expand(a, 10));
  EXPECT_THROW(cf_expand(a, 80), PrecisionError);
}

TEST(Convergents, GoldenAreFibonacciRatios) {
  const auto cf = cf_expand(IrrationalSpec::golden(), 30);
  const auto conv = convergents(cf.quotients);
  const auto fib = oracle::fibonacci_convergents(30);
  // Convergent k of [0; 1, 1, ...] is F_k / F_{k+1}.
  for (int k = 1; k <= 30; ++k) {
    EXPECT_EQ(conv[k].p, fib[k].first) << k;
    EXPECT_EQ(conv[k].q, fib[k].second) << k;
  }
  EXPECT_TRUE(check_convergents(cf.quotients, conv, IrrationalSpec::golden()).ok());
}

TEST(Convergents, DetectsCorruption) {
  const auto a = IrrationalSpec::quadratic(0, 2, 1);
  const auto cf = cf_expand(a, 10);
  auto conv = convergents(cf.quotients);
  conv[5].p += 1;
  const auto c = check_convergents(cf.quotients, conv, a);
  EXPECT_FALSE(c.ok());
  EXPECT_FALSE(c.determinant);
}

TEST(Distance, GoldenValue) {
  const auto d = dist_to_integers(1, IrrationalSpec::golden());
  EXPECT_NEAR(d.value, (3.0 - std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_LT(d.error_bound, 1e-30);
  const auto r = dist_to_integers(8, IrrationalSpec::rational(3, 8));
  EXPECT_TRUE(r.exact_zero);
}

TEST(Distance, BatchMatchesSingle) {
  const auto a = IrrationalSpec::quadratic(1, 3, 2);
  const auto all = distances_up_to(500, a);
  for (long long k : {1LL, 7LL, 123LL, 500LL}) EXPECT_NEAR(all[k - 1], dist_to_integers(k, a).value, 1e-15);
}

TEST(Audit, GoldenViolatorsAreFibonacci) {
  const auto rep = badly_approximable_audit(IrrationalSpec::golden(), 0.1, 5000);
  std::set<long long> fib;
  for (const auto& [p, q] : oracle::fibonacci_convergents(25)) fib.insert(static_cast<long long>(q));
  ASSERT_FALSE(rep.violations.empty());
  for (const auto& [k, d] : rep.violations) {
    EXPECT_TRUE(fib.count(k)) << k;
    EXPECT_LT(d, std::pow(double(k), -1.1));
  }
  // Minimum of k d(ka) sits at k = 1; along large Fibonacci k it tends to 1/sqrt5.
  EXPECT_EQ(rep.argmin_k, 1);
  EXPECT_NEAR(rep.min_k_times_d, (3.0 - std::sqrt(5.0)) / 2.0, 1e-14);
  EXPECT_NEAR(4181.0 * dist_to_integers(4181, IrrationalSpec::golden()).value, 1.0 / std::sqrt(5.0), 1e-6);
}

TEST(Audit, LargeEpsilonHasNoLateViolations) {
  const auto rep = badly_approximable_audit(IrrationalSpec::golden(), 1.0, 20000);
  EXPECT_TRUE(rep.violations_beyond(2).empty());
}

TEST(Paroux, SingleModeIsFinite) {
  const auto a = IrrationalSpec::golden();
  const auto r = paroux_sum(FourierSpec::single_mode(1.0), a, 64);
  EXPECT_EQ(r.verdict, "finite");
  const double d = dist_to_integers(1, a).value;
  EXPECT_NEAR(r.partial.back(), 2.0 / (d * d), 1e-9);
}

TEST(Paroux, PowerCoefficientsDecayForGolden) {
  const auto r = paroux_sum(FourierSpec::power(1.0, 3.0, 4096), IrrationalSpec::golden(), 4096);
  EXPECT_EQ(r.verdict, "decaying");
  EXPECT_LT(r.block_ratio, 1.0);
}

TEST(BisCircle, InequalityHolds) {
  const auto a = IrrationalSpec::golden();
  const auto r = bis_series_circle(FourierSpec::single_mode(1.0), a, 200);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.first_violation, -1);
  EXPECT_NEAR(r.right, 2.0 / dist_to_integers(2, a).value, 1e-9);
  EXPECT_LE(r.left.back(), r.right);
}

TEST(Irrational, RejectsPerfectSquares) {
  EXPECT_THROW(IrrationalSpec::quadratic(0, 4, 1), DomainError);
  EXPECT_THROW(IrrationalSpec::quadratic(0, 5, 0), DomainError);
  EXPECT_THROW(IrrationalSpec::rational(1, 0), DomainError);
}
