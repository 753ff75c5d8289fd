#include <gtest/gtest.h>

#include <cmath>

#include "mdlab/inequalities.hpp"
#include "mdlab/processes.hpp"

using namespace mdlab;

namespace {

// P(Bin(N, p) <= k) by direct summation.
double binom_cdf(std::uint64_t k, std::uint64_t N, double p) {
  double s = 0.0;
  for (std::uint64_t j = 0; j <= k; ++j)
    s += std::exp(std::lgamma(N + 1.0) - std::lgamma(j + 1.0) - std::lgamma(N - j + 1.0) + j * std::log(p) +
                  (N - j) * std::log1p(-p));
  return s;
}

double cp_upper_bisection(std::uint64_t k, std::uint64_t N) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (binom_cdf(k, N, mid) > 0.05 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Azuma, Formula) {
  EXPECT_NEAR(azuma_bound(100, 1.0, 20.0), 2.0 * std::exp(-2.0), 1e-15);
  EXPECT_DOUBLE_EQ(azuma_bound(10, 1.0, 0.0), 2.0);
  EXPECT_THROW(azuma_bound(0, 1.0, 1.0), DomainError);
  EXPECT_THROW(azuma_bound(10, 0.0, 1.0), DomainError);
  EXPECT_THROW(azuma_bound(10, 1.0, -1.0), DomainError);
}

TEST(Puw, BracketAndPrefactor) {
  const std::vector<double> zero(50, 0.0);
  EXPECT_DOUBLE_EQ(puw_bracket(50, 1.0, zero), 1.0);
  EXPECT_NEAR(puw_bound(50, 0.0, 1.0, zero), 4.0 * std::sqrt(std::exp(1.0)), 1e-14);
  const std::vector<double> ones(4, 1.0);
  const double s = 1.0 + std::pow(2, -1.5) + std::pow(3, -1.5) + std::pow(4, -1.5);
  EXPECT_NEAR(puw_bracket(10, 0.5, ones), 0.5 + 80.0 * s, 1e-12);
  // Only j <= n enter unless sum_all.
  EXPECT_NEAR(puw_bracket(2, 0.5, ones), 0.5 + 80.0 * (1.0 + std::pow(2, -1.5)), 1e-12);
  EXPECT_NEAR(puw_bracket(2, 0.5, ones, true), 0.5 + 80.0 * s, 1e-12);
}

TEST(Projection, MomentAndTail) {
  const std::vector<double> g(4, 1.0), p{1.0, 0.5};
  const auto b = projection_bound(g, p);
  EXPECT_DOUBLE_EQ(b.D, 1.5);
  EXPECT_DOUBLE_EQ(b.G2, 4.0);
  EXPECT_DOUBLE_EQ(b.tail(0.0), 8.0);
  EXPECT_NEAR(b.tail(3.0), 8.0 * std::exp(-9.0 / (2.0 * 4.0 * 2.25)), 1e-15);
  EXPECT_NEAR(b.moment(1.0), 4.0 * std::exp(0.5 * 4.0 * 2.25), 1e-12);
}

TEST(Blocking, ConstraintEnforced) {
  EXPECT_NO_THROW(blocking_bound_first_term(1000, 1.0, 10, 0.02));
  EXPECT_THROW(blocking_bound_first_term(1000, 1.0, 11, 0.02), DomainError);
  EXPECT_NEAR(blocking_bound_first_term(1000, 1.0, 10, 0.02), 2.0 * std::exp(-0.0004 * 1000 / 640.0), 1e-15);
}

TEST(ClopperPearson, ZeroHitsClosedForm) {
  // k = 0: upper = 1 - 0.05^(1/N).
  for (std::uint64_t N : {10ull, 1000ull, 100000ull})
    EXPECT_NEAR(clopper_pearson_upper(0, N), 1.0 - std::pow(0.05, 1.0 / double(N)), 1e-12);
  EXPECT_DOUBLE_EQ(clopper_pearson_upper(5, 5), 1.0);
  EXPECT_THROW(clopper_pearson_upper(6, 5), DomainError);
}

TEST(ClopperPearson, MatchesBisectionOracle) {
  for (auto [k, N] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{{1, 20}, {7, 100}, {40, 1000}})
    EXPECT_NEAR(clopper_pearson_upper(k, N), cp_upper_bisection(k, N), 1e-9);
}

TEST(VerifyDomination, IidAzumaDominated) {
  const auto m = make_iid(IidLaw::rademacher());
  const auto reps = verify_domination(m, BoundSpec::azuma(1.0), 64, {4.0, 8.0, 16.0, 24.0}, 5000, 3, 0);
  ASSERT_EQ(reps.size(), 4u);
  for (const auto& r : reps) EXPECT_TRUE(r.dominated) << r.threshold;
  // Exceedances are monotone in the threshold.
  for (std::size_t i = 1; i < reps.size(); ++i) EXPECT_LE(reps[i].exceedances, reps[i - 1].exceedances);
}

TEST(VerifyDomination, DetectsAFalseBound) {
  // A bound ten times too small at t = sqrt(n) must be caught.
  BoundSpec b = BoundSpec::azuma(1.0);
  const auto m = make_iid(IidLaw::rademacher());
  const auto reps = verify_domination(m, b, 100, {10.0}, 5000, 4, 0);
  const double true_bound = reps[0].bound;
  EXPECT_GT(reps[0].p_hat, 0.1 * true_bound);
  EXPECT_GT(reps[0].ci_upper, 0.05);
}

TEST(VerifyDomination, RejectsInconsistentSetup) {
  const auto m = make_iid(IidLaw::rademacher());
  EXPECT_THROW(verify_domination(m, BoundSpec::azuma(0.5), 10, {1.0}, 2000, 1, 0), DomainError);
  EXPECT_THROW(verify_domination(m, BoundSpec::azuma(1.0), 10, {1.0}, 999, 1, 0), DomainError);
  LinearProcessSpec s;
  const auto lp = make_linear_process(s);
  EXPECT_THROW(bound_for_model(BoundSpec::Kind::azuma, lp, 10), DomainError);
}

TEST(BoundForModel, PuwFromCircleKernel) {
  const auto m = make_circle_walk(CircleWalkSpec{});
  const auto b = bound_for_model(BoundSpec::Kind::puw, m, 50);
  ASSERT_EQ(b.cond_norms.size(), 50u);
  EXPECT_DOUBLE_EQ(b.x_inf, m.bound);
  // ||E(S_1 | F_0)|| = |cos 2 pi a|.
  EXPECT_NEAR(b.cond_norms[0], std::abs(std::cos(2.0 * std::numbers::pi * IrrationalSpec::golden().value())), 1e-5);
}

TEST(BlockStatistic, IidIsZero) {
  const auto m = make_iid(IidLaw::rademacher());
  RngStream rng(1, 0);
  EXPECT_EQ(block_average_statistic(m, m.sample(100, rng), 10), 0.0);
}

TEST(TailCsv, Columns) {
  TailBoundReport r;
  const auto csv = tail_reports_csv({r}).str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold,bound,p_hat,ci_upper,exceedances,replicas,verdict");
}
