#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "mdlab/mdp.hpp"
#include "mdlab/oracles.hpp"
#include "mdlab/processes.hpp"

using namespace mdlab;

TEST(Path, Validation) {
  EXPECT_THROW(PiecewiseLinearPath({0.0, 0.5}, {0.0, 1.0}), DomainError);
  EXPECT_THROW(PiecewiseLinearPath({0.0, 0.5, 0.5, 1.0}, {0.0, 1.0, 1.0, 2.0}), DomainError);
  EXPECT_THROW(PiecewiseLinearPath({0.0, 1.0}, {0.1, 1.0}), DomainError);
  EXPECT_THROW(PiecewiseLinearPath({0.0, 1.0}, {0.0, std::nan("")}), DomainError);
  const PiecewiseLinearPath h({0.0, 0.25, 1.0}, {0.0, 1.0, -0.5});
  EXPECT_DOUBLE_EQ(h(0.125), 0.5);
  EXPECT_DOUBLE_EQ(h.slope(1), -2.0);
}

TEST(Rates, LinearPathClosedForm) {
  EXPECT_NEAR(rate_I(PiecewiseLinearPath::linear(1.5), 2.0), 1.5 * 1.5 / 4.0, 1e-15);
  EXPECT_DOUBLE_EQ(endpoint_rate(1.5, 2.0), 1.5 * 1.5 / 4.0);
  // Piecewise: (1/2) (4^2 * 0.25 + 2^2 * 0.75) = 3.5.
  EXPECT_NEAR(rate_I(PiecewiseLinearPath({0.0, 0.25, 1.0}, {0.0, 1.0, -0.5}), 1.0), 3.5, 1e-14);
}

TEST(Rates, ZeroVariance) {
  EXPECT_EQ(rate_I(PiecewiseLinearPath::linear(1.0), 0.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(rate_I(PiecewiseLinearPath::zero(), 0.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(rate_I(PiecewiseLinearPath::zero(), 0.0, true), 0.0);
}

TEST(Rates, WeightedWithUnitWeightIsRateI) {
  const PiecewiseLinearPath h({0.0, 0.3, 0.7, 1.0}, {0.0, 0.6, 0.2, 1.0});
  EXPECT_NEAR(rate_J_weighted(h, [](double) { return 1.0; }, 1.7), rate_I(h, 1.7), 1e-12);
  // g = 2 scales the rate by 1/4.
  EXPECT_NEAR(rate_J_weighted(h, [](double) { return 2.0; }, 1.7), 0.25 * rate_I(h, 1.7), 1e-12);
}

TEST(ExactBinomial, BruteForceAtTen) {
  for (double t : {0.0, 2.0, 3.5, 6.0, 10.0}) {
    int hits = 0;
    for (unsigned mask = 0; mask < 1024u; ++mask)
      if (2 * std::popcount(mask) - 10 >= t) ++hits;
    EXPECT_NEAR(exact_binomial_tail_log(10, t), std::log(hits / 1024.0), 1e-12) << t;
  }
}

TEST(ExactBinomial, MatchesOracleAndSaddlepoint) {
  for (long n : {100L, 10000L, 1000000L}) {
    const double t = 2.5 * std::sqrt(double(n));
    const double exact = exact_binomial_tail_log(n, t);
    EXPECT_NEAR(exact, oracle::binomial_tail_log(n, t), 1e-9 * std::abs(exact));
    EXPECT_NEAR(exact, oracle::rademacher_saddlepoint_log(n, t), 2e-2 * std::abs(exact));
  }
}

TEST(Cgf, RademacherIsLogCosh) {
  const auto law = IidLaw::rademacher();
  for (double th : {-2.0, 0.0, 0.3, 1.7}) {
    EXPECT_NEAR(law_cgf(law, th), std::log(std::cosh(th)), 1e-14);
    EXPECT_NEAR(law_tilted_mean(law, th), std::tanh(th), 1e-14);
  }
  EXPECT_NEAR(solve_tilt(law, 0.4), std::atanh(0.4), 1e-10);
  EXPECT_THROW(solve_tilt(law, 1.0), DomainError);
}

TEST(Tilted, AgreesWithExactWithinFourSe) {
  const auto law = IidLaw::rademacher();
  const long n = 400;
  const double t = 3.0 * std::sqrt(double(n));
  const auto e = tilted_is_estimator(law, n, t, 20000, 99);
  EXPECT_GT(e.hits, 0u);
  EXPECT_LT(std::abs(e.log_p - exact_binomial_tail_log(n, t)), 4.0 * e.se + 1e-12);
}

TEST(Naive, RefusesWhenTooFewHitsExpected) {
  const auto m = make_iid(IidLaw::rademacher());
  EXPECT_THROW(empirical_mdp_point(m, 10000, 0.01, 2.0, MdpMethod::naive, 1000, 1.0, 1),
               CapacityError);
  const auto p = empirical_mdp_point(m, 100, 10.0, 0.5, MdpMethod::naive, 20000, 1.0, 1);
  EXPECT_FALSE(p.no_exceedance);
  EXPECT_DOUBLE_EQ(p.target, -0.125);
}

TEST(Scan, GapsShrinkForExactRademacher) {
  const auto m = make_iid(IidLaw::rademacher());
  const auto r = mdp_scan(m, SpeedSequence::power(0.5), {100, 10000, 1000000}, {0.5, 1.0}, 1.0,
                          MdpMethod::exact_binomial, 0, 1);
  ASSERT_EQ(r.rows.size(), 6u);
  EXPECT_TRUE(r.gaps_shrink);
  const auto csv = r.to_csv().str();
  EXPECT_NE(csv.substr(0, csv.find('\n')).find("gap"), std::string::npos);
}

TEST(Scan, ExactNeedsRademacher) {
  const auto m = make_iid(IidLaw::uniform(1.0));
  EXPECT_THROW(mdp_scan(m, SpeedSequence::power(0.5), {100}, {1.0}, 1.0 / 3.0, MdpMethod::exact_binomial, 0, 1),
               UnsupportedError);
}

TEST(Decomposition, CircleWalkVerified) {
  const auto m = make_circle_walk(CircleWalkSpec{});
  RngStream rng(5, 0);
  const Path p = m.sample(1024, rng);
  const auto d = block_martingale_decompose(m, p, 8);
  EXPECT_EQ(d.blocks, 128u);
  EXPECT_TRUE(d.verified);
  EXPECT_LT(d.max_increment_conditional_mean, 1e-10);
  EXPECT_LT(d.reconstruction_error, 1e-9);
  EXPECT_LE(d.residual_sup, d.residual_bound + 1e-9);
}

TEST(Decomposition, IidIncrementsAreBlockSums) {
  const auto m = make_iid(IidLaw::rademacher());
  RngStream rng(6, 0);
  const Path p = m.sample(64, rng);
  const auto d = block_martingale_decompose(m, p, 4);
  for (std::size_t i = 0; i < d.blocks; ++i) {
    EXPECT_NEAR(d.conditional_means[i], 0.0, 1e-15);
    EXPECT_NEAR(d.increments[i], d.block_sums[i], 1e-15);
  }
}

TEST(LogNormalTail, MatchesErfc) {
  for (double z : {-1.0, 0.0, 1.0, 3.0, 8.0, 20.0})
    EXPECT_NEAR(log_normal_tail(z), std::log(0.5 * std::erfc(z / std::sqrt(2.0))), 1e-9 * (1.0 + z * z)) << z;
}

TEST(Methods, ParseRoundTrip) {
  for (auto m : {MdpMethod::naive, MdpMethod::exact_binomial, MdpMethod::tilted})
    EXPECT_EQ(parse_mdp_method(to_string(m)), m);
  EXPECT_THROW(parse_mdp_method("bogus"), ConfigError);
}
