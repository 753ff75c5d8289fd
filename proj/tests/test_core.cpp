#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mdlab/core.hpp"
#include "mdlab/processes.hpp"

using namespace mdlab;

TEST(Rng, SameSeedAndStreamRepeat) {
  RngStream a(7, stream_index(3, 11)), b(7, stream_index(3, 11));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t e = 0; e < 20; ++e)
    for (std::uint64_t r = 0; r < 50; ++r) first.insert(RngStream(1, stream_index(e, r)).next_u64());
  EXPECT_EQ(first.size(), 1000u);
}

TEST(Rng, UniformRanges) {
  RngStream rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform_open();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(IidLaw, Variances) {
  EXPECT_DOUBLE_EQ(IidLaw::rademacher().variance(), 1.0);
  EXPECT_NEAR(IidLaw::uniform(2.0).variance(), 4.0 / 3.0, 1e-15);
  // P(X = -2) = 1/3, P(X = 1) = 2/3: mean 0, variance 2.
  EXPECT_NEAR(IidLaw::two_point(1.0 / 3.0, -2.0, 1.0).variance(), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(IidLaw::two_point(1.0 / 3.0, -2.0, 1.0).bound(), 2.0);
}

TEST(IidLaw, RejectsUncenteredOrDegenerate) {
  EXPECT_THROW(IidLaw::two_point(0.5, -1.0, 2.0), DomainError);
  EXPECT_THROW(IidLaw::uniform(0.0), DomainError);
  EXPECT_THROW(IidLaw::two_point(1.5, -1.0, 1.0), DomainError);
}

TEST(IidLaw, SampleMeanWithinFiveStandardErrors) {
  const auto law = IidLaw::uniform(1.0);
  RngStream rng(42, 0);
  const int N = 200000;
  double s = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = law.sample(rng);
    ASSERT_LE(std::abs(x), 1.0);
    s += x;
  }
  EXPECT_LT(std::abs(s / N), 5.0 * std::sqrt(law.variance() / N));
}

TEST(Modulus, ValuesAndZero) {
  EXPECT_DOUBLE_EQ(Modulus::lipschitz(2.0)(0.25), 0.5);
  EXPECT_DOUBLE_EQ(Modulus::holder(1.0, 0.5)(0.25), 0.5);
  EXPECT_DOUBLE_EQ(Modulus::log_power(1.0, 1.0)(0.0), 0.0);
  // Below the inflection point: D |log t|^-gamma.
  EXPECT_NEAR(Modulus::log_power(2.0, 0.5)(std::exp(-9.0)), 2.0 / 3.0, 1e-14);
}

TEST(Modulus, LogPowerIsNondecreasing) {
  const auto w = Modulus::log_power(1.0, 0.75);
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double v = w(i / 1000.0);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
}

TEST(PartialSums, KnownValues) {
  const std::vector<double> x{1.0, -2.0, 3.0, -4.0};
  const auto s = partial_sums(x);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(s[3], -2.0);
  EXPECT_DOUBLE_EQ(max_abs_partial_sum(x), 2.0);
}

TEST(NormalizedProcess, StepInterpolation) {
  const Path p({1.0, 1.0, 1.0, 1.0}, 0);
  // S_{floor(nt)} / sqrt(n).
  EXPECT_NEAR(normalized_process(p, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(normalized_process(p, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(normalized_process(p, 0.125), 0.0, 1e-15);
  EXPECT_THROW(normalized_process(p, 1.5), DomainError);
}

TEST(SpeedSequence, PowerLaw) {
  const auto a = SpeedSequence::power(1.0 / 3.0);
  EXPECT_NEAR(a(1000), 0.1, 1e-15);
  EXPECT_NEAR(a(1000000), 0.01, 1e-15);
}

TEST(SpeedSequence, RejectsOutsideModerateRange) {
  EXPECT_THROW(SpeedSequence::power(0.0), DomainError);
  EXPECT_THROW(SpeedSequence::power(1.0), DomainError);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(SimulatePaths, DeterministicPerReplica) {
  const auto m = make_iid(IidLaw::rademacher());
  const auto a = simulate_paths(m, 50, 8, 99, 4);
  const auto b = simulate_paths(m, 50, 3, 99, 4);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(a[r].values()[k], b[r].values()[k]);
}

TEST(KernelModel, ConditionalSumFnMatchesPointwise) {
  CircleWalkSpec s;
  const auto m = make_circle_walk(s);
  const auto g = m.kernel->conditional_sum_fn(5);
  for (double y : {0.0, 0.1, 0.37, 0.9}) EXPECT_NEAR(g(y), m.kernel->conditional_sum(y, 5), 1e-12);
}
