#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mdlab/oracles.hpp"
#include "mdlab/processes.hpp"
#include "mdlab/transfer.hpp"

using namespace mdlab;

namespace {

void expect_path_convention(const ProcessModel& m, std::size_t n, std::uint64_t seed, double tol = 1e-12) {
  RngStream rng(seed, 0);
  const Path p = m.sample(n, rng);
  ASSERT_EQ(p.size(), n);
  ASSERT_EQ(p.states().size(), n + 1);
  for (std::size_t k = 1; k <= n; ++k)
    EXPECT_NEAR(p.values()[k - 1], m.kernel->centered(p.states()[k]), tol) << "k = " << k;
}

}  // namespace

TEST(Iid, RademacherModel) {
  const auto m = make_iid(IidLaw::rademacher());
  EXPECT_TRUE(m.martingale_difference);
  EXPECT_DOUBLE_EQ(m.bound, 1.0);
  RngStream rng(1, 0);
  const auto p = m.sample(1000, rng);
  for (double v : p.values()) EXPECT_TRUE(v == 1.0 || v == -1.0);
  EXPECT_DOUBLE_EQ(*m.meta("sigma2"), 1.0);
}

TEST(Alternating, BoundAndStates) {
  const auto m = make_alternating_plus_iid(IidLaw::rademacher());
  EXPECT_DOUBLE_EQ(m.bound, 2.0);
  EXPECT_FALSE(m.martingale_difference);
  expect_path_convention(m, 200, 3);
}

TEST(LinearProcess, GeometricSigma2MatchesCovarianceSum) {
  LinearProcessSpec s;
  s.coefficients.kind = CoefficientSpec::Kind::geometric;
  s.coefficients.rate = 0.5;
  const auto m = make_linear_process(s);
  // gamma_k = sum_i c_i c_{i+k} = r^k / (1 - r^2).
  const double r = 0.5;
  double sigma2 = 1.0 / (1.0 - r * r);
  for (int k = 1; k < 200; ++k) sigma2 += 2.0 * std::pow(r, k) / (1.0 - r * r);
  EXPECT_NEAR(*m.meta("sigma2"), sigma2, 1e-6);
  EXPECT_FALSE(m.projection_norms.empty());
}

TEST(LinearProcess, TruncationRadiusMeetsTolerance) {
  CoefficientSpec c;
  c.kind = CoefficientSpec::Kind::geometric;
  c.rate = 0.5;
  const long M = c.truncation_radius(2.0, 1e-8);
  EXPECT_LT(2.0 * c.one_sided_tail(M + 1), 1e-8);
  EXPECT_GE(2.0 * c.one_sided_tail(M), 1e-8);
}

TEST(ChainInnovation, TwoStateStationary) {
  ChainInnovation ch;
  ch.P = {{0.9, 0.1}, {0.2, 0.8}};
  ch.values = {-1.0, 2.0};
  const auto pi = ch.stationary();
  EXPECT_NEAR(pi[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(pi[1], 1.0 / 3.0, 1e-12);
}

TEST(IteratedFunction, Sigma2ClosedForm) {
  IteratedFunctionSpec s;
  s.rho = 0.3;
  const auto m = make_iterated_function(s);
  // Var(Y) = (1-rho)^2/12 / (1-rho^2); sigma2 = Var(Y) (1+rho)/(1-rho).
  const double var_y = (1 - s.rho) * (1 - s.rho) / 12.0 / (1 - s.rho * s.rho);
  EXPECT_NEAR(*m.meta("sigma2"), var_y * (1 + s.rho) / (1 - s.rho), 1e-14);
  expect_path_convention(m, 100, 5);
}

TEST(ExpandingMap, DoublingPathsFollowConvention) {
  ExpandingMapSpec s;
  const auto m = make_expanding_map(s);
  expect_path_convention(m, 500, 9);
  EXPECT_NEAR(*m.meta("sigma2"), 0.5, 0);
}

TEST(ExpandingMap, GaussAndFullBranchBuild) {
  ExpandingMapSpec s;
  s.map = ExpandingMapSpec::Map::gauss;
  s.observable = "identity";
  const auto g = make_expanding_map(s);
  // Samples are centered by the exact Gauss mean, the kernel by its quadrature mean.
  const double drift = std::abs(*g.meta("mu_exact") - *g.meta("mu_grid"));
  EXPECT_LT(drift, 1e-7);
  expect_path_convention(g, 200, 2, drift + 1e-12);
  s.map = ExpandingMapSpec::Map::full_branch;
  s.breakpoints = {0.0, 0.3, 1.0};
  const auto f = make_expanding_map(s);
  expect_path_convention(f, 200, 2);
}

TEST(ExpandingMap, RejectsBadBreakpoints) {
  ExpandingMapSpec s;
  s.map = ExpandingMapSpec::Map::full_branch;
  s.breakpoints = {0.0, 0.7, 0.3, 1.0};
  EXPECT_THROW(make_expanding_map(s), DomainError);
}

TEST(GaussInverseCdf, EndpointsAndMedian) {
  EXPECT_DOUBLE_EQ(gauss_inverse_cdf(0.0), 0.0);
  EXPECT_DOUBLE_EQ(gauss_inverse_cdf(1.0), 1.0);
  // Gauss measure of [0, x] is log2(1 + x).
  EXPECT_NEAR(std::log2(1.0 + gauss_inverse_cdf(0.5)), 0.5, 1e-15);
}

TEST(CircleWalk, Sigma2MatchesBruteForceCovariance) {
  const auto m = make_circle_walk(CircleWalkSpec{});
  const double a = IrrationalSpec::golden().value();
  EXPECT_NEAR(*m.meta("sigma2"), oracle::circle_covariance_sum(a, 200), 1e-10);
  expect_path_convention(m, 300, 4);
}

TEST(CircleWalk, RationalStepNeedsBypass) {
  CircleWalkSpec s;
  s.step = IrrationalSpec::rational(1, 4);
  EXPECT_THROW(make_circle_walk(s), DomainError);
  s.allow_rational = true;
  EXPECT_NO_THROW(make_circle_walk(s));
}

TEST(TrigPolynomial, CoefficientsAndValues) {
  TrigPolynomial f;
  f.cos_amp = {0.0, 2.0};
  f.sin_amp = {1.0, 0.0};
  EXPECT_NEAR(f(0.25), 2.0 * std::cos(std::numbers::pi) + 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(f.abs_coefficient(1), 0.5);
  EXPECT_DOUBLE_EQ(f.abs_coefficient(2), 1.0);
  const auto spec = fourier_spec(f);
  ASSERT_EQ(spec.support(), 2);
  EXPECT_DOUBLE_EQ(spec.magnitude[1], 1.0);
}

TEST(Counterexample, ReturnTimeLawNormalized) {
  CounterexampleChainSpec s;
  s.j_max = 50;
  const auto tau = return_time_law(s);
  double total = 0.0;
  for (double v : tau) total += v;
  EXPECT_NEAR(total, 1.0, 1e-14);
  s.tail_exponent = 2.0;
  EXPECT_THROW(return_time_law(s), DomainError);
}

TEST(Counterexample, StationaryLawIsInvariant) {
  CounterexampleChainSpec s;
  s.j_max = 40;
  const auto m = make_counterexample_chain(s);
  const auto& K = *m.kernel->kernel;
  const auto w = K.weights();
  double total = 0.0;
  for (double v : w) total += v;
  EXPECT_NEAR(total, 1.0, 1e-14);
  // pi P = pi, tested against indicator functions.
  for (std::size_t s0 = 0; s0 < K.size(); s0 += 7) {
    std::vector<double> e(K.size(), 0.0);
    e[s0] = 1.0;
    EXPECT_NEAR(invariance_defect(K, e), 0.0, 1e-15);
  }
  EXPECT_TRUE(m.martingale_difference);
  expect_path_convention(m, 500, 8);
}

TEST(LinearProcessDeltas, GeometricIidSum) {
  LinearProcessSpec s;
  s.coefficients.kind = CoefficientSpec::Kind::geometric;
  s.coefficients.rate = 0.5;
  const auto d = linear_process_deltas(s);
  EXPECT_GT(d.sum(), 0.0);
  const auto [lo, hi] = innovation_range(s);
  EXPECT_DOUBLE_EQ(lo, -1.0);
  EXPECT_DOUBLE_EQ(hi, 1.0);
}
