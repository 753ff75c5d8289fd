#include <gtest/gtest.h>

#include <cmath>

#include "mdlab/oracles.hpp"
#include "mdlab/processes.hpp"
#include "mdlab/variance.hpp"

using namespace mdlab;

TEST(CovarianceSeries, IidRademacherNearOne) {
  const auto paths = simulate_paths(make_iid(IidLaw::rademacher()), 20000, 20, 11, 0);
  const auto e = sigma2_covariance_series(paths, 10);
  EXPECT_GT(e.se, 0.0);
  EXPECT_LT(std::abs(e.value - 1.0), 4.0 * e.se);
  EXPECT_EQ(e.detail.size(), 11u);
}

TEST(CovarianceSeries, NeedsEnoughData) {
  const auto paths = simulate_paths(make_iid(IidLaw::rademacher()), 100, 1, 1, 0);
  EXPECT_THROW(sigma2_covariance_series(paths, 5), DomainError);
}

TEST(CovarianceSeries, LinearProcessFiniteCoefficients) {
  LinearProcessSpec s;
  s.coefficients.kind = CoefficientSpec::Kind::finite;
  s.coefficients.values = {1.0, 0.5};
  const auto m = make_linear_process(s);
  const auto paths = simulate_paths(m, 50000, 20, 12, 0);
  const auto e = sigma2_covariance_series(paths, 5);
  // (c_0 + c_1)^2 Var(eps).
  EXPECT_LT(std::abs(e.value - 2.25), 4.0 * e.se);
}

TEST(CovarianceSeries, NegativeRawIsClamped) {
  // Perfectly alternating +1, -1: gamma_0 = 1, gamma_1 = -1, raw = -1.
  std::vector<double> x(2000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? -1.0 : 1.0;
  std::vector<Path> paths{Path(x, 0)};
  const auto e = sigma2_covariance_series(paths, 1);
  EXPECT_TRUE(e.clamped);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_NEAR(e.raw, -1.0, 1e-3);
  EXPECT_FALSE(e.warnings.empty());
}

TEST(Dyadic, IidNearOne) {
  const auto paths = simulate_paths(make_iid(IidLaw::rademacher()), 65536, 8, 13, 0);
  const auto e = sigma2_dyadic(paths, 4);
  EXPECT_LT(std::abs(e.value - 1.0), 4.0 * e.se);
}

TEST(Dyadic, PathTooShort) {
  const auto paths = simulate_paths(make_iid(IidLaw::rademacher()), 16, 2, 1, 0);
  EXPECT_THROW(sigma2_dyadic(paths, 4), DomainError);
}

TEST(VarSn, IidNearOne) {
  const auto paths = simulate_paths(make_iid(IidLaw::rademacher()), 256, 400, 14, 0);
  const auto e = sigma2_var_sn(paths, {32, 64, 128, 256});
  EXPECT_LT(std::abs(e.value - 1.0), 4.0 * e.se);
}

TEST(VarSn, NeedsReplicas) {
  const auto paths = simulate_paths(make_iid(IidLaw::rademacher()), 64, 100, 14, 0);
  EXPECT_THROW(sigma2_var_sn(paths, {16, 32, 64}), DomainError);
}

TEST(CircleFourier, MatchesBruteForceCovariance) {
  const auto golden = IrrationalSpec::golden();
  const auto e = sigma2_circle_fourier(TrigPolynomial::cosine(1), golden);
  EXPECT_NEAR(e.value, oracle::circle_covariance_sum(golden.value(), 200), 1e-10);
  const double c = std::cos(2.0 * std::numbers::pi * golden.value());
  EXPECT_NEAR(e.value, 0.5 * (1 + c) / (1 - c), 1e-12);
}

TEST(CircleFourier, SqrtTwoSecondHarmonic) {
  const auto a = IrrationalSpec::quadratic(0, 2, 2);  // sqrt(2)/2
  const auto f = TrigPolynomial::cosine(2, 0.5);
  const auto e = sigma2_circle_fourier(f, a);
  EXPECT_NEAR(e.value, oracle::circle_covariance_sum(2.0 * a.value(), 400, 0.5), 1e-9);
}

TEST(CircleFourier, RationalResonanceRejected) {
  const auto a = IrrationalSpec::rational(1, 2);
  EXPECT_THROW(sigma2_circle_fourier(TrigPolynomial::cosine(2), a), DomainError);
}

TEST(Agreement, CombinedStandardErrors) {
  SigmaEstimate a, b;
  a.value = 1.0;
  a.se = 0.1;
  b.value = 1.35;
  b.se = 0.1;
  EXPECT_TRUE(agree(a, b));  // 0.35 <= 3 * 0.1414
  b.value = 1.5;
  EXPECT_FALSE(agree(a, b));
}

TEST(SummaryCsv, HeaderAndRow) {
  const auto e = sigma2_circle_fourier(TrigPolynomial::cosine(1), IrrationalSpec::golden());
  const auto csv = e.summary_csv().str();
  EXPECT_EQ(csv.rfind("method,", 0), 0u);
  EXPECT_NE(csv.find("fourier_closed_form"), std::string::npos);
}
