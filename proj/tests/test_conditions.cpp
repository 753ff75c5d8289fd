#include <gtest/gtest.h>

#include <cmath>

#include "mdlab/conditions.hpp"
#include "mdlab/processes.hpp"
#include "mdlab/series.hpp"
#include "mdlab/transfer.hpp"

using namespace mdlab;

namespace {

std::vector<double> power_terms(double p, int N) {
  std::vector<double> t;
  for (int n = 1; n <= N; ++n) t.push_back(std::pow(n, p));
  return t;
}

}  // namespace

TEST(Series, PowerVerdicts) {
  EXPECT_EQ(diagnose_series(power_terms(-2.0, 1000)).verdict, Verdict::converging);
  EXPECT_EQ(diagnose_series(power_terms(-1.5, 1000)).verdict, Verdict::converging);
  EXPECT_EQ(diagnose_series(power_terms(-1.0, 1000)).verdict, Verdict::diverging);
  EXPECT_EQ(diagnose_series(power_terms(-0.5, 1000)).verdict, Verdict::diverging);
}

TEST(Series, GeometricAndZero) {
  std::vector<double> g;
  for (int n = 1; n <= 200; ++n) g.push_back(std::pow(0.8, n));
  const auto d = diagnose_series(g);
  EXPECT_EQ(d.verdict, Verdict::converging);
  EXPECT_NEAR(d.ratio, 0.8, 1e-6);
  // Sum of 0.8^n over n >= 1 is 4.
  EXPECT_NEAR(d.total() + d.tail_estimate, 4.0, 1e-6);
  EXPECT_EQ(diagnose_series(std::vector<double>(100, 0.0)).verdict, Verdict::converging);
}

TEST(Series, FitLineRejectsDegenerateAbscissae) {
  EXPECT_THROW(fit_line({1.0, 1.0}, {2.0, 3.0}), DomainError);
  const auto f = fit_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

TEST(CheckMw, IidIsZeroSeries) {
  const auto d = check_mw(make_iid(IidLaw::rademacher()), 200);
  EXPECT_EQ(d.verdict, Verdict::converging);
  EXPECT_LT(d.total(), 1e-12);
}

TEST(CheckBisMw, AlternatingSplits) {
  // E(X_n | F_0) = +-1 forever, E(S_n | F_0) stays bounded.
  const auto m = make_alternating_plus_iid(IidLaw::rademacher());
  EXPECT_EQ(check_bis(m, 500).verdict, Verdict::diverging);
  EXPECT_EQ(check_mw(m, 500).verdict, Verdict::converging);
}

TEST(CheckBisMw, CircleWalkConverges) {
  const auto m = make_circle_walk(CircleWalkSpec{});
  const auto bis = check_bis(m, 300);
  const auto mw = check_mw(m, 300);
  EXPECT_EQ(bis.verdict, Verdict::converging);
  EXPECT_EQ(mw.verdict, Verdict::converging);
  // ||E(X_n|F_0)|| = |cos 2 pi a|^n up to interpolation.
  const double c = std::abs(std::cos(2.0 * std::numbers::pi * IrrationalSpec::golden().value()));
  EXPECT_NEAR(bis.terms[4] * std::sqrt(5.0), std::pow(c, 5), 1e-5);
}

TEST(CheckMw, NeedsKernel) {
  LinearProcessSpec s;
  EXPECT_THROW(check_mw(make_linear_process(s), 10), UnsupportedError);
}

TEST(CheckBis, LinearProcessUsesBound) {
  LinearProcessSpec s;
  s.coefficients.kind = CoefficientSpec::Kind::geometric;
  s.coefficients.rate = 0.5;
  EXPECT_EQ(check_bis(make_linear_process(s), 200).verdict, Verdict::converging);
}

TEST(PhiCoefficients, TwoStateClosedForm) {
  const double p = 0.2, q = 0.3;
  const std::vector<std::vector<double>> P{{1 - p, p}, {q, 1 - q}};
  const std::vector<double> pi{q / (p + q), p / (p + q)};
  const auto phi = phi_coefficients(P, pi, 10);
  // P^n(x, .) - pi = lambda^n (row-dependent sign pattern), lambda = 1 - p - q.
  const double lambda = 1 - p - q;
  for (int n = 1; n <= 10; ++n)
    EXPECT_NEAR(phi[n - 1], std::max(pi[0], pi[1]) * std::pow(std::abs(lambda), n), 1e-14);
}

TEST(PhiCoefficients, ValidatesInput) {
  EXPECT_THROW(phi_coefficients({{0.5, 0.6}, {0.5, 0.5}}, {0.5, 0.5}, 3), DomainError);
  EXPECT_THROW(phi_coefficients({{0.5, 0.5}, {0.5, 0.5}}, {0.9, 0.2}, 3), DomainError);
  EXPECT_THROW(phi_coefficients({{0.9, 0.1}, {0.1, 0.9}}, {0.7, 0.3}, 3), DomainError);
}

TEST(ClassL, ThresholdAtOneHalf) {
  EXPECT_EQ(check_class_L(Modulus::log_power(1.0, 0.3)).verdict, Verdict::diverging);
  EXPECT_EQ(check_class_L(Modulus::log_power(1.0, 0.5)).verdict, Verdict::diverging);
  EXPECT_EQ(check_class_L(Modulus::log_power(1.0, 0.75)).verdict, Verdict::converging);
  EXPECT_EQ(check_class_L(Modulus::holder(1.0, 0.5)).verdict, Verdict::converging);
}

TEST(ClassL, RejectsNonConcave) {
  Modulus convex{"square", [](double h) { return h * h; }};
  EXPECT_THROW(check_class_L(convex), DomainError);
}

TEST(ClassL, LipschitzIntegralValue) {
  // int_0^{1/2} dt / sqrt(|log t|) = sqrt(pi) erfc(sqrt(log 2)).
  const auto r = class_L_integral(Modulus::lipschitz(1.0));
  EXPECT_NEAR(r.estimate, std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(std::log(2.0))), 1e-6);
}

TEST(MixRPhi, SummableInputs) {
  const Sequence R = [](long k) { return k == 0 ? 1.0 : 1.0 / (double(k) * double(k)); };
  const Sequence phi = [](long k) { return std::pow(0.5, double(k)); };
  const auto r = check_mixrphi(R, phi, 500);
  EXPECT_TRUE(r.item1);
  EXPECT_TRUE(r.item2);
  EXPECT_EQ(r.main.verdict, Verdict::converging);
}

TEST(MixRPhi, RejectsIncreasingR) {
  const Sequence R = [](long k) { return double(k); };
  const Sequence phi = [](long) { return 0.0; };
  EXPECT_THROW(check_mixrphi(R, phi, 10), DomainError);
}

TEST(Projcond, IidGeometricLinearProcess) {
  LinearProcessSpec s;
  s.coefficients.kind = CoefficientSpec::Kind::geometric;
  s.coefficients.rate = 0.5;
  const auto d = check_projcond_bound(s, innovation_phi(s, 4 * 200 + 1), 200);
  EXPECT_EQ(d.verdict, Verdict::converging);
}

TEST(Projcond, HandMadeSequences) {
  // Delta_i = 2^-|i|, phi = 0 except phi(0): terms are 2 Delta_i per side.
  const Sequence delta = [](long i) { return std::pow(0.5, std::abs(double(i))); };
  const Sequence phi = [](long k) { return k == 0 ? 1.0 : 0.0; };
  const auto d = check_projcond_bound(delta, phi, 60, false);
  EXPECT_NEAR(d.total(), 2.0 * 2.0, 1e-12);
}

TEST(ModulusCondition, PowerCoefficientsNeedFastDecay) {
  const Sequence fast = [](long i) { return std::pow(1.0 + std::abs(double(i)), -3.0); };
  const Sequence slow = [](long i) { return std::pow(1.0 + std::abs(double(i)), -1.0); };
  const std::vector<Modulus> w{Modulus::holder(1.0, 0.5)};
  EXPECT_EQ(check_modulus_condition(w, fast, 2.0, 1000, true).verdict, Verdict::converging);
  EXPECT_EQ(check_modulus_condition(w, slow, 2.0, 1000, true).verdict, Verdict::diverging);
}

TEST(Kac, GeometricTailConverges) {
  const Sequence tail = [](long n) { return std::pow(0.5, double(n)); };
  const auto r = check_kac(Modulus::lipschitz(1.0), tail, 2.0, 200);
  EXPECT_EQ(r.series.verdict, Verdict::converging);
}

TEST(S2inf, IidIsFlat) {
  const auto r = check_s2inf(make_iid(IidLaw::rademacher()), 1.0, {4, 8, 16});
  EXPECT_TRUE(r.pass);
  for (double d : r.deviations) EXPECT_LT(d, 1e-12);
  EXPECT_THROW(check_s2inf(make_iid(IidLaw::rademacher()), 1.0, {4}), DomainError);
}

TEST(Mix, DoublingPasses) {
  ExpandingMapSpec s;
  const auto r = check_mix(make_expanding_map(s), {{1, 1}, {1, 2}, {2, 3}}, {0, 1, 2, 4, 8});
  EXPECT_TRUE(r.pass);
}

TEST(KernelNorms, NoiseFloorOnIid) {
  const auto m = make_iid(IidLaw::uniform(1.0));
  for (double v : kernel_conditional_sum_norms(*m.kernel, 20)) EXPECT_EQ(v, 0.0);
}
