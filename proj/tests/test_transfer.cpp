#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mdlab/transfer.hpp"

using namespace mdlab;

namespace {
const double kTau = 2.0 * std::numbers::pi;
}

TEST(PfIntegerBeta, AnnihilatesCosOnDoubling) {
  const auto f = GridFunction::sample([](double x) { return std::cos(kTau * x); });
  const auto g = apply_pf_integer_beta(f, 2);
  for (double v : g.values()) EXPECT_LT(std::abs(v), 1e-12);
}

TEST(PfIntegerBeta, FixesConstantsAndHalvesCos2) {
  const auto c = apply_pf_integer_beta(GridFunction::sample([](double) { return 3.0; }), 3);
  for (double v : c.values()) EXPECT_NEAR(v, 3.0, 1e-15);
  // P cos(4 pi x) = cos(2 pi x) for the doubling map, up to linear interpolation (h^2 (4 pi)^2 / 8).
  const auto g = apply_pf_integer_beta(GridFunction::sample([](double x) { return std::cos(2 * kTau * x); }), 2);
  for (std::size_t i = 0; i < g.size(); i += 97) EXPECT_NEAR(g.values()[i], std::cos(kTau * g.node(i)), 2e-6);
}

TEST(TotalVariation, KnownFunctions) {
  EXPECT_NEAR(total_variation_norm(GridFunction::sample([](double x) { return x; })), 1.0, 1e-14);
  EXPECT_NEAR(total_variation_norm(GridFunction::sample([](double x) { return std::cos(kTau * x); })), 4.0, 1e-12);
}

TEST(Invariance, GridKernelsPreserveIntegrals) {
  const auto f = [](double x) { return std::exp(x) * std::sin(3 * x); };
  IntegerBetaKernel b3(3);
  FullBranchKernel fb({0.0, 0.35, 1.0});
  GaussKernel gk;
  for (const GridKernel* K : std::initializer_list<const GridKernel*>{&b3, &fb, &gk}) {
    std::vector<double> v;
    for (double x : K->nodes()) v.push_back(f(x));
    EXPECT_LT(invariance_defect(*K, v), grid_tolerance(*K, v)) << K->name();
  }
}

TEST(Duality, DoublingMapQuadrature) {
  const auto h = GridFunction::sample([](double x) { return x * x; });
  const auto f = GridFunction::sample([](double x) { return std::sin(kTau * x) + std::cos(2 * kTau * x); });
  EXPECT_LT(std::abs(duality_defect(h, f, 2)), 1e-6);
}

TEST(Duality, JumpInFoTIsFirstOrder) {
  // f(1) != f(0) makes f o T jump at 1/2; the trapezoid rule then only gets O(h).
  const auto h = GridFunction::sample([](double x) { return x * x; });
  const auto f = GridFunction::sample([](double x) { return x; });
  const double d = std::abs(duality_defect(h, f, 2));
  EXPECT_GT(d, 1e-6);
  EXPECT_LT(d, 1e-3);
}

TEST(SupNormDecay, DoublingOnIdentityHasRateOneHalf) {
  IntegerBetaKernel K(2);
  std::vector<double> f(K.nodes().begin(), K.nodes().end());
  const auto r = sup_norm_decay(K, f, 30);
  ASSERT_TRUE(r.fitted);
  EXPECT_NEAR(r.rho, 0.5, 1e-6);
  // K^n (x - 1/2) = 2^-n (x - 1/2) exactly.
  for (int n = 0; n <= 20; ++n) EXPECT_NEAR(r.u[n], 0.5 * std::pow(0.5, n), 1e-12);
}

TEST(CircleKernel, CosIsAnEigenfunction) {
  const double a = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto f = GridFunction::sample([](double x) { return std::cos(kTau * x); });
  const auto g = apply_kernel_circle(f, a);
  for (std::size_t i = 0; i < g.size(); i += 61)
    EXPECT_NEAR(g.values()[i], std::cos(kTau * a) * std::cos(kTau * g.node(i)), 1e-6);
}

TEST(CircleKernel, SupNormsDecayGeometrically) {
  const double a = (std::sqrt(5.0) - 1.0) / 2.0;
  CircleKernel K(a);
  std::vector<double> f;
  for (double x : K.nodes()) f.push_back(std::cos(kTau * x));
  const auto u = sup_norms(K, f, 10);
  for (int n = 0; n <= 10; ++n) EXPECT_NEAR(u[n], std::pow(std::abs(std::cos(kTau * a)), n), 1e-5);
}

TEST(FiniteKernel, DenseTwoState) {
  const auto K = FiniteKernel::dense("two", {{0.9, 0.1}, {0.2, 0.8}}, {2.0 / 3.0, 1.0 / 3.0});
  const auto g = K.apply(std::vector<double>{1.0, -2.0});
  EXPECT_NEAR(g[0], 0.9 - 0.2, 1e-15);
  EXPECT_NEAR(g[1], 0.2 - 1.6, 1e-15);
  EXPECT_NEAR(invariance_defect(K, std::vector<double>{1.0, -2.0}), 0.0, 1e-15);
}

TEST(Concavity, SpotCheck) {
  EXPECT_TRUE(is_concave_on(Modulus::holder(1.0, 0.5), 0.0, 0.5));
  EXPECT_TRUE(is_concave_on(Modulus::log_power(1.0, 0.6), 0.0, 0.5));
  Modulus convex{"square", [](double h) { return h * h; }};
  EXPECT_FALSE(is_concave_on(convex, 0.0, 0.5));
}

TEST(ModulusBound, LipschitzOnDoubling) {
  IntegerBetaKernel K(2);
  std::vector<double> f(K.nodes().begin(), K.nodes().end());
  const auto mc = modulus_bound_check(K, f, Modulus::lipschitz(1.0), 15);
  EXPECT_TRUE(mc.ok);
}

TEST(ConditionalSquareNorms, CapRefusesLargeN) {
  IntegerBetaKernel K(2, 129);
  std::vector<double> f;
  for (double x : K.nodes()) f.push_back(std::cos(kTau * x));
  EXPECT_THROW(conditional_square_norms(K, f, {10, 20000}, 0.5), CapacityError);
  // Doubling + cos: X's are uncorrelated under every start, E_x S_n^2 / n -> 1/2 uniformly.
  const auto d = conditional_square_norms(K, f, {8, 16, 32}, 0.5);
  EXPECT_GE(d.front(), d.back() - 1e-12);
}

TEST(PairMoment, IidLikeKernelFactorizes) {
  IntegerBetaKernel K(2);
  std::vector<double> f;
  for (double x : K.nodes()) f.push_back(std::cos(kTau * x));
  // E_x(X_1 X_3) for doubling + cos: P^? structure gives zero after one step.
  const auto pm = pair_moment(K, f, 1, 3);
  for (double v : pm) EXPECT_LT(std::abs(v), 1e-10);
}

TEST(BvContraction, DoublingContracts) {
  IntegerBetaKernel K(2, 1025);
  std::vector<std::vector<double>> suite;
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> v;
    for (double x : K.nodes()) v.push_back(std::cos(kTau * k * x) + x);
    suite.push_back(v);
  }
  const auto c = check_bv_contraction(K, suite, 12);
  EXPECT_TRUE(c.contracting);
  EXPECT_LT(c.rho, 1.0);
}
