#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mdlab/core.hpp"
#include "mdlab/diophantine.hpp"

namespace mdlab {

using IIDSpec = IidLaw;

struct CoefficientSpec {
  enum class Kind { geometric, power, finite };
  Kind kind = Kind::geometric;
  double scale = 1.0;
  double rate = 0.5;  // geometric ratio, or power exponent in c_i = scale*(1+|i|)^(-rate)
  bool two_sided = false;
  std::vector<double> values;  // finite kind: c_0, c_1, ...

  double coefficient(long i) const;
  // sum_{k >= n} |c_k| over the nonnegative side (n >= 0).
  double one_sided_tail(long n) const;
  double abs_sum() const;
  // Smallest M with width * sum_{|i| > M} |c_i| < tol.
  long truncation_radius(double width, double tol) const;
};

// Finite-state innovation chain: transition matrix P and state values.
struct ChainInnovation {
  std::vector<std::vector<double>> P;
  std::vector<double> values;

  std::vector<double> stationary() const;
};

struct LinearObservable {
  enum class Kind { identity, holder, cosine };
  Kind kind = Kind::identity;
  double alpha = 0.5;      // holder exponent
  double frequency = 1.0;  // cosine: g(y) = cos(frequency * y)

  double operator()(double y) const;
  Modulus modulus() const;
};

struct LinearProcessSpec {
  CoefficientSpec coefficients;
  std::variant<IidLaw, ChainInnovation> innovation = IidLaw::rademacher();
  LinearObservable observable;
  int lag_window = 0;  // X_k = average over l <= lag_window of g(Y_{k-l}), centered
  double tolerance = 1e-8;
};

struct IteratedFunctionSpec {
  double rho = 0.5;
  // Observable on [0,1]: "identity" (y - 1/2 after centering), "cosine" (cos 2 pi y) or "holder" (|y - 1/2|^alpha).
  std::string observable = "identity";
  double alpha = 0.5;
  double burn_in_tolerance = 1e-16;
};

struct ExpandingMapSpec {
  enum class Map { doubling, integer_beta, full_branch, gauss };
  Map map = Map::doubling;
  double beta = 2.0;
  std::vector<double> breakpoints;  // full_branch partition
  // Observable: "cos" (cos 2 pi k x), "identity" (x), "constant", "holder" (|x - 1/2|^alpha), "indicator" (x < 1/2).
  std::string observable = "cos";
  int frequency = 1;
  double alpha = 0.5;
};

// Real trigonometric polynomial f(x) = sum_k fhat(k) e^{2 pi i k x} with
// fhat(-k) = conj(fhat(k)); stored as cosine/sine amplitudes for k >= 1.
struct TrigPolynomial {
  double constant = 0.0;
  std::vector<double> cos_amp;  // f includes cos_amp[k-1] * cos(2 pi k x)
  std::vector<double> sin_amp;  // and sin_amp[k-1] * sin(2 pi k x)

  static TrigPolynomial cosine(int k, double amplitude = 1.0);
  double operator()(double x) const;
  int degree() const { return static_cast<int>(cos_amp.size()); }
  // |fhat(k)| for k >= 1.
  double abs_coefficient(int k) const;
};

struct CircleWalkSpec {
  IrrationalSpec step = IrrationalSpec::golden();
  TrigPolynomial observable = TrigPolynomial::cosine(1);
  bool allow_rational = false;  // test-only bypass
};

struct CounterexampleChainSpec {
  double tail_exponent = 4.0;  // P(tau = j) proportional to j^(-tail_exponent)
  int j_max = 1000;
  std::vector<double> explicit_law;  // optional P(tau = j), j = 1..size
};

ProcessModel make_iid(const IIDSpec& spec);
ProcessModel make_alternating_plus_iid(const IIDSpec& iid);
ProcessModel make_linear_process(const LinearProcessSpec& spec);
ProcessModel make_iterated_function(const IteratedFunctionSpec& spec);
ProcessModel make_expanding_map(const ExpandingMapSpec& spec);
ProcessModel make_circle_walk(const CircleWalkSpec& spec);
ProcessModel make_counterexample_chain(const CounterexampleChainSpec& spec);

// Fourier magnitudes of a trigonometric polynomial.
FourierSpec fourier_spec(const TrigPolynomial& f);

// P(tau = j) for j = 1..J (index j-1), renormalized.
std::vector<double> return_time_law(const CounterexampleChainSpec& spec);
// Invariant law of the age chain on {0..J-1}.
std::vector<double> counterexample_stationary(const std::vector<double>& tau_law);

// Delta_i bounds of a linear process, i = -M..M+lag (index i + M).
struct DeltaTable {
  long offset = 0;
  std::vector<double> delta;
  double at(long i) const;
  double sum() const;
};
DeltaTable linear_process_deltas(const LinearProcessSpec& spec);

// Innovation range [a, b].
std::pair<double, double> innovation_range(const LinearProcessSpec& spec);

// Inverse CDF of the Gauss measure: x = 2^u - 1.
double gauss_inverse_cdf(double u);

}  // namespace mdlab
