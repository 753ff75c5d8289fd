#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "mdlab/csv.hpp"
#include "mdlab/series.hpp"

namespace mdlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;
using HighFloat = boost::multiprecision::cpp_bin_float_100;

struct DistanceValue {
  double value = 0.0;
  double error_bound = 0.0;
  bool exact_zero = false;  // only possible for the rational bypass
};

class IrrationalSpec;
std::vector<double> distances_up_to(long long K, const IrrationalSpec& a, long long multiplier);
DistanceValue dist_to_integers(long long k, const IrrationalSpec& a);

class IrrationalSpec {
 public:
  enum class Kind { quadratic, literal, rational };

  // (P + sqrt(D)) / Q with D > 0 not a perfect square, Q != 0.
  static IrrationalSpec quadratic(long long P, long long D, long long Q);
  static IrrationalSpec golden();  // (sqrt 5 - 1)/2
  // Decimal literal with an explicit uncertainty radius (both decimal strings).
  static IrrationalSpec literal(const std::string& decimal, const std::string& radius);
  // Test-only bypass; flagged as non-irrational everywhere.
  static IrrationalSpec rational(long long p, long long q);

  Kind kind() const { return kind_; }
  bool is_irrational() const { return kind_ != Kind::rational; }
  double value() const;
  HighFloat value_hp() const;
  // Absolute uncertainty of value_hp() (literal radius, or a precision floor).
  HighFloat uncertainty() const;
  std::string describe() const;

  const BigInt& P() const { return P_; }
  const BigInt& D() const { return D_; }
  const BigInt& Q() const { return Q_; }
  const BigRational& center() const { return center_; }
  const BigRational& radius() const { return radius_; }

 private:
  Kind kind_ = Kind::quadratic;
  BigInt P_, D_, Q_;
  BigRational center_, radius_;
  // Literal and rational kinds: center = num_/den_ with den_ > 0.
  BigInt num_, den_;
  friend std::vector<double> distances_up_to(long long, const IrrationalSpec&, long long);
  friend DistanceValue dist_to_integers(long long, const IrrationalSpec&);
};

struct CfExpansion {
  std::vector<BigInt> quotients;  // a_0, a_1, ...
  bool terminated = false;        // rational input ran out of quotients
  bool irrational = true;
};

// Partial quotients a_0..a_K. Literal specs throw PrecisionError when the
// uncertainty interval straddles a quotient boundary before depth K.
CfExpansion cf_expand(const IrrationalSpec& a, int K);

struct Convergent {
  int k = 0;
  BigInt p;
  BigInt q;
};

std::vector<Convergent> convergents(const std::vector<BigInt>& quotients);

struct ConvergentCheck {
  bool recurrence = true;
  bool determinant = true;       // p_k q_{k-1} - p_{k-1} q_k = (-1)^(k-1)
  bool coprime = true;
  bool q_increasing = true;      // strict from k = 1 on
  bool approximation = true;     // |q_k a - p_k| < 1/q_{k+1}
  bool gaps_decreasing = true;   // |q_k a - p_k| strictly decreasing
  bool ok() const {
    return recurrence && determinant && coprime && q_increasing && approximation && gaps_decreasing;
  }
};

ConvergentCheck check_convergents(const std::vector<BigInt>& quotients, const std::vector<Convergent>& conv,
                                  const IrrationalSpec& a);

CsvTable convergent_table(const std::vector<Convergent>& conv, const IrrationalSpec& a);

// d(k a, Z) with an error bound; throws PrecisionError when the bound
// swamps the value.
DistanceValue dist_to_integers(long long k, const IrrationalSpec& a);

// Fast batch of d(k a, Z) for k = 1..K in high precision (validated as above).
std::vector<double> distances_up_to(long long K, const IrrationalSpec& a, long long multiplier = 1);

struct AuditReport {
  double epsilon = 0.0;
  long long K = 0;
  std::vector<std::pair<long long, double>> violations;  // (k, d(ka,Z))
  double min_k_times_d = 0.0;
  long long argmin_k = 0;

  std::vector<std::pair<long long, double>> violations_beyond(long long k0) const;
  std::string summary() const;
  CsvTable to_csv() const;
};

// All k <= K with d(ka, Z) < k^(-1-epsilon).
AuditReport badly_approximable_audit(const IrrationalSpec& a, double epsilon, long long K);

// Magnitudes |fhat(k)| for k = 1..K (coefficients are symmetric in k).
struct FourierSpec {
  std::vector<double> magnitude;
  double C = 0.0;        // declared |fhat(k)| <= C |k|^(-1-epsilon); 0 when undeclared
  double epsilon = 0.0;

  static FourierSpec single_mode(double amplitude);
  // |fhat(k)| = C k^(-p), k <= K, declared with epsilon = p - 1 when p > 1.
  static FourierSpec power(double C, double p, int K);
  int support() const { return static_cast<int>(magnitude.size()); }
};

struct ParouxReport {
  std::vector<double> partial;  // partial sums over 0 < |k| <= K (index K-1)
  std::vector<double> blocks;   // subtotals over 2^N <= |k| < 2^(N+1)
  double block_ratio = 0.0;     // fitted geometric ratio of block subtotals
  double fitted_constant = 0.0;
  std::string verdict;          // "decaying", "non-decaying", "inconclusive", "finite"

  CsvTable blocks_csv() const;
};

// sum |fhat(k)|^2 / d(ka, Z)^2 over 0 < |k| <= K.
ParouxReport paroux_sum(const FourierSpec& f, const IrrationalSpec& a, long long K);

struct BisCircleReport {
  std::vector<double> left;  // sum_{n<=N} n^(-1/2) ||K^n f - m f||_inf, N = 1..N_max
  double right = 0.0;        // sum |fhat(k)| / d(2ka, Z) over the support
  double right_declared = 0.0;  // same with the declared envelope C|k|^(-1-eps) (0 if undeclared)
  bool holds = true;
  int first_violation = -1;
  SeriesDiagnostic diagnostic;  // on the left-hand terms
};

BisCircleReport bis_series_circle(const FourierSpec& f, const IrrationalSpec& a, int N_max);

}  // namespace mdlab
