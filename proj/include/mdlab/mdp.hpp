#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdlab/core.hpp"
#include "mdlab/csv.hpp"

namespace mdlab {

class PiecewiseLinearPath {
 public:
  // Breakpoints 0 = t_0 < ... < t_m = 1 and values with h(t_0) = 0.
  PiecewiseLinearPath(std::vector<double> t, std::vector<double> h);
  static PiecewiseLinearPath linear(double x);  // h(t) = x t
  static PiecewiseLinearPath zero();

  const std::vector<double>& breakpoints() const { return t_; }
  const std::vector<double>& values() const { return h_; }
  std::size_t pieces() const { return t_.size() - 1; }
  double slope(std::size_t i) const;  // on [t_i, t_{i+1}]
  double operator()(double t) const;

  PiecewiseLinearPath scaled(double alpha) const;
  // Same path with extra (collinear) breakpoints inserted.
  PiecewiseLinearPath refined(const std::vector<double>& extra) const;

 private:
  std::vector<double> t_;
  std::vector<double> h_;
};

// (1/2 sigma2) int (h')^2. For sigma2 = 0: +inf, or with degenerate_zero_sigma 0 at h == 0.
double rate_I(const PiecewiseLinearPath& h, double sigma2, bool degenerate_zero_sigma = false);

// (1/2 sigma2) int (h'/g)^2 with g > 0 on [0,1].
double rate_J_weighted(const PiecewiseLinearPath& h, const std::function<double(double)>& g, double sigma2,
                       int grid = 1024);

// x^2 / (2 sigma2).
double endpoint_rate(double x, double sigma2);

struct MartingaleDecomposition {
  int m = 0;
  std::size_t blocks = 0;
  std::vector<double> block_sums;          // X_{i,m}
  std::vector<double> conditional_means;   // E(X_{i,m} | F_{(i-1)m})
  std::vector<double> increments;          // D_{i,m}
  std::vector<double> residual;            // S_j - sum of D over blocks ending by j, j = 0..n
  double max_increment_conditional_mean = 0.0;  // recomputed by enumeration (NaN if not enumerable)
  double reconstruction_error = 0.0;       // |sum D + sum E + tail - S_n|
  double residual_sup = 0.0;
  double residual_bound = 0.0;             // m B + max_j |sum_{i<=j} E_i|
  bool verified = false;                   // increments' conditional means below tolerance

  CsvTable to_csv() const;
};

MartingaleDecomposition block_martingale_decompose(const ProcessModel& model, const Path& path, int m,
                                                   double tolerance = 1e-10);

// log P(S_n >= t) for a sum of n fair +-1 steps.
double exact_binomial_tail_log(long n, double t);

// Cumulant generating function helpers for bounded iid laws.
double law_cgf(const IidLaw& law, double theta);
double law_tilted_mean(const IidLaw& law, double theta);
double law_tilted_variance(const IidLaw& law, double theta);
// theta with tilted mean equal to m (bisection); m must lie strictly inside (lower, upper).
double solve_tilt(const IidLaw& law, double m);

struct LogEstimate {
  double log_p = 0.0;
  double se = 0.0;  // standard error of log_p
  double theta = 0.0;
  std::uint64_t hits = 0;
};

LogEstimate tilted_is_estimator(const IidLaw& law, long n, double t, std::uint64_t replicas,
                                std::uint64_t master_seed, std::uint64_t experiment = 0);

enum class MdpMethod { naive, exact_binomial, tilted };
std::string to_string(MdpMethod m);
MdpMethod parse_mdp_method(const std::string& s);

struct MdpPoint {
  std::string model;
  long n = 0;
  double a_n = 0.0;
  double x = 0.0;
  MdpMethod method = MdpMethod::naive;
  double threshold = 0.0;  // t = x sqrt(n / a_n)
  double estimate = 0.0;   // a_n log P(S_n >= t)
  double se = 0.0;
  double target = 0.0;     // -x^2 / (2 sigma2)
  double gap = 0.0;
  bool no_exceedance = false;
  double gaussian_reference = 0.0;  // a_n log P(N(0, n sigma2) >= t), finite-n diagnostic
};

// sigma2 is used for the target and for the naive pre-flight check.
MdpPoint empirical_mdp_point(const ProcessModel& model, long n, double a_n, double x, MdpMethod method,
                             std::uint64_t replicas, double sigma2, std::uint64_t master_seed,
                             std::uint64_t experiment = 0);

struct DeviationScanReport {
  std::vector<MdpPoint> rows;
  // Per x: |gap| at the largest n is below |gap| at the smallest n.
  bool gaps_shrink = false;
  std::string label;

  CsvTable to_csv() const;
  CsvTable diagnostics_csv() const;
  std::string to_json() const;
};

DeviationScanReport mdp_scan(const ProcessModel& model, const SpeedSequence& speed, const std::vector<long>& ns,
                             const std::vector<double>& xs, double sigma2, MdpMethod method,
                             std::uint64_t replicas, std::uint64_t master_seed, std::uint64_t experiment = 0);

// log of the upper standard normal tail.
double log_normal_tail(double z);

}  // namespace mdlab
