#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdlab/core.hpp"
#include "mdlab/csv.hpp"

namespace mdlab {

// 2 exp(-t^2 / (2 n c^2)).
double azuma_bound(long n, double c, double t);

// 4 sqrt(e) exp(-t^2 / (2 n [x_inf + 80 sum_j j^-3/2 cond_norms[j-1]]^2)).
// The sum runs over j <= min(n, size); with sum_all it runs over every supplied term.
double puw_bound(long n, double t, double x_inf, std::span<const double> cond_norms, bool sum_all = false);
double puw_bracket(long n, double x_inf, std::span<const double> cond_norms, bool sum_all = false);

struct ProjectionBound {
  double D = 0.0;   // sum_j p_j
  double G2 = 0.0;  // sum_i g_i^2
  double moment(double t) const;  // 4 exp(G2 D^2 t^2 / 2)
  double tail(double x) const;     // 8 exp(-x^2 / (2 G2 D^2))
};

ProjectionBound projection_bound(std::span<const double> g, std::span<const double> p);

// 2 exp(-delta^2 n / (64 B^2 c)); requires c B / n <= delta / 2.
double blocking_bound_first_term(long n, double B, long c, double delta);

// max over complete blocks of |c^-1 sum_{j in block} E(X_j | F_block start)|.
double block_average_statistic(const ProcessModel& model, const Path& path, long c);

// Exact one-sided 95% upper limit for a binomial proportion.
double clopper_pearson_upper(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

struct BoundSpec {
  enum class Kind { azuma, puw, projection };
  Kind kind = Kind::azuma;
  double c = 1.0;                  // azuma increment bound
  double x_inf = 1.0;              // puw
  std::vector<double> cond_norms;  // puw, index j-1
  bool sum_all = false;            // puw
  std::vector<double> p;           // projection norms; g == 1

  static BoundSpec azuma(double c);
  static BoundSpec puw(double x_inf, std::vector<double> cond_norms);
  static BoundSpec projection(std::vector<double> p);

  double evaluate(long n, double t) const;
  std::string name() const;
};

// Parameters taken from the model itself (bound, conditional sum norms, projection norms).
BoundSpec bound_for_model(BoundSpec::Kind kind, const ProcessModel& model, long n);

struct TailBoundReport {
  double threshold = 0.0;
  double bound = 0.0;
  std::uint64_t exceedances = 0;
  std::uint64_t replicas = 0;
  double p_hat = 0.0;
  double ci_upper = 0.0;
  bool dominated = true;
};

CsvTable tail_reports_csv(const std::vector<TailBoundReport>& reports);

// Empirical P(max_k |S_k| >= t) against the bound, one report per threshold (in input order).
std::vector<TailBoundReport> verify_domination(const ProcessModel& model, const BoundSpec& bound, long n,
                                               const std::vector<double>& thresholds, std::uint64_t replicas,
                                               std::uint64_t master_seed, std::uint64_t experiment = 0);

}  // namespace mdlab
