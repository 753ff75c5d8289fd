#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdlab/core.hpp"
#include "mdlab/csv.hpp"

namespace mdlab {

// 2^12 intervals, so dyadic points up to depth 12 are nodes.
inline constexpr std::size_t kDefaultGridPoints = 4097;

class GridFunction {
 public:
  explicit GridFunction(std::vector<double> values);
  static GridFunction sample(const std::function<double(double)>& f,
                             std::size_t points = kDefaultGridPoints);

  std::size_t size() const { return values_.size(); }
  double step() const { return 1.0 / static_cast<double>(values_.size() - 1); }
  double node(std::size_t i) const { return static_cast<double>(i) * step(); }
  double operator()(double x) const;
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

double interpolate_linear(std::span<const double> g, double x);

// Base for kernels on a uniform grid over [0,1] with piecewise-linear
// interpolation between nodes.
class GridKernel : public MarkovKernel {
 public:
  explicit GridKernel(std::size_t points);
  std::span<const double> nodes() const override { return nodes_; }
  std::span<const double> weights() const override { return weights_; }
  double evaluate(std::span<const double> g, double state) const override;

 protected:
  // Trapezoid weights against a density (normalized to total mass 1).
  void set_density(const std::function<double(double)>& density);
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

// (Kf)(x) = beta^-1 sum_{i<beta} f((x+i)/beta), Lebesgue invariant.
class IntegerBetaKernel final : public GridKernel {
 public:
  IntegerBetaKernel(int beta, std::size_t points = kDefaultGridPoints);
  std::string name() const override;
  std::vector<double> apply(std::span<const double> g) const override;
  std::vector<Transition> successors(double state) const override;
  int beta() const { return beta_; }

 private:
  int beta_;
};

// Full-branch increasing piecewise-linear map on the partition 0 = p_0 < ... < p_m = 1.
class FullBranchKernel final : public GridKernel {
 public:
  explicit FullBranchKernel(std::vector<double> breakpoints, std::size_t points = kDefaultGridPoints);
  std::string name() const override { return "full_branch_pf"; }
  std::vector<double> apply(std::span<const double> g) const override;
  std::vector<Transition> successors(double state) const override;
  std::span<const double> breakpoints() const { return breaks_; }

 private:
  std::vector<double> breaks_;
};

// Gauss map transfer operator w.r.t. the density 1/((1+x) log 2). Branches
// k <= 50 are summed; the remainder is replaced by the integral of the
// interpolant over (0, 1/(51+x)], which keeps constants fixed.
class GaussKernel final : public GridKernel {
 public:
  static constexpr int kBranches = 50;
  explicit GaussKernel(std::size_t points = kDefaultGridPoints);
  std::string name() const override { return "gauss_pf"; }
  std::vector<double> apply(std::span<const double> g) const override;
  // Bound on the error of the tail replacement for a function with Lipschitz constant L.
  static double tail_error_bound(double lipschitz);
};

// Kf(x) = (f(x+a) + f(x-a))/2 on the circle; node N-1 duplicates node 0.
class CircleKernel final : public GridKernel {
 public:
  CircleKernel(double a, std::size_t points = kDefaultGridPoints);
  std::string name() const override { return "circle_walk"; }
  std::vector<double> apply(std::span<const double> g) const override;
  double evaluate(std::span<const double> g, double state) const override;
  std::vector<Transition> successors(double state) const override;
  double step_size() const { return a_; }

 private:
  double a_;
};

// Y' = rho*Y + (1-rho)*eps with eps uniform on [0,1]; the transition integral
// is taken exactly over the interpolant. Invariant weights come from the
// stationary vector of the discretized operator.
class IteratedFunctionKernel final : public GridKernel {
 public:
  IteratedFunctionKernel(double rho, std::size_t points = 1025);
  std::string name() const override { return "iterated_function"; }
  std::vector<double> apply(std::span<const double> g) const override;
  double rho() const { return rho_; }

 private:
  double rho_;
};

class IdentityGridKernel final : public GridKernel {
 public:
  explicit IdentityGridKernel(std::size_t points = kDefaultGridPoints);
  std::string name() const override { return "identity"; }
  std::vector<double> apply(std::span<const double> g) const override;
};

// Finite-state chain with sparse rows. States are the nodes 0..S-1.
class FiniteKernel final : public MarkovKernel {
 public:
  FiniteKernel(std::string name, std::vector<std::vector<Transition>> rows, std::vector<double> stationary);
  static FiniteKernel dense(std::string name, const std::vector<std::vector<double>>& P,
                            std::vector<double> stationary);

  std::string name() const override { return name_; }
  std::span<const double> nodes() const override { return nodes_; }
  std::span<const double> weights() const override { return pi_; }
  std::vector<double> apply(std::span<const double> g) const override;
  double evaluate(std::span<const double> g, double state) const override;
  std::vector<Transition> successors(double state) const override;

 private:
  std::string name_;
  std::vector<std::vector<Transition>> rows_;
  std::vector<double> pi_;
  std::vector<double> nodes_;
};

GridFunction apply_pf_integer_beta(const GridFunction& f, int beta);
GridFunction apply_kernel_circle(const GridFunction& f, double a);
double total_variation_norm(const GridFunction& f);
double total_variation_norm(std::span<const double> f);

// |integral(Kf) - integral(f)| under the kernel's quadrature.
double invariance_defect(const MarkovKernel& K, std::span<const double> f);

// Heuristic quadrature/interpolation tolerance: h^2 * max|f''| (grid kernels) plus a floor.
double grid_tolerance(const MarkovKernel& K, std::span<const double> f);

// integral (Kh) f dmu - integral h (f o T) dmu for T(x) = beta x mod 1 under Lebesgue.
// Second order in the grid step only when f(0) = f(1), so that f o T is continuous.
double duality_defect(const GridFunction& h, const GridFunction& f, int beta);

struct DecayReport {
  std::vector<double> u;  // u_0..u_{n_max}
  bool diverging = false;
  bool fitted = false;
  double kappa = 0.0;
  double rho = 0.0;
  double residual = 0.0;
  std::size_t fit_first = 0;
  std::size_t fit_last = 0;

  double bound(std::size_t n) const;
  CsvTable to_csv() const;
};

// u_k = max over nodes |K^k f - mu(f)| with a geometric fit on the tail.
DecayReport sup_norm_decay(const MarkovKernel& K, std::span<const double> f, int n_max);

struct BvCertificate {
  bool contracting = false;
  double kappa = 0.0;
  double rho = 1.0;
  double residual = 0.0;
  std::vector<double> ratios;  // max over suite of ||d K^n f|| / ||d f||
};

BvCertificate check_bv_contraction(const GridKernel& K, const std::vector<std::vector<double>>& test_functions,
                                   int n_max);

// 1-Lipschitz witnesses used to approximate the sup in u_n (a lower bound of it).
std::vector<std::vector<double>> lipschitz_witnesses(const GridKernel& K);

struct ModulusCheck {
  std::vector<double> norms;    // ||K^n f - mu f||
  std::vector<double> u;        // witness-family u_n
  std::vector<double> margins;  // c(u_n) + tol - norm
  double tolerance = 0.0;
  bool ok = true;
  std::optional<int> first_violation;
};

bool is_concave_on(const Modulus& c, double lo, double hi, int samples = 100);

ModulusCheck modulus_bound_check(const GridKernel& K, std::span<const double> f, const Modulus& c, int n_max,
                                 double tolerance = 1e-9);

// ||K^n f - mu f||_inf for n = 0..n_max.
std::vector<double> sup_norms(const MarkovKernel& K, std::span<const double> f, int n_max);

// max_x |sum_{k=1}^n (K^k f(x) - mu f)|, returned for n = 1..n_max (index n-1).
std::vector<double> conditional_sum_norms(const MarkovKernel& K, std::span<const double> f, int n_max);
double conditional_sum_norm(const MarkovKernel& K, std::span<const double> f, int n);

inline constexpr int kSquareNormCap = 10000;

// max_x |E_x(S_n^2)/n - sigma2| for each requested n (ascending).
std::vector<double> conditional_square_norms(const MarkovKernel& K, std::span<const double> f,
                                             const std::vector<int>& ns, double sigma2,
                                             int cap = kSquareNormCap);
double conditional_square_norm(const MarkovKernel& K, std::span<const double> f, int n, double sigma2,
                               int cap = kSquareNormCap);

// E_x(X_i X_j) at the nodes, i <= j, f centered inside.
std::vector<double> pair_moment(const MarkovKernel& K, std::span<const double> f, int i, int j);

}  // namespace mdlab
