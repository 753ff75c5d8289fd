#include "mdlab/transfer.hpp"

#include "mdlab/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mdlab {

namespace {

double frac(double x) { return x - std::floor(x); }

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double fit_rms(const LineFit& f, const std::vector<double>& x, const std::vector<double>& y) {
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace

// ---------------------------------------------------------------------------

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw DomainError("a grid function needs at least 2 points");
}

GridFunction GridFunction::sample(const std::function<double(double)>& f, std::size_t points) {
  if (points < 2) throw DomainError("a grid function needs at least 2 points");
  std::vector<double> v(points);
  const double h = 1.0 / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) v[i] = f(static_cast<double>(i) * h);
  return GridFunction(std::move(v));
}

double interpolate_linear(std::span<const double> g, double x) {
  const std::size_t last = g.size() - 1;
  if (x <= 0.0) return g[0];
  if (x >= 1.0) return g[last];
  const double u = x * static_cast<double>(last);
  std::size_t j = static_cast<std::size_t>(u);
  if (j >= last) j = last - 1;
  const double s = u - static_cast<double>(j);
  if (s == 0.0) return g[j];
  return g[j] + s * (g[j + 1] - g[j]);
}

double GridFunction::operator()(double x) const { return interpolate_linear(values_, x); }

// ---------------------------------------------------------------------------

GridKernel::GridKernel(std::size_t points) {
  if (points < 2) throw DomainError("a grid kernel needs at least 2 points");
  nodes_.resize(points);
  const double h = 1.0 / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) nodes_[i] = static_cast<double>(i) * h;
  set_density([](double) { return 1.0; });
}

void GridKernel::set_density(const std::function<double(double)>& density) {
  const std::size_t n = nodes_.size();
  weights_.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double edge = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    weights_[i] = edge * density(nodes_[i]);
    total += weights_[i];
  }
  for (double& w : weights_) w /= total;
}

double GridKernel::evaluate(std::span<const double> g, double state) const { return interpolate_linear(g, state); }

// ---------------------------------------------------------------------------

IntegerBetaKernel::IntegerBetaKernel(int beta, std::size_t points) : GridKernel(points), beta_(beta) {
  if (beta < 2) throw DomainError("integer beta must be >= 2");
}

std::string IntegerBetaKernel::name() const {
  return beta_ == 2 ? "doubling_pf" : "beta" + std::to_string(beta_) + "_pf";
}

std::vector<double> IntegerBetaKernel::apply(std::span<const double> g) const {
  std::vector<double> out(nodes_.size());
  const double b = static_cast<double>(beta_);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < beta_; ++k) s += interpolate_linear(g, (nodes_[i] + k) / b);
    out[i] = s / b;
  }
  return out;
}

std::vector<Transition> IntegerBetaKernel::successors(double state) const {
  std::vector<Transition> t;
  const double b = static_cast<double>(beta_);
  for (int k = 0; k < beta_; ++k) t.push_back({(state + k) / b, 1.0 / b});
  return t;
}

// ---------------------------------------------------------------------------

FullBranchKernel::FullBranchKernel(std::vector<double> breakpoints, std::size_t points)
    : GridKernel(points), breaks_(std::move(breakpoints)) {
  if (breaks_.size() < 3 || breaks_.front() != 0.0 || breaks_.back() != 1.0)
    throw DomainError("partition must start at 0, end at 1 and have at least two branches");
  for (std::size_t k = 1; k < breaks_.size(); ++k)
    if (!(breaks_[k] > breaks_[k - 1])) throw DomainError("partition breakpoints must increase strictly");
}

std::vector<double> FullBranchKernel::apply(std::span<const double> g) const {
  std::vector<double> out(nodes_.size(), 0.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
      const double len = breaks_[k + 1] - breaks_[k];
      s += len * interpolate_linear(g, breaks_[k] + len * nodes_[i]);
    }
    out[i] = s;
  }
  return out;
}

std::vector<Transition> FullBranchKernel::successors(double state) const {
  std::vector<Transition> t;
  for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
    const double len = breaks_[k + 1] - breaks_[k];
    t.push_back({breaks_[k] + len * state, len});
  }
  return t;
}

// ---------------------------------------------------------------------------

GaussKernel::GaussKernel(std::size_t points) : GridKernel(points) {
  set_density([](double x) { return 1.0 / ((1.0 + x) * std::numbers::ln2); });
}

double GaussKernel::tail_error_bound(double lipschitz) {
  // Riemann-sum error of the replaced tail: (1+x) * L/2 * sum_{k>K} (y_k - y_{k+1})^2 <= L / (3 K^3).
  const double K = static_cast<double>(kBranches);
  return lipschitz / (3.0 * K * K * K);
}

std::vector<double> GaussKernel::apply(std::span<const double> g) const {
  const std::size_t n = nodes_.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  // Cumulative integral of the interpolant at nodes.
  std::vector<double> cum(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) cum[j] = cum[j - 1] + 0.5 * h * (g[j - 1] + g[j]);
  auto integral_to = [&](double u) {
    const double pos = u / h;
    std::size_t j = std::min(static_cast<std::size_t>(pos), n - 2);
    const double s = u - static_cast<double>(j) * h;
    return cum[j] + g[j] * s + (g[j + 1] - g[j]) * s * s / (2.0 * h);
  };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = nodes_[i];
    double s = 0.0;
    for (int k = 1; k <= kBranches; ++k) {
      const double kx = k + x;
      s += interpolate_linear(g, 1.0 / kx) * (1.0 + x) / (kx * (kx + 1.0));
    }
    s += (1.0 + x) * integral_to(1.0 / (kBranches + 1 + x));
    out[i] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------

CircleKernel::CircleKernel(double a, std::size_t points) : GridKernel(points), a_(a) {}

double CircleKernel::evaluate(std::span<const double> g, double state) const {
  return interpolate_linear(g, frac(state));
}

std::vector<double> CircleKernel::apply(std::span<const double> g) const {
  const std::size_t n = nodes_.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    out[i] = 0.5 * (interpolate_linear(g, frac(nodes_[i] + a_)) + interpolate_linear(g, frac(nodes_[i] - a_)));
  out[n - 1] = out[0];
  return out;
}

std::vector<Transition> CircleKernel::successors(double state) const {
  return {{frac(state + a_), 0.5}, {frac(state - a_), 0.5}};
}

// ---------------------------------------------------------------------------

IteratedFunctionKernel::IteratedFunctionKernel(double rho, std::size_t points) : GridKernel(points), rho_(rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("contraction rho must lie in (0,1)");
  const std::size_t n = nodes_.size();
  // Columns K(e_j); the stationary vector solves w = A^T w.
  std::vector<std::vector<double>> cols(n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    cols[j] = apply(e);
    e[j] = 0.0;
  }
  std::vector<double> w(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < 5000; ++it) {
    double diff = 0.0, total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w[i] * cols[j][i];
      next[j] = s;
      total += s;
    }
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      diff = std::max(diff, std::abs(next[j] - w[j]));
    }
    w.swap(next);
    if (diff < 1e-14) break;
  }
  weights_ = std::move(w);
}

std::vector<double> IteratedFunctionKernel::apply(std::span<const double> g) const {
  const std::size_t n = nodes_.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  std::vector<double> cum(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) cum[j] = cum[j - 1] + 0.5 * h * (g[j - 1] + g[j]);
  auto integral_to = [&](double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return cum[n - 1];
    std::size_t j = std::min(static_cast<std::size_t>(u / h), n - 2);
    const double s = u - static_cast<double>(j) * h;
    return cum[j] + g[j] * s + (g[j + 1] - g[j]) * s * s / (2.0 * h);
  };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = rho_ * nodes_[i];
    out[i] = (integral_to(lo + 1.0 - rho_) - integral_to(lo)) / (1.0 - rho_);
  }
  return out;
}

// ---------------------------------------------------------------------------

IdentityGridKernel::IdentityGridKernel(std::size_t points) : GridKernel(points) {}

std::vector<double> IdentityGridKernel::apply(std::span<const double> g) const {
  return std::vector<double>(g.begin(), g.end());
}

// ---------------------------------------------------------------------------

FiniteKernel::FiniteKernel(std::string name, std::vector<std::vector<Transition>> rows, std::vector<double> stationary)
    : name_(std::move(name)), rows_(std::move(rows)), pi_(std::move(stationary)) {
  const std::size_t s = rows_.size();
  if (s == 0 || pi_.size() != s) throw DomainError("finite kernel: rows and stationary law must have equal size");
  double total = 0.0;
  for (double p : pi_) {
    if (p < 0.0) throw DomainError("finite kernel: negative stationary mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw DomainError("finite kernel: stationary law must sum to 1");
  for (const auto& row : rows_) {
    double r = 0.0;
    for (const auto& t : row) {
      if (t.probability < 0.0 || t.state < 0.0 || t.state >= static_cast<double>(s))
        throw DomainError("finite kernel: bad transition entry");
      r += t.probability;
    }
    if (std::abs(r - 1.0) > 1e-12) throw DomainError("finite kernel: rows must sum to 1");
  }
  nodes_.resize(s);
  for (std::size_t i = 0; i < s; ++i) nodes_[i] = static_cast<double>(i);
}

FiniteKernel FiniteKernel::dense(std::string name, const std::vector<std::vector<double>>& P,
                                 std::vector<double> stationary) {
  std::vector<std::vector<Transition>> rows(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (P[i].size() != P.size()) throw DomainError("transition matrix must be square");
    for (std::size_t j = 0; j < P[i].size(); ++j)
      if (P[i][j] != 0.0) rows[i].push_back({static_cast<double>(j), P[i][j]});
  }
  return FiniteKernel(std::move(name), std::move(rows), std::move(stationary));
}

std::vector<double> FiniteKernel::apply(std::span<const double> g) const {
  std::vector<double> out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double s = 0.0;
    for (const auto& t : rows_[i]) s += t.probability * g[static_cast<std::size_t>(t.state)];
    out[i] = s;
  }
  return out;
}

double FiniteKernel::evaluate(std::span<const double> g, double state) const {
  const auto i = static_cast<std::size_t>(std::llround(state));
  if (i >= g.size()) throw DomainError("finite kernel: state out of range");
  return g[i];
}

std::vector<Transition> FiniteKernel::successors(double state) const {
  const auto i = static_cast<std::size_t>(std::llround(state));
  if (i >= rows_.size()) throw DomainError("finite kernel: state out of range");
  return rows_[i];
}

// ---------------------------------------------------------------------------

GridFunction apply_pf_integer_beta(const GridFunction& f, int beta) {
  IntegerBetaKernel K(beta, f.size());
  return GridFunction(K.apply(f.values()));
}

GridFunction apply_kernel_circle(const GridFunction& f, double a) {
  CircleKernel K(a, f.size());
  return GridFunction(K.apply(f.values()));
}

double total_variation_norm(std::span<const double> f) {
  double tv = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) tv += std::abs(f[i] - f[i - 1]);
  return tv;
}

double total_variation_norm(const GridFunction& f) { return total_variation_norm(f.values()); }

double invariance_defect(const MarkovKernel& K, std::span<const double> f) {
  const auto kf = K.apply(f);
  return std::abs(K.integrate(kf) - K.integrate(f));
}

double grid_tolerance(const MarkovKernel& K, std::span<const double> f) {
  const double scale = 1.0 + max_abs(f);
  if (dynamic_cast<const GridKernel*>(&K) == nullptr) return 1e-12 * scale;
  double d2 = 0.0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) d2 = std::max(d2, std::abs(f[i + 1] - 2.0 * f[i] + f[i - 1]));
  double tail = 0.0;
  if (dynamic_cast<const GaussKernel*>(&K) && f.size() > 1) {
    double lip = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) lip = std::max(lip, std::abs(f[i] - f[i - 1]));
    tail = GaussKernel::tail_error_bound(lip * static_cast<double>(f.size() - 1));
  }
  return d2 + tail + 1e-12 * scale;
}

double duality_defect(const GridFunction& h, const GridFunction& f, int beta) {
  if (h.size() != f.size()) throw DomainError("duality check needs grids of equal size");
  IntegerBetaKernel K(beta, h.size());
  const auto kh = K.apply(h.values());
  const auto w = K.weights();
  const auto nodes = K.nodes();
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    lhs += w[i] * kh[i] * f.values()[i];
    rhs += w[i] * h.values()[i] * f(frac(beta * nodes[i]));
  }
  return lhs - rhs;
}

// ---------------------------------------------------------------------------

std::vector<double> sup_norms(const MarkovKernel& K, std::span<const double> f, int n_max) {
  if (n_max < 0) throw DomainError("n_max must be >= 0");
  const double mu = K.integrate(f);
  std::vector<double> g(f.begin(), f.end());
  std::vector<double> out;
  out.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) g = K.apply(g);
    double m = 0.0;
    for (double v : g) m = std::max(m, std::abs(v - mu));
    out.push_back(m);
  }
  return out;
}

double DecayReport::bound(std::size_t n) const {
  if (!fitted) return std::nan("");
  return kappa * std::pow(rho, static_cast<double>(n));
}

CsvTable DecayReport::to_csv() const {
  CsvTable t({"n", "u_n", "bound", "margin"});
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double b = bound(n);
    t.add(n, u[n], b, b - u[n]);
  }
  return t;
}

DecayReport sup_norm_decay(const MarkovKernel& K, std::span<const double> f, int n_max) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  const double defect = invariance_defect(K, f);
  const double tol = grid_tolerance(K, f);
  if (defect > tol) {
    std::ostringstream os;
    os << "kernel " << K.name() << " does not preserve its invariant measure on this grid (defect " << defect
       << " > tolerance " << tol << ")";
    throw DomainError(os.str());
  }
  DecayReport r;
  r.u = sup_norms(K, f, n_max);
  for (int k = 3; k + 5 <= n_max; ++k) {
    bool up = true;
    for (int j = k; j < k + 5; ++j) up = up && r.u[j + 1] > r.u[j];
    if (up) {
      r.diverging = true;
      return r;
    }
  }
  const double floor = 1e-12 * std::max(1.0, r.u[0]);
  std::size_t last = 0;
  for (std::size_t k = 1; k < r.u.size(); ++k)
    if (r.u[k] > floor) last = k;
  r.fitted = true;
  if (last == 0) {
    r.kappa = r.u[0];
    r.rho = 0.0;
    return r;
  }
  std::size_t first = std::max<std::size_t>(1, last / 2);
  if (last - first < 2) first = 1;
  std::vector<double> xs, ys;
  for (std::size_t k = first; k <= last; ++k)
    if (r.u[k] > floor) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(r.u[k]));
    }
  if (xs.size() < 2) {
    r.rho = r.u[last] / std::max(r.u[0], floor);
    r.kappa = r.u[0];
    return r;
  }
  const LineFit fit = fit_line(xs, ys);
  r.rho = std::min(1.0, std::exp(fit.slope));
  r.kappa = std::exp(fit.intercept);
  r.residual = fit_rms(fit, xs, ys);
  r.fit_first = first;
  r.fit_last = last;
  return r;
}

// ---------------------------------------------------------------------------

BvCertificate check_bv_contraction(const GridKernel& K, const std::vector<std::vector<double>>& test_functions,
                                   int n_max) {
  if (test_functions.size() < 3) throw DomainError("BV contraction check needs at least 3 test functions");
  if (n_max < 2) throw DomainError("n_max must be >= 2");
  BvCertificate c;
  c.ratios.assign(n_max + 1, 0.0);
  bool any = false;
  for (const auto& f : test_functions) {
    if (f.size() != K.size()) throw DomainError("test function does not live on the kernel grid");
    const double tv0 = total_variation_norm(f);
    if (tv0 == 0.0) continue;
    any = true;
    std::vector<double> g = f;
    c.ratios[0] = std::max(c.ratios[0], 1.0);
    for (int n = 1; n <= n_max; ++n) {
      g = K.apply(g);
      c.ratios[n] = std::max(c.ratios[n], total_variation_norm(g) / tv0);
    }
  }
  if (!any) throw DomainError("all BV test functions are constant");
  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n)
    if (c.ratios[n] > 1e-13) {
      xs.push_back(n);
      ys.push_back(std::log(c.ratios[n]));
    }
  if (xs.empty()) {
    c.rho = 0.0;
    c.kappa = 1.0;
    c.contracting = true;
    return c;
  }
  if (xs.size() == 1) {
    xs.insert(xs.begin(), 0.0);
    ys.insert(ys.begin(), 0.0);
  }
  const LineFit fit = fit_line(xs, ys);
  c.rho = std::exp(fit.slope);
  c.residual = fit_rms(fit, xs, ys);
  c.kappa = 0.0;
  for (int n = 0; n <= n_max; ++n)
    if (c.ratios[n] > 0.0) c.kappa = std::max(c.kappa, c.ratios[n] / std::pow(c.rho, n));
  c.contracting = std::isfinite(c.rho) && c.rho < 1.0 - 1e-3;
  return c;
}

std::vector<std::vector<double>> lipschitz_witnesses(const GridKernel& K) {
  std::vector<std::function<double(double)>> fs = {
      [](double x) { return x; },
      [](double x) { return 1.0 - x; },
      [](double x) { return std::abs(x - 0.5); },
      [](double x) { return std::abs(x - 0.25); },
      [](double x) { return std::abs(x - 0.75); },
  };
  for (int k = 1; k <= 3; ++k)
    fs.push_back([k](double x) { return std::sin(2.0 * std::numbers::pi * k * x) / (2.0 * std::numbers::pi * k); });
  std::vector<std::vector<double>> out;
  for (const auto& f : fs) {
    std::vector<double> v;
    for (double x : K.nodes()) v.push_back(f(x));
    out.push_back(std::move(v));
  }
  return out;
}

bool is_concave_on(const Modulus& c, double lo, double hi, int samples) {
  double prev = c(lo + (hi - lo) * 1e-6);
  for (int i = 0; i < samples; ++i) {
    // Pairs spread on a log scale toward lo, where concavity is most delicate.
    const double fx = std::pow(10.0, -6.0 * (1.0 - static_cast<double>(i) / samples));
    const double fy = std::pow(10.0, -6.0 * (1.0 - static_cast<double>(i + 1) / samples));
    const double x = lo + (hi - lo) * fx;
    const double y = lo + (hi - lo) * std::min(1.0, fy * 1.7);
    const double cx = c(x), cy = c(y), cm = c(0.5 * (x + y));
    const double tol = 1e-12 * (1.0 + std::abs(cm));
    if (cm < 0.5 * (cx + cy) - tol) return false;
    if (cy < cx - tol || cx < prev - tol) return false;
    prev = cx;
  }
  return true;
}

ModulusCheck modulus_bound_check(const GridKernel& K, std::span<const double> f, const Modulus& c, int n_max,
                                 double tolerance) {
  if (!is_concave_on(c, 0.0, 1.0)) throw DomainError("modulus " + c.name + " failed the concavity spot check");
  ModulusCheck r;
  r.tolerance = tolerance;
  r.norms = sup_norms(K, f, n_max);
  r.u.assign(n_max + 1, 0.0);
  for (const auto& g : lipschitz_witnesses(K)) {
    const auto s = sup_norms(K, g, n_max);
    for (int n = 0; n <= n_max; ++n) r.u[n] = std::max(r.u[n], s[n]);
  }
  for (int n = 0; n <= n_max; ++n) {
    const double m = c(r.u[n]) + tolerance - r.norms[n];
    r.margins.push_back(m);
    if (m < 0.0 && r.ok) {
      r.ok = false;
      r.first_violation = n;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> conditional_sum_norms(const MarkovKernel& K, std::span<const double> f, int n_max) {
  if (n_max < 1) throw DomainError("n must be >= 1");
  const double mu = K.integrate(f);
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] - mu;
  std::vector<double> acc(f.size(), 0.0), out;
  out.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    g = K.apply(g);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
    out.push_back(max_abs(acc));
  }
  return out;
}

double conditional_sum_norm(const MarkovKernel& K, std::span<const double> f, int n) {
  return conditional_sum_norms(K, f, n).back();
}

std::vector<double> conditional_square_norms(const MarkovKernel& K, std::span<const double> f,
                                             const std::vector<int>& ns, double sigma2, int cap) {
  if (ns.empty()) return {};
  if (!std::is_sorted(ns.begin(), ns.end()) || ns.front() < 1) throw DomainError("n list must be ascending and >= 1");
  const int n_max = ns.back();
  if (n_max > cap) {
    std::ostringstream os;
    os << "conditional_square_norm refused: n = " << n_max << " exceeds the cap " << cap
       << " (estimated cost " << static_cast<double>(n_max) * 2.0 * static_cast<double>(K.size())
       << " kernel node updates)";
    throw CapacityError(os.str());
  }
  const double mu = K.integrate(f);
  const std::size_t m = f.size();
  std::vector<double> fc(m), A(m, 0.0), B(m, 0.0), ta(m), tb(m), out;
  for (std::size_t i = 0; i < m; ++i) fc[i] = f[i] - mu;
  std::size_t next = 0;
  for (int n = 1; n <= n_max; ++n) {
    for (std::size_t i = 0; i < m; ++i) {
      ta[i] = fc[i] + A[i];
      tb[i] = fc[i] * fc[i] + 2.0 * fc[i] * A[i] + B[i];
    }
    A = K.apply(ta);
    B = K.apply(tb);
    while (next < ns.size() && ns[next] == n) {
      double dev = 0.0;
      for (std::size_t i = 0; i < m; ++i) dev = std::max(dev, std::abs(B[i] / n - sigma2));
      out.push_back(dev);
      ++next;
    }
  }
  return out;
}

double conditional_square_norm(const MarkovKernel& K, std::span<const double> f, int n, double sigma2, int cap) {
  return conditional_square_norms(K, f, {n}, sigma2, cap).front();
}

std::vector<double> pair_moment(const MarkovKernel& K, std::span<const double> f, int i, int j) {
  if (i < 1 || j < i) throw DomainError("pair_moment needs 1 <= i <= j");
  const double mu = K.integrate(f);
  std::vector<double> fc(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) fc[k] = f[k] - mu;
  std::vector<double> g = fc;
  for (int k = 0; k < j - i; ++k) g = K.apply(g);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] *= fc[k];
  for (int k = 0; k < i; ++k) g = K.apply(g);
  return g;
}

}  // namespace mdlab
