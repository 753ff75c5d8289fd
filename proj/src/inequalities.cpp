#include "mdlab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/beta.hpp>

#include "mdlab/conditions.hpp"

namespace mdlab {

double azuma_bound(long n, double c, double t) {
  if (n < 1) throw DomainError("azuma_bound needs n >= 1");
  if (!(c > 0.0)) throw DomainError("azuma_bound needs c > 0");
  if (t < 0.0) throw DomainError("threshold must be >= 0");
  return 2.0 * std::exp(-t * t / (2.0 * static_cast<double>(n) * c * c));
}

double puw_bracket(long n, double x_inf, std::span<const double> cond_norms, bool sum_all) {
  if (n < 1) throw DomainError("puw_bound needs n >= 1");
  if (x_inf < 0.0) throw DomainError("x_inf must be >= 0");
  const std::size_t top = sum_all ? cond_norms.size() : std::min<std::size_t>(cond_norms.size(), n);
  double s = 0.0;
  for (std::size_t j = 1; j <= top; ++j) {
    const double v = cond_norms[j - 1];
    if (v < 0.0) throw DomainError("conditional norms must be >= 0");
    s += std::pow(static_cast<double>(j), -1.5) * v;
  }
  return x_inf + 80.0 * s;
}

double puw_bound(long n, double t, double x_inf, std::span<const double> cond_norms, bool sum_all) {
  if (t < 0.0) throw DomainError("threshold must be >= 0");
  const double b = puw_bracket(n, x_inf, cond_norms, sum_all);
  const double pre = 4.0 * std::exp(0.5);
  if (b == 0.0) return t > 0.0 ? 0.0 : pre;
  return pre * std::exp(-t * t / (2.0 * static_cast<double>(n) * b * b));
}

double ProjectionBound::moment(double t) const { return 4.0 * std::exp(0.5 * G2 * D * D * t * t); }

double ProjectionBound::tail(double x) const {
  if (x < 0.0) throw DomainError("threshold must be >= 0");
  const double s = G2 * D * D;
  if (s == 0.0) return x > 0.0 ? 0.0 : 8.0;
  return 8.0 * std::exp(-x * x / (2.0 * s));
}

ProjectionBound projection_bound(std::span<const double> g, std::span<const double> p) {
  ProjectionBound b;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("projection norms must be finite and >= 0");
    b.D += v;
  }
  for (double v : g) b.G2 += v * v;
  return b;
}

double blocking_bound_first_term(long n, double B, long c, double delta) {
  if (n < 1 || c < 1) throw DomainError("blocking bound needs n >= 1 and a natural block length c");
  if (!(B > 0.0) || !(delta > 0.0)) throw DomainError("blocking bound needs B > 0 and delta > 0");
  const double lhs = static_cast<double>(c) * B / static_cast<double>(n);
  if (lhs > 0.5 * delta * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "block constraint violated: c B / n = " << lhs << " > delta / 2 = " << 0.5 * delta;
    throw DomainError(os.str());
  }
  return 2.0 * std::exp(-delta * delta * static_cast<double>(n) / (64.0 * B * B * static_cast<double>(c)));
}

double block_average_statistic(const ProcessModel& model, const Path& path, long c) {
  if (c < 1) throw DomainError("block length must be >= 1");
  if (model.martingale_difference && !model.kernel) return 0.0;
  if (!model.kernel) throw UnsupportedError("block statistic needs a kernel model");
  const auto states = path.states();
  const std::size_t n = path.size();
  if (states.empty()) {
    if (model.martingale_difference) return 0.0;
    throw UnsupportedError("path carries no Markov states");
  }
  const auto g = model.kernel->conditional_sum_fn(static_cast<int>(c));
  double m = 0.0;
  for (std::size_t s = 0; s + static_cast<std::size_t>(c) <= n; s += static_cast<std::size_t>(c))
    m = std::max(m, std::abs(g(states[s])) / static_cast<double>(c));
  return m;
}

double clopper_pearson_upper(std::uint64_t k, std::uint64_t N, double level) {
  if (N == 0) throw DomainError("no trials");
  if (k > N) throw DomainError("more successes than trials");
  if (k == N) return 1.0;
  boost::math::beta_distribution<double> d(static_cast<double>(k + 1), static_cast<double>(N - k));
  return boost::math::quantile(d, level);
}

BoundSpec BoundSpec::azuma(double c) {
  BoundSpec b;
  b.kind = Kind::azuma;
  b.c = c;
  return b;
}

BoundSpec BoundSpec::puw(double x_inf, std::vector<double> cond_norms) {
  BoundSpec b;
  b.kind = Kind::puw;
  b.x_inf = x_inf;
  b.cond_norms = std::move(cond_norms);
  return b;
}

BoundSpec BoundSpec::projection(std::vector<double> p) {
  BoundSpec b;
  b.kind = Kind::projection;
  b.p = std::move(p);
  return b;
}

double BoundSpec::evaluate(long n, double t) const {
  switch (kind) {
    case Kind::azuma: return azuma_bound(n, c, t);
    case Kind::puw: return puw_bound(n, t, x_inf, cond_norms, sum_all);
    case Kind::projection: {
      std::vector<double> g(static_cast<std::size_t>(n), 1.0);
      return projection_bound(g, p).tail(t);
    }
  }
  return 0.0;
}

std::string BoundSpec::name() const {
  switch (kind) {
    case Kind::azuma: return "azuma";
    case Kind::puw: return "puw";
    case Kind::projection: return "projection";
  }
  return "?";
}

BoundSpec bound_for_model(BoundSpec::Kind kind, const ProcessModel& model, long n) {
  switch (kind) {
    case BoundSpec::Kind::azuma:
      if (!model.martingale_difference)
        throw DomainError("azuma bound applies to martingale differences; '" + model.name + "' is not one");
      return BoundSpec::azuma(model.bound);
    case BoundSpec::Kind::puw: {
      std::vector<double> norms;
      if (model.kernel) {
        norms = kernel_conditional_sum_norms(*model.kernel, static_cast<int>(n));
      } else if (model.martingale_difference) {
        norms.assign(static_cast<std::size_t>(n), 0.0);
      } else if (model.conditional_mean_bound) {
        double acc = 0.0;
        for (long j = 1; j <= n; ++j) {
          acc += model.conditional_mean_bound(static_cast<std::size_t>(j));
          norms.push_back(acc);
        }
      } else {
        throw UnsupportedError("no conditional norms available for '" + model.name + "'");
      }
      return BoundSpec::puw(model.bound, std::move(norms));
    }
    case BoundSpec::Kind::projection:
      if (model.projection_norms.empty())
        throw UnsupportedError("'" + model.name + "' carries no projection norms");
      return BoundSpec::projection(model.projection_norms);
  }
  throw DomainError("unknown bound kind");
}

CsvTable tail_reports_csv(const std::vector<TailBoundReport>& reports) {
  CsvTable t({"threshold", "bound", "p_hat", "ci_upper", "exceedances", "replicas", "verdict"});
  for (const auto& r : reports)
    t.add(r.threshold, r.bound, r.p_hat, r.ci_upper, r.exceedances, r.replicas,
          r.dominated ? "dominated" : "violated");
  return t;
}

namespace {

void check_consistent(const ProcessModel& model, const BoundSpec& b) {
  const double tol = 1e-12 * std::max(1.0, model.bound);
  auto reject = [&](const std::string& why) {
    throw DomainError("bound '" + b.name() + "' is inconsistent with model '" + model.name + "': " + why);
  };
  switch (b.kind) {
    case BoundSpec::Kind::azuma:
      if (!model.martingale_difference) reject("the model is not a martingale difference sequence");
      if (b.c < model.bound - tol) reject("c is below ||X||_inf");
      break;
    case BoundSpec::Kind::puw:
      if (b.x_inf < model.bound - tol) reject("x_inf is below ||X||_inf");
      break;
    case BoundSpec::Kind::projection: {
      double d = 0.0, dm = 0.0;
      for (double v : b.p) d += v;
      for (double v : model.projection_norms) dm += v;
      if (!model.projection_norms.empty() && d < dm - tol) reject("sum of p_j is below the model's projection norms");
      break;
    }
  }
}

}  // namespace

std::vector<TailBoundReport> verify_domination(const ProcessModel& model, const BoundSpec& bound, long n,
                                               const std::vector<double>& thresholds, std::uint64_t replicas,
                                               std::uint64_t master_seed, std::uint64_t experiment) {
  if (replicas < 1000) throw DomainError("verify_domination needs at least 1000 replicas");
  if (n < 1) throw DomainError("path length must be >= 1");
  check_consistent(model, bound);
  std::vector<double> stat(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    RngStream rng(master_seed, stream_index(experiment, r));
    stat[r] = max_abs_partial_sum(model.sample(static_cast<std::size_t>(n), rng));
  });
  std::sort(stat.begin(), stat.end());
  std::vector<TailBoundReport> out;
  for (double t : thresholds) {
    TailBoundReport r;
    r.threshold = t;
    r.bound = bound.evaluate(n, t);
    r.replicas = replicas;
    r.exceedances = static_cast<std::uint64_t>(stat.end() - std::lower_bound(stat.begin(), stat.end(), t));
    r.p_hat = static_cast<double>(r.exceedances) / static_cast<double>(replicas);
    r.ci_upper = clopper_pearson_upper(r.exceedances, replicas);
    r.dominated = r.ci_upper <= r.bound;
    out.push_back(r);
  }
  return out;
}

}  // namespace mdlab
