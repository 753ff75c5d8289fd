#include "mdlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

namespace mdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_binom_term(long n, long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0) - static_cast<double>(n) * std::numbers::ln2;
}

}  // namespace

// ---------------------------------------------------------------------------

PiecewiseLinearPath::PiecewiseLinearPath(std::vector<double> t, std::vector<double> h)
    : t_(std::move(t)), h_(std::move(h)) {
  if (t_.size() < 2 || t_.size() != h_.size()) throw DomainError("a path needs matching breakpoints and values");
  if (t_.front() != 0.0 || t_.back() != 1.0) throw DomainError("breakpoints must run from 0 to 1");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) throw DomainError("breakpoints must be strictly increasing");
  if (h_.front() != 0.0) throw DomainError("paths must start at h(0) = 0");
  for (double v : h_)
    if (!std::isfinite(v)) throw DomainError("path values must be finite");
}

PiecewiseLinearPath PiecewiseLinearPath::linear(double x) { return PiecewiseLinearPath({0.0, 1.0}, {0.0, x}); }
PiecewiseLinearPath PiecewiseLinearPath::zero() { return linear(0.0); }

double PiecewiseLinearPath::slope(std::size_t i) const { return (h_[i + 1] - h_[i]) / (t_[i + 1] - t_[i]); }

double PiecewiseLinearPath::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return h_.back();
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  return h_[i] + slope(i) * (t - t_[i]);
}

PiecewiseLinearPath PiecewiseLinearPath::scaled(double alpha) const {
  std::vector<double> h = h_;
  for (double& v : h) v *= alpha;
  h.front() = 0.0;
  return PiecewiseLinearPath(t_, std::move(h));
}

PiecewiseLinearPath PiecewiseLinearPath::refined(const std::vector<double>& extra) const {
  std::vector<double> t = t_;
  for (double s : extra)
    if (s > 0.0 && s < 1.0) t.push_back(s);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::vector<double> h;
  for (double s : t) {
    // Keep original values at original breakpoints.
    const auto it = std::lower_bound(t_.begin(), t_.end(), s);
    h.push_back(it != t_.end() && *it == s ? h_[static_cast<std::size_t>(it - t_.begin())] : (*this)(s));
  }
  return PiecewiseLinearPath(std::move(t), std::move(h));
}

double rate_I(const PiecewiseLinearPath& h, double sigma2, bool degenerate_zero_sigma) {
  if (!(sigma2 >= 0.0)) throw DomainError("sigma2 must be >= 0");
  if (sigma2 == 0.0) {
    if (!degenerate_zero_sigma) return kInf;
    const auto& v = h.values();
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }) ? 0.0 : kInf;
  }
  double s = 0.0;
  const auto& t = h.breakpoints();
  for (std::size_t i = 0; i < h.pieces(); ++i) {
    const double d = h.values()[i + 1] - h.values()[i];
    s += d * d / (t[i + 1] - t[i]);
  }
  return s / (2.0 * sigma2);
}

double rate_J_weighted(const PiecewiseLinearPath& h, const std::function<double(double)>& g, double sigma2,
                       int grid) {
  if (!(sigma2 > 0.0)) throw DomainError("rate_J_weighted needs sigma2 > 0");
  if (grid < 2) throw DomainError("weight grid must have at least 2 intervals");
  double gmin = kInf;
  for (int i = 0; i <= 16 * grid; ++i) gmin = std::min(gmin, g(static_cast<double>(i) / (16.0 * grid)));
  if (!(gmin > 0.0)) throw DomainError("weight g must stay away from 0 on [0,1]");
  std::vector<double> mesh = h.breakpoints();
  for (int i = 1; i < grid; ++i) mesh.push_back(static_cast<double>(i) / grid);
  std::sort(mesh.begin(), mesh.end());
  mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
  using boost::math::quadrature::gauss_kronrod;
  auto inv2 = [&](double u) {
    const double v = g(u);
    return 1.0 / (v * v);
  };
  double s = 0.0;
  const auto& t = h.breakpoints();
  std::size_t piece = 0;
  for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
    while (piece + 1 < h.pieces() && mesh[i] >= t[piece + 1]) ++piece;
    const double sl = h.slope(piece);
    if (sl == 0.0) continue;
    s += sl * sl * gauss_kronrod<double, 15>::integrate(inv2, mesh[i], mesh[i + 1], 0, 1e-14);
  }
  return s / (2.0 * sigma2);
}

double endpoint_rate(double x, double sigma2) {
  if (!(sigma2 >= 0.0)) throw DomainError("sigma2 must be >= 0");
  if (sigma2 == 0.0) return x == 0.0 ? 0.0 : kInf;
  return x * x / (2.0 * sigma2);
}

// ---------------------------------------------------------------------------

CsvTable MartingaleDecomposition::to_csv() const {
  CsvTable t({"block", "block_sum", "conditional_mean", "increment"});
  for (std::size_t i = 0; i < blocks; ++i) t.add(i + 1, block_sums[i], conditional_means[i], increments[i]);
  return t;
}

MartingaleDecomposition block_martingale_decompose(const ProcessModel& model, const Path& path, int m,
                                                   double tolerance) {
  if (m < 1) throw DomainError("block length m must be >= 1");
  if (!model.kernel) throw UnsupportedError("block decomposition needs a kernel model; '" + model.name + "' has none");
  const auto x = path.values();
  const auto states = path.states();
  const std::size_t n = x.size();
  if (states.empty() && !model.martingale_difference)
    throw UnsupportedError("path carries no Markov states");
  const KernelModel& km = *model.kernel;

  MartingaleDecomposition d;
  d.m = m;
  d.blocks = n / static_cast<std::size_t>(m);
  const auto cond = states.empty() ? std::function<double(double)>([](double) { return 0.0; })
                                   : km.conditional_sum_fn(m);

  // Independent recomputation by enumerating the one-step mixtures.
  std::function<double(double, int)> enumerate = [&](double y, int steps) -> double {
    if (steps == 0) return 0.0;
    double s = 0.0;
    for (const auto& tr : km.kernel->successors(y))
      s += tr.probability * (km.centered(tr.state) + enumerate(tr.state, steps - 1));
    return s;
  };
  const bool enumerable = !states.empty() && !km.kernel->successors(states[0]).empty() &&
                          std::pow(static_cast<double>(km.kernel->successors(states[0]).size()), m) <= 1e6;

  double worst = 0.0;
  for (std::size_t i = 0; i < d.blocks; ++i) {
    const std::size_t lo = i * static_cast<std::size_t>(m);
    double s = 0.0;
    for (std::size_t k = lo; k < lo + static_cast<std::size_t>(m); ++k) s += x[k];
    const double e = states.empty() ? 0.0 : cond(states[lo]);
    d.block_sums.push_back(s);
    d.conditional_means.push_back(e);
    d.increments.push_back(s - e);
    if (enumerable) worst = std::max(worst, std::abs(enumerate(states[lo], m) - e));
  }
  if (states.empty()) {
    d.max_increment_conditional_mean = 0.0;  // independent increments
    d.verified = true;
  } else if (enumerable) {
    d.max_increment_conditional_mean = worst;
    d.verified = worst <= tolerance;
  } else {
    d.max_increment_conditional_mean = std::nan("");
    d.verified = false;
  }

  d.residual.assign(n + 1, 0.0);
  double S = 0.0, M = 0.0, E = 0.0, maxE = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    S += x[j - 1];
    if (j % static_cast<std::size_t>(m) == 0 && j / static_cast<std::size_t>(m) <= d.blocks) {
      M += d.increments[j / static_cast<std::size_t>(m) - 1];
      E += d.conditional_means[j / static_cast<std::size_t>(m) - 1];
      maxE = std::max(maxE, std::abs(E));
    }
    d.residual[j] = S - M;
    d.residual_sup = std::max(d.residual_sup, std::abs(d.residual[j]));
  }
  double tail = 0.0;
  for (std::size_t k = d.blocks * static_cast<std::size_t>(m); k < n; ++k) tail += x[k];
  double sumD = 0.0, sumE = 0.0;
  for (std::size_t i = 0; i < d.blocks; ++i) {
    sumD += d.increments[i];
    sumE += d.conditional_means[i];
  }
  double Sn = 0.0;
  for (double v : x) Sn += v;
  d.reconstruction_error = std::abs(sumD + sumE + tail - Sn);
  d.residual_bound = static_cast<double>(m) * model.bound + maxE;
  return d;
}

// ---------------------------------------------------------------------------

double exact_binomial_tail_log(long n, double t) {
  if (n < 1 || n > 10'000'000) throw DomainError("exact binomial tail needs 1 <= n <= 1e7");
  // S_n = 2K - n >= t  <=>  K >= (n + t)/2.
  const double kr = std::ceil((static_cast<double>(n) + t) / 2.0 - 1e-9);
  if (kr <= 0.0) return 0.0;
  if (kr > static_cast<double>(n)) return -kInf;
  const long k0 = static_cast<long>(kr);
  const long mode = std::max(k0, n / 2);
  double acc = log_binom_term(n, mode);
  const double lead = acc;
  for (long k = mode + 1; k <= n; ++k) {
    const double v = log_binom_term(n, k);
    acc = log_add(acc, v);
    if (v - acc < std::log(1e-15) && v < lead) break;
  }
  for (long k = mode - 1; k >= k0; --k) {
    const double v = log_binom_term(n, k);
    acc = log_add(acc, v);
    if (v - acc < std::log(1e-15)) break;
  }
  return std::min(acc, 0.0);
}

double law_cgf(const IidLaw& law, double th) {
  switch (law.kind) {
    case IidLaw::Kind::rademacher: {
      const double a = std::abs(th);
      return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
    }
    case IidLaw::Kind::uniform: {
      const double s = std::abs(law.c * th);
      if (s < 1e-4) return s * s / 6.0 - std::pow(s, 4) / 180.0;
      return s + std::log1p(-std::exp(-2.0 * s)) - std::numbers::ln2 - std::log(s);
    }
    case IidLaw::Kind::two_point:
      return log_add(std::log(law.p) + th * law.a, std::log1p(-law.p) + th * law.b);
  }
  return 0.0;
}

double law_tilted_mean(const IidLaw& law, double th) {
  switch (law.kind) {
    case IidLaw::Kind::rademacher: return std::tanh(th);
    case IidLaw::Kind::uniform: {
      const double s = law.c * th;
      if (std::abs(s) < 1e-3) return law.c * (s / 3.0 - s * s * s / 45.0);
      return law.c / std::tanh(s) - 1.0 / th;
    }
    case IidLaw::Kind::two_point: {
      const double qa = 1.0 / (1.0 + (1.0 - law.p) / law.p * std::exp(th * (law.b - law.a)));
      return qa * law.a + (1.0 - qa) * law.b;
    }
  }
  return 0.0;
}

double law_tilted_variance(const IidLaw& law, double th) {
  switch (law.kind) {
    case IidLaw::Kind::rademacher: {
      const double m = std::tanh(th);
      return 1.0 - m * m;
    }
    case IidLaw::Kind::uniform: {
      const double s = law.c * th;
      if (std::abs(s) < 1e-2) return law.c * law.c * (1.0 / 3.0 - s * s / 15.0);
      const double sh = std::sinh(s);
      return 1.0 / (th * th) - law.c * law.c / (sh * sh);
    }
    case IidLaw::Kind::two_point: {
      const double qa = 1.0 / (1.0 + (1.0 - law.p) / law.p * std::exp(th * (law.b - law.a)));
      return qa * (1.0 - qa) * (law.b - law.a) * (law.b - law.a);
    }
  }
  return 0.0;
}

double solve_tilt(const IidLaw& law, double m) {
  if (!(m > law.lower() && m < law.upper())) {
    std::ostringstream os;
    os << "tilt target " << m << " lies outside the open mean range (" << law.lower() << ", " << law.upper() << ")";
    throw DomainError(os.str());
  }
  if (m == 0.0) return 0.0;
  double lo = 0.0, hi = m > 0.0 ? 1.0 : -1.0;
  while ((m > 0.0 ? law_tilted_mean(law, hi) < m : law_tilted_mean(law, hi) > m)) {
    lo = hi;
    hi *= 2.0;
    if (std::abs(hi) > 1e8) throw DomainError("tilt equation has no solution in range");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool below = law_tilted_mean(law, mid) < m;
    if ((m > 0.0) == below) lo = mid; else hi = mid;
    if (lo == mid && hi == mid) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

double sample_tilted(const IidLaw& law, double th, RngStream& rng) {
  switch (law.kind) {
    case IidLaw::Kind::rademacher: {
      const double q = 1.0 / (1.0 + std::exp(-2.0 * th));
      return rng.uniform() < q ? 1.0 : -1.0;
    }
    case IidLaw::Kind::uniform: {
      const double u = rng.uniform();
      if (std::abs(th * law.c) < 1e-12) return law.c * (2.0 * u - 1.0);
      if (th > 0.0) return law.c + std::log(u + (1.0 - u) * std::exp(-2.0 * th * law.c)) / th;
      return -law.c + std::log1p(u * std::expm1(2.0 * th * law.c)) / th;
    }
    case IidLaw::Kind::two_point: {
      const double qa = 1.0 / (1.0 + (1.0 - law.p) / law.p * std::exp(th * (law.b - law.a)));
      return rng.uniform() < qa ? law.a : law.b;
    }
  }
  return 0.0;
}

}  // namespace

LogEstimate tilted_is_estimator(const IidLaw& law, long n, double t, std::uint64_t replicas,
                                std::uint64_t master_seed, std::uint64_t experiment) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (replicas < 2) throw DomainError("need at least 2 replicas");
  const double th = t <= 0.0 ? 0.0 : solve_tilt(law, t / static_cast<double>(n));
  const double nl = static_cast<double>(n) * law_cgf(law, th);
  std::vector<double> w(replicas, 0.0);
  parallel_for(replicas, [&](std::size_t r) {
    RngStream rng(master_seed, stream_index(experiment, r));
    double s = 0.0;
    for (long k = 0; k < n; ++k) s += sample_tilted(law, th, rng);
    // Likelihood ratio exp(n L - th s), stored relative to exp(n L - th t).
    if (s >= t - 1e-9) w[r] = std::exp(-th * (s - t));
  });
  double mean = 0.0, hits = 0.0;
  for (double v : w) {
    mean += v;
    if (v > 0.0) hits += 1.0;
  }
  const double R = static_cast<double>(replicas);
  mean /= R;
  double ss = 0.0;
  for (double v : w) ss += (v - mean) * (v - mean);
  LogEstimate e;
  e.theta = th;
  e.hits = static_cast<std::uint64_t>(hits);
  if (mean == 0.0) {
    e.log_p = -kInf;
    e.se = kInf;
    return e;
  }
  e.log_p = nl - th * t + std::log(mean);
  e.se = std::sqrt(ss / (R - 1.0) / R) / mean;
  return e;
}

// ---------------------------------------------------------------------------

std::string to_string(MdpMethod m) {
  switch (m) {
    case MdpMethod::naive: return "naive";
    case MdpMethod::exact_binomial: return "exact_binomial";
    case MdpMethod::tilted: return "tilted";
  }
  return "?";
}

MdpMethod parse_mdp_method(const std::string& s) {
  if (s == "naive") return MdpMethod::naive;
  if (s == "exact_binomial" || s == "exact") return MdpMethod::exact_binomial;
  if (s == "tilted") return MdpMethod::tilted;
  throw ConfigError("unknown mdp method '" + s + "'");
}

double log_normal_tail(double z) {
  if (z < 30.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  // Asymptotic series for the Mills ratio.
  const double z2 = z * z;
  return -0.5 * z2 - std::log(z * std::sqrt(2.0 * std::numbers::pi)) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) + 105.0 / (z2 * z2 * z2 * z2));
}

MdpPoint empirical_mdp_point(const ProcessModel& model, long n, double a_n, double x, MdpMethod method,
                             std::uint64_t replicas, double sigma2, std::uint64_t master_seed,
                             std::uint64_t experiment) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(a_n > 0.0)) throw DomainError("a_n must be > 0");
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be > 0 for an mdp point");
  MdpPoint p;
  p.model = model.name;
  p.n = n;
  p.a_n = a_n;
  p.x = x;
  p.method = method;
  p.threshold = x * std::sqrt(static_cast<double>(n) / a_n);
  p.target = -x * x / (2.0 * sigma2);
  const double z = p.threshold / std::sqrt(static_cast<double>(n) * sigma2);
  p.gaussian_reference = a_n * log_normal_tail(z);

  switch (method) {
    case MdpMethod::exact_binomial: {
      if (!model.iid_law || model.iid_law->kind != IidLaw::Kind::rademacher)
        throw UnsupportedError("exact_binomial needs the iid Rademacher model");
      p.estimate = a_n * exact_binomial_tail_log(n, p.threshold);
      p.se = 0.0;
      break;
    }
    case MdpMethod::tilted: {
      if (!model.iid_law) throw UnsupportedError("tilted estimator needs an iid model");
      const LogEstimate e = tilted_is_estimator(*model.iid_law, n, p.threshold, replicas, master_seed, experiment);
      if (e.hits == 0) {
        p.no_exceedance = true;
        p.estimate = std::nan("");
      } else {
        p.estimate = a_n * e.log_p;
      }
      p.se = a_n * e.se;
      break;
    }
    case MdpMethod::naive: {
      const double expected = static_cast<double>(replicas) * std::exp(log_normal_tail(z));
      if (expected < 20.0) {
        std::ostringstream os;
        os << "naive estimate refused: about " << expected << " exceedances expected from " << replicas
           << " replicas (need >= 20); raise replicas to at least "
           << std::ceil(20.0 / std::exp(log_normal_tail(z))) << " or use the tilted/exact method";
        throw CapacityError(os.str());
      }
      std::vector<char> hit(replicas, 0);
      parallel_for(replicas, [&](std::size_t r) {
        RngStream rng(master_seed, stream_index(experiment, r));
        const Path path = model.sample(static_cast<std::size_t>(n), rng);
        double s = 0.0;
        for (double v : path.values()) s += v;
        hit[r] = s >= p.threshold ? 1 : 0;
      });
      double k = 0.0;
      for (char h : hit) k += h;
      if (k == 0.0) {
        p.no_exceedance = true;
        p.estimate = std::nan("");
        p.se = std::nan("");
      } else {
        const double ph = k / static_cast<double>(replicas);
        p.estimate = a_n * std::log(ph);
        p.se = a_n * std::sqrt((1.0 - ph) / (ph * static_cast<double>(replicas)));
      }
      break;
    }
  }
  p.gap = p.no_exceedance ? std::nan("") : p.estimate - p.target;
  return p;
}

CsvTable DeviationScanReport::to_csv() const {
  CsvTable t({"model", "n", "a_n", "x", "method", "estimate", "target", "gap", "se"});
  for (const auto& r : rows) {
    if (r.no_exceedance)
      t.add(r.model, r.n, r.a_n, r.x, to_string(r.method), "no exceedance observed", r.target, "", "");
    else
      t.add(r.model, r.n, r.a_n, r.x, to_string(r.method), r.estimate, r.target, r.gap, r.se);
  }
  return t;
}

CsvTable DeviationScanReport::diagnostics_csv() const {
  // Gaussian reference with the exact normal tail; a finite-n diagnostic only.
  CsvTable t({"n", "x", "threshold", "gaussian_reference"});
  for (const auto& r : rows) t.add(r.n, r.x, r.threshold, r.gaussian_reference);
  return t;
}

std::string DeviationScanReport::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["gaps_shrink"] = gaps_shrink;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["model"] = r.model;
    o["n"] = r.n;
    o["a_n"] = r.a_n;
    o["x"] = r.x;
    o["method"] = to_string(r.method);
    if (r.no_exceedance) {
      o["estimate"] = "no exceedance observed";
      o["gap"] = nullptr;
      o["se"] = nullptr;
    } else {
      o["estimate"] = r.estimate;
      o["gap"] = r.gap;
      o["se"] = r.se;
    }
    o["target"] = r.target;
    j["rows"].push_back(o);
  }
  return j.dump(2) + "\n";
}

DeviationScanReport mdp_scan(const ProcessModel& model, const SpeedSequence& speed, const std::vector<long>& ns,
                             const std::vector<double>& xs, double sigma2, MdpMethod method,
                             std::uint64_t replicas, std::uint64_t master_seed, std::uint64_t experiment) {
  if (ns.empty() || xs.empty()) throw DomainError("mdp_scan needs nonempty n and x grids");
  std::vector<long> sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  DeviationScanReport rep;
  std::uint64_t cell = 0;
  for (long n : sorted)
    for (double x : xs)
      rep.rows.push_back(empirical_mdp_point(model, n, speed(n), x, method, replicas, sigma2, master_seed,
                                             stream_index(experiment, cell++)));
  rep.gaps_shrink = true;
  for (double x : xs) {
    const MdpPoint* first = nullptr;
    const MdpPoint* last = nullptr;
    for (const auto& r : rep.rows)
      if (r.x == x) {
        if (!first) first = &r;
        last = &r;
      }
    if (!first || first == last || first->no_exceedance || last->no_exceedance ||
        !(std::abs(last->gap) < std::abs(first->gap)))
      rep.gaps_shrink = false;
  }
  rep.label = rep.gaps_shrink ? "gaps shrink" : "gaps do not shrink";
  return rep;
}

}  // namespace mdlab
