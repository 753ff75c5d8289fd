#include "mdlab/processes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mdlab/transfer.hpp"

namespace mdlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) { return format_double(v); }

// Support points and weights of a quadrature that integrates x and x^2 exactly.
void law_nodes(const IidLaw& law, std::vector<double>& values, std::vector<double>& weights) {
  switch (law.kind) {
    case IidLaw::Kind::rademacher:
      values = {-1.0, 1.0};
      weights = {0.5, 0.5};
      break;
    case IidLaw::Kind::uniform:
      values = {-law.c / std::sqrt(3.0), law.c / std::sqrt(3.0)};
      weights = {0.5, 0.5};
      break;
    case IidLaw::Kind::two_point:
      values = {law.a, law.b};
      weights = {law.p, 1.0 - law.p};
      break;
  }
}

std::size_t sample_index(const std::vector<double>& cumulative, double u) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::vector<double> cumulative_of(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    c[i] = acc;
  }
  for (double& v : c) v /= acc;
  return c;
}

// E exp(i t eps) for the iid innovation laws.
std::complex<double> characteristic(const IidLaw& law, double t) {
  switch (law.kind) {
    case IidLaw::Kind::rademacher: return {std::cos(t), 0.0};
    case IidLaw::Kind::uniform: {
      const double x = law.c * t;
      return {std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x, 0.0};
    }
    case IidLaw::Kind::two_point:
      return law.p * std::exp(std::complex<double>(0.0, t * law.a)) +
             (1.0 - law.p) * std::exp(std::complex<double>(0.0, t * law.b));
  }
  return {1.0, 0.0};
}

bool symmetric_law(const IidLaw& law) {
  if (law.kind != IidLaw::Kind::two_point) return true;
  return std::abs(law.p - 0.5) < 1e-15 && std::abs(law.a + law.b) < 1e-15 * std::abs(law.b);
}

// Integral against the Gauss measure density 1/((1+x) log 2).
double gauss_measure_integral(const std::function<double(double)>& f) {
  auto g = [&](double x) { return f(x) / ((1.0 + x) * std::numbers::ln2); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return GK::integrate(g, 0.0, 0.5, 15, 1e-14) + GK::integrate(g, 0.5, 1.0, 15, 1e-14);
}

struct UnitObservable {
  std::function<double(double)> f;
  double lo = 0.0, hi = 0.0;  // range of f on [0,1]
  double lebesgue_mean = 0.0;
};

UnitObservable unit_observable(const std::string& name, int frequency, double alpha) {
  UnitObservable o;
  if (name == "cos") {
    if (frequency < 1) throw DomainError("cosine observable needs frequency >= 1");
    o.f = [frequency](double x) { return std::cos(kTwoPi * frequency * x); };
    o.lo = -1.0;
    o.hi = 1.0;
    o.lebesgue_mean = 0.0;
  } else if (name == "identity") {
    o.f = [](double x) { return x; };
    o.hi = 1.0;
    o.lebesgue_mean = 0.5;
  } else if (name == "constant") {
    o.f = [](double) { return 1.0; };
    o.lo = o.hi = 1.0;
    o.lebesgue_mean = 1.0;
  } else if (name == "holder") {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("holder observable needs alpha in (0,1]");
    o.f = [alpha](double x) { return std::pow(std::abs(x - 0.5), alpha); };
    o.hi = std::pow(0.5, alpha);
    o.lebesgue_mean = std::pow(0.5, alpha) / (alpha + 1.0);
  } else if (name == "indicator") {
    o.f = [](double x) { return x < 0.5 ? 1.0 : 0.0; };
    o.hi = 1.0;
    o.lebesgue_mean = 0.5;
  } else {
    throw UnsupportedError("unknown observable '" + name + "'");
  }
  return o;
}

double sum_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

double CoefficientSpec::coefficient(long i) const {
  if (i < 0 && !two_sided) return 0.0;
  const long a = std::labs(i);
  switch (kind) {
    case Kind::geometric: return scale * std::pow(rate, static_cast<double>(a));
    case Kind::power: return scale * std::pow(1.0 + static_cast<double>(a), -rate);
    case Kind::finite: return static_cast<std::size_t>(a) < values.size() ? values[static_cast<std::size_t>(a)] : 0.0;
  }
  return 0.0;
}

double CoefficientSpec::one_sided_tail(long n) const {
  n = std::max(n, 0L);
  switch (kind) {
    case Kind::geometric:
      if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("geometric coefficients need 0 <= rate < 1");
      return std::abs(scale) * std::pow(rate, static_cast<double>(n)) / (1.0 - rate);
    case Kind::power: {
      if (!(rate > 1.0)) throw DomainError("power coefficients need exponent > 1 to be summable");
      // sum_{j >= m} j^-p <= m^-p + m^(1-p)/(p-1), with m = n+1.
      const double m = static_cast<double>(n) + 1.0;
      return std::abs(scale) * (std::pow(m, -rate) + std::pow(m, 1.0 - rate) / (rate - 1.0));
    }
    case Kind::finite: {
      double s = 0.0;
      for (std::size_t i = static_cast<std::size_t>(n); i < values.size(); ++i) s += std::abs(values[i]);
      return s;
    }
  }
  return 0.0;
}

double CoefficientSpec::abs_sum() const {
  const double one = one_sided_tail(0);
  return two_sided ? 2.0 * one - std::abs(coefficient(0)) : one;
}

long CoefficientSpec::truncation_radius(double width, double tol) const {
  if (!(tol > 0.0)) throw DomainError("truncation tolerance must be positive");
  const double sides = two_sided ? 2.0 : 1.0;
  auto tail_after = [&](long M) { return width * sides * one_sided_tail(M + 1); };
  if (kind == Kind::finite) {
    long M = static_cast<long>(values.size()) - 1;
    while (M > 0 && tail_after(M - 1) < tol) --M;
    return std::max(M, 0L);
  }
  constexpr long kCap = 1000000;
  long hi = 1;
  while (tail_after(hi) >= tol) {
    if (hi >= kCap)
      throw CapacityError("coefficient tail needs truncation radius above " + std::to_string(kCap) +
                          " for tolerance " + fmt(tol));
    hi = std::min(hi * 2, kCap);
  }
  long lo = 0;
  while (lo < hi) {
    const long mid = (lo + hi) / 2;
    if (tail_after(mid) < tol)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

std::vector<double> ChainInnovation::stationary() const {
  const std::size_t s = P.size();
  if (s == 0 || values.size() != s) throw DomainError("innovation chain needs matching matrix and values");
  for (const auto& row : P) {
    if (row.size() != s) throw DomainError("innovation chain matrix must be square");
    double r = 0.0;
    for (double p : row) {
      if (p < 0.0) throw DomainError("innovation chain has a negative transition probability");
      r += p;
    }
    if (std::abs(r - 1.0) > 1e-12) throw DomainError("innovation chain rows must sum to 1");
  }
  Eigen::MatrixXd A(s + 1, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = P[i][j] - (i == j ? 1.0 : 0.0);
  A.row(static_cast<Eigen::Index>(s)).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s + 1));
  b(static_cast<Eigen::Index>(s)) = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);
  std::vector<double> out(s);
  for (std::size_t i = 0; i < s; ++i) out[i] = std::max(0.0, pi(static_cast<Eigen::Index>(i)));
  return out;
}

double LinearObservable::operator()(double y) const {
  switch (kind) {
    case Kind::identity: return y;
    case Kind::holder: return (y < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(y), alpha);
    case Kind::cosine: return std::cos(frequency * y);
  }
  return y;
}

Modulus LinearObservable::modulus() const {
  switch (kind) {
    case Kind::identity: return Modulus::lipschitz(1.0);
    case Kind::holder: return Modulus::holder(std::pow(2.0, 1.0 - alpha), alpha);
    case Kind::cosine: return Modulus::lipschitz(std::abs(frequency));
  }
  return Modulus::lipschitz(1.0);
}

TrigPolynomial TrigPolynomial::cosine(int k, double amplitude) {
  if (k < 1) throw DomainError("cosine mode needs k >= 1");
  TrigPolynomial t;
  t.cos_amp.assign(static_cast<std::size_t>(k), 0.0);
  t.sin_amp.assign(static_cast<std::size_t>(k), 0.0);
  t.cos_amp[static_cast<std::size_t>(k - 1)] = amplitude;
  return t;
}

double TrigPolynomial::operator()(double x) const {
  double s = constant;
  for (std::size_t k = 0; k < cos_amp.size(); ++k) {
    const double arg = kTwoPi * static_cast<double>(k + 1) * x;
    s += cos_amp[k] * std::cos(arg);
    if (k < sin_amp.size()) s += sin_amp[k] * std::sin(arg);
  }
  return s;
}

double TrigPolynomial::abs_coefficient(int k) const {
  if (k < 1 || k > degree()) return 0.0;
  const double c = cos_amp[static_cast<std::size_t>(k - 1)];
  const double s = static_cast<std::size_t>(k - 1) < sin_amp.size() ? sin_amp[static_cast<std::size_t>(k - 1)] : 0.0;
  return 0.5 * std::hypot(c, s);
}

FourierSpec fourier_spec(const TrigPolynomial& f) {
  FourierSpec s;
  for (int k = 1; k <= f.degree(); ++k) s.magnitude.push_back(f.abs_coefficient(k));
  if (s.magnitude.empty()) s.magnitude.push_back(0.0);
  double C = 0.0;
  for (int k = 1; k <= f.degree(); ++k) C = std::max(C, f.abs_coefficient(k) * k * k);
  s.C = C;
  s.epsilon = 1.0;
  return s;
}

double gauss_inverse_cdf(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("gauss_inverse_cdf needs u in [0,1]");
  return std::exp2(u) - 1.0;
}

// ---------------------------------------------------------------------------

ProcessModel make_iid(const IIDSpec& law) {
  // Re-run the factory checks so hand-built laws are validated too.
  switch (law.kind) {
    case IidLaw::Kind::rademacher: break;
    case IidLaw::Kind::uniform: (void)IidLaw::uniform(law.c); break;
    case IidLaw::Kind::two_point: (void)IidLaw::two_point(law.p, law.a, law.b); break;
  }
  ProcessModel m;
  m.name = "iid_" + law.describe();
  m.bound = law.bound();
  m.iid_law = law;
  m.martingale_difference = true;
  m.sampler = [law](std::size_t n, RngStream& rng) {
    std::vector<double> x(n);
    for (auto& v : x) v = law.sample(rng);
    return Path(std::move(x), rng.master_seed());
  };
  std::vector<double> values, weights;
  law_nodes(law, values, weights);
  std::vector<std::vector<Transition>> rows(values.size());
  for (auto& row : rows)
    for (std::size_t j = 0; j < values.size(); ++j) row.push_back({static_cast<double>(j), weights[j]});
  KernelModel km;
  km.kernel = std::make_shared<FiniteKernel>("iid", std::move(rows), weights);
  km.observable = [values](double s) { return values[static_cast<std::size_t>(std::llround(s))]; };
  km.mean = 0.0;
  km.exact_conditional_sum = [](double, int) { return 0.0; };
  m.kernel = km;
  m.conditional_mean_bound = [](std::size_t) { return 0.0; };
  m.projection_norms = {law.bound()};
  m.metadata = {{"sigma2", law.variance()}, {"variance", law.variance()}};
  return m;
}

ProcessModel make_alternating_plus_iid(const IIDSpec& law) {
  const ProcessModel base = make_iid(law);
  ProcessModel m;
  m.name = "alternating_plus_" + base.name;
  m.bound = 1.0 + law.bound();
  std::vector<double> values, weights;
  law_nodes(law, values, weights);
  const std::size_t ny = values.size();
  m.sampler = [law, ny](std::size_t n, RngStream& rng) {
    const double q0 = static_cast<double>(rng.sign());
    std::vector<double> x(n), states(n + 1);
    // State index: q class times ny plus the sign class of Y (q drives all conditional sums).
    auto state_of = [ny](double q, double y) {
      return static_cast<double>((q > 0 ? 1 : 0) * ny + (y > 0 ? ny - 1 : 0));
    };
    double q = q0;
    states[0] = state_of(q, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      q = -q;
      const double y = law.sample(rng);
      x[k] = q + y;
      states[k + 1] = state_of(q, y);
    }
    return Path(std::move(x), rng.master_seed(), std::move(states));
  };
  // Finite kernel on (q, y-node); q flips every step.
  const std::size_t S = 2 * ny;
  std::vector<std::vector<Transition>> rows(S);
  std::vector<double> pi(S), obs(S), qv(S);
  for (std::size_t qi = 0; qi < 2; ++qi) {
    for (std::size_t yi = 0; yi < ny; ++yi) {
      const std::size_t s = qi * ny + yi;
      pi[s] = 0.5 * weights[yi];
      qv[s] = qi == 1 ? 1.0 : -1.0;
      obs[s] = qv[s] + values[yi];
      const std::size_t nq = 1 - qi;
      for (std::size_t yj = 0; yj < ny; ++yj) rows[s].push_back({static_cast<double>(nq * ny + yj), weights[yj]});
    }
  }
  KernelModel km;
  km.kernel = std::make_shared<FiniteKernel>("alternating", std::move(rows), pi);
  km.observable = [obs](double s) { return obs[static_cast<std::size_t>(std::llround(s))]; };
  km.mean = 0.0;
  // E(sum_{k<=m} X_k | Q_0 = q) = q sum_{k<=m} (-1)^k.
  km.exact_conditional_sum = [qv](double s, int mm) {
    const double q = qv[static_cast<std::size_t>(std::llround(s))];
    return (mm % 2 == 1) ? -q : 0.0;
  };
  m.kernel = km;
  m.metadata = {{"sigma2", law.variance()}, {"variance_y", law.variance()}};
  return m;
}

// ---------------------------------------------------------------------------

std::pair<double, double> innovation_range(const LinearProcessSpec& spec) {
  if (const auto* law = std::get_if<IidLaw>(&spec.innovation)) return {law->lower(), law->upper()};
  const auto& ch = std::get<ChainInnovation>(spec.innovation);
  if (ch.values.empty()) throw DomainError("innovation chain has no states");
  const auto [lo, hi] = std::minmax_element(ch.values.begin(), ch.values.end());
  return {*lo, *hi};
}

double DeltaTable::at(long i) const {
  const long idx = i + offset;
  if (idx < 0 || static_cast<std::size_t>(idx) >= delta.size()) return 0.0;
  return delta[static_cast<std::size_t>(idx)];
}

double DeltaTable::sum() const {
  double s = 0.0;
  for (double d : delta) s += d;
  return s;
}

namespace {

struct LinearLayout {
  long M = 0;       // truncation radius
  long lo = 0;      // smallest coefficient index used
  std::vector<double> c;  // c_lo..c_M
  double width = 0.0;
  double truncation_error = 0.0;
};

LinearLayout linear_layout(const LinearProcessSpec& spec) {
  const auto [a, b] = innovation_range(spec);
  LinearLayout L;
  L.width = b - a;
  if (!(L.width > 0.0)) throw DomainError("innovation range must be nondegenerate");
  if (spec.lag_window < 0) throw DomainError("lag window must be >= 0");
  const auto& cs = spec.coefficients;
  if (cs.kind == CoefficientSpec::Kind::geometric && !(cs.rate >= 0.0 && cs.rate < 1.0))
    throw DomainError("geometric coefficients need 0 <= rate < 1 (non-summable otherwise)");
  if (cs.kind == CoefficientSpec::Kind::power && !(cs.rate > 1.0))
    throw DomainError("power coefficients need exponent > 1 (non-summable otherwise)");
  if (cs.kind == CoefficientSpec::Kind::finite && cs.values.empty())
    throw DomainError("finite coefficient list is empty");
  L.M = cs.truncation_radius(L.width, spec.tolerance);
  L.lo = cs.two_sided ? -L.M : 0;
  for (long i = L.lo; i <= L.M; ++i) L.c.push_back(cs.coefficient(i));
  L.truncation_error = L.width * (cs.two_sided ? 2.0 : 1.0) * cs.one_sided_tail(L.M + 1);
  return L;
}

}  // namespace

DeltaTable linear_process_deltas(const LinearProcessSpec& spec) {
  const LinearLayout L = linear_layout(spec);
  const Modulus w = spec.observable.modulus();
  const int lag = spec.lag_window;
  const double wl = 1.0 / static_cast<double>(lag + 1);
  DeltaTable t;
  t.offset = -L.lo;
  t.delta.assign(L.c.size() + static_cast<std::size_t>(lag), 0.0);
  for (long i = L.lo; i <= L.M + lag; ++i) {
    double s = 0.0;
    for (int l = 0; l <= lag; ++l) {
      const long j = i - l;
      if (j < L.lo || j > L.M) continue;
      s += wl * w(2.0 * L.width * std::abs(L.c[static_cast<std::size_t>(j - L.lo)]));
    }
    t.delta[static_cast<std::size_t>(i - L.lo)] = s;
  }
  return t;
}

ProcessModel make_linear_process(const LinearProcessSpec& spec) {
  const LinearLayout L = linear_layout(spec);
  const auto [ea, eb] = innovation_range(spec);
  const double eps_bound = std::max(std::abs(ea), std::abs(eb));
  const bool iid = std::holds_alternative<IidLaw>(spec.innovation);
  const auto& obs = spec.observable;
  const int lag = spec.lag_window;
  const double wl = 1.0 / static_cast<double>(lag + 1);
  const double csum_abs = sum_abs(L.c);
  double csum = 0.0;
  for (double c : L.c) csum += c;

  // Centering constant E g(Y).
  double mean = 0.0;
  double innov_mean = 0.0;
  if (iid) {
    const auto& law = std::get<IidLaw>(spec.innovation);
    if (obs.kind == LinearObservable::Kind::holder && !symmetric_law(law))
      throw UnsupportedError("odd Holder observable needs a symmetric innovation law");
    if (obs.kind == LinearObservable::Kind::cosine) {
      std::complex<double> phi = 1.0;
      for (double c : L.c) phi *= characteristic(law, obs.frequency * c);
      mean = phi.real();
    }
  } else {
    if (obs.kind != LinearObservable::Kind::identity)
      throw UnsupportedError("chain innovations support the identity observable only");
    const auto& ch = std::get<ChainInnovation>(spec.innovation);
    const auto pi = ch.stationary();
    for (std::size_t i = 0; i < pi.size(); ++i) innov_mean += pi[i] * ch.values[i];
    mean = innov_mean * csum;
  }

  const double ybound = csum_abs * eps_bound;
  double gbound = 0.0;
  switch (obs.kind) {
    case LinearObservable::Kind::identity: gbound = ybound + std::abs(mean); break;
    case LinearObservable::Kind::holder: gbound = std::pow(ybound, obs.alpha); break;
    case LinearObservable::Kind::cosine: gbound = 1.0 + std::abs(mean); break;
  }

  ProcessModel m;
  {
    std::ostringstream os;
    os << "linear_" << (spec.coefficients.kind == CoefficientSpec::Kind::geometric ? "geometric"
                        : spec.coefficients.kind == CoefficientSpec::Kind::power ? "power" : "finite");
    m.name = os.str();
  }
  m.bound = gbound;
  m.martingale_difference = iid && obs.kind == LinearObservable::Kind::identity && lag == 0 && L.c.size() == 1 &&
                            L.lo == 0;

  const long lo = L.lo, M = L.M;
  const std::vector<double> c = L.c;
  auto spec_copy = spec;
  m.sampler = [spec_copy, c, lo, M, lag, wl, mean, gbound](std::size_t n, RngStream& rng) {
    // Y_k for k = 1-lag..n needs eps_j for j in [1-lag-M, n-lo].
    const long first = 1 - lag - M;
    const long last = static_cast<long>(n) - lo;
    std::vector<double> eps(static_cast<std::size_t>(last - first + 1));
    if (const auto* law = std::get_if<IidLaw>(&spec_copy.innovation)) {
      for (auto& e : eps) e = law->sample(rng);
    } else {
      const auto& ch = std::get<ChainInnovation>(spec_copy.innovation);
      const auto pi = ch.stationary();
      std::vector<std::vector<double>> cum;
      for (const auto& row : ch.P) cum.push_back(cumulative_of(row));
      std::size_t s = sample_index(cumulative_of(pi), rng.uniform());
      for (auto& e : eps) {
        e = ch.values[s];
        s = sample_index(cum[s], rng.uniform());
      }
    }
    const std::size_t ny = n + static_cast<std::size_t>(lag);
    std::vector<double> g(ny);
    for (std::size_t t = 0; t < ny; ++t) {
      const long k = static_cast<long>(t) + 1 - lag;
      double y = 0.0;
      for (long i = lo; i <= M; ++i) y += c[static_cast<std::size_t>(i - lo)] * eps[static_cast<std::size_t>(k - i - first)];
      g[t] = spec_copy.observable(y);
    }
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (int l = 0; l <= lag; ++l) s += g[k + static_cast<std::size_t>(lag - l)];
      x[k] = std::clamp(wl * s - mean, -gbound, gbound);
    }
    return Path(std::move(x), rng.master_seed());
  };

  const Modulus w = obs.modulus();
  if (iid) {
    const double width = L.width;
    const auto cs = spec.coefficients;
    m.conditional_mean_bound = [cs, w, width, wl, lag](std::size_t n) {
      double s = 0.0;
      for (int l = 0; l <= lag; ++l) {
        const long start = static_cast<long>(n) - l;
        double tail = 0.0;
        if (start <= 0) {
          // every index i >= start is known at time 0: includes the whole nonnegative side
          tail = cs.one_sided_tail(0);
          if (cs.two_sided)
            for (long i = start; i < 0; ++i) tail += std::abs(cs.coefficient(i));
        } else {
          tail = cs.one_sided_tail(start);
        }
        s += wl * w(width * tail);
      }
      return s;
    };
    // Projection norms p_j for j in [lo, M+lag].
    m.projection_norms.clear();
    for (long j = L.lo; j <= L.M + lag; ++j) {
      double p = 0.0;
      if (obs.kind == LinearObservable::Kind::identity) {
        double cj = 0.0;
        for (int l = 0; l <= lag; ++l) {
          const long i = j - l;
          if (i >= L.lo && i <= L.M) cj += L.c[static_cast<std::size_t>(i - L.lo)];
        }
        p = wl * std::abs(cj) * eps_bound;
      } else {
        for (int l = 0; l <= lag; ++l) {
          const long i = j - l;
          if (i >= L.lo && i <= L.M) p += wl * w(L.width * std::abs(L.c[static_cast<std::size_t>(i - L.lo)]));
        }
      }
      m.projection_norms.push_back(p);
    }
    const auto& law = std::get<IidLaw>(spec.innovation);
    if (obs.kind == LinearObservable::Kind::identity) m.metadata.push_back({"sigma2", law.variance() * csum * csum});
  }
  const DeltaTable dt = linear_process_deltas(spec);
  double D = 0.0;
  for (double p : m.projection_norms) D += p;
  m.metadata.push_back({"truncation_radius", static_cast<double>(L.M)});
  m.metadata.push_back({"truncation_error", L.truncation_error});
  m.metadata.push_back({"mean", mean});
  m.metadata.push_back({"delta_sum", dt.sum()});
  if (iid) m.metadata.push_back({"projection_sum", D});
  return m;
}

// ---------------------------------------------------------------------------

ProcessModel make_iterated_function(const IteratedFunctionSpec& spec) {
  const double rho = spec.rho;
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("contraction rho must lie in (0,1)");
  if (!(spec.burn_in_tolerance > 0.0 && spec.burn_in_tolerance < 1.0))
    throw DomainError("burn-in tolerance must lie in (0,1)");
  const auto burn = static_cast<std::size_t>(std::ceil(std::log(spec.burn_in_tolerance) / std::log(rho)));

  std::function<double(double)> f;
  double exact_mean = 0.0;
  double lo = 0.0, hi = 0.0;
  if (spec.observable == "identity") {
    f = [](double y) { return y; };
    exact_mean = 0.5;
    hi = 1.0;
  } else if (spec.observable == "cosine") {
    f = [](double y) { return std::cos(kTwoPi * y); };
    // Y = sum_k (1-rho) rho^k eps_k with eps uniform on [0,1].
    std::complex<double> phi = 1.0;
    for (int k = 0; k < 4000; ++k) {
      const double t = kTwoPi * (1.0 - rho) * std::pow(rho, k);
      if (t < 1e-18) break;
      phi *= (std::exp(std::complex<double>(0.0, t)) - 1.0) / std::complex<double>(0.0, t);
    }
    exact_mean = phi.real();
    lo = -1.0;
    hi = 1.0;
  } else if (spec.observable == "holder") {
    if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) throw DomainError("holder observable needs alpha in (0,1]");
    const double alpha = spec.alpha;
    f = [alpha](double y) { return std::pow(std::abs(y - 0.5), alpha); };
    hi = std::pow(0.5, alpha);
    exact_mean = std::nan("");
  } else {
    throw UnsupportedError("unknown iterated-function observable '" + spec.observable + "'");
  }

  auto kernel = std::make_shared<IteratedFunctionKernel>(rho);
  std::vector<double> fn(kernel->size());
  for (std::size_t i = 0; i < fn.size(); ++i) fn[i] = f(kernel->nodes()[i]);
  const double grid_mean = kernel->integrate(fn);
  if (std::isnan(exact_mean)) exact_mean = grid_mean;
  const double bound = std::max(hi - exact_mean, exact_mean - lo);

  ProcessModel m;
  m.name = "iterated_function_rho" + fmt(rho);
  m.bound = bound;
  m.sampler = [rho, burn, f, exact_mean, bound](std::size_t n, RngStream& rng) {
    double y = rng.uniform();
    for (std::size_t i = 0; i < burn; ++i) y = rho * y + (1.0 - rho) * rng.uniform();
    std::vector<double> x(n), states(n + 1);
    states[0] = y;
    for (std::size_t k = 0; k < n; ++k) {
      y = rho * y + (1.0 - rho) * rng.uniform();
      states[k + 1] = y;
      x[k] = std::clamp(f(y) - exact_mean, -bound, bound);
    }
    return Path(std::move(x), rng.master_seed(), std::move(states));
  };
  KernelModel km;
  km.kernel = kernel;
  km.observable = f;
  km.mean = grid_mean;
  m.kernel = km;
  m.metadata = {{"burn_in", static_cast<double>(burn)}, {"mu_exact", exact_mean}, {"mu_grid", grid_mean}};
  if (spec.observable == "identity") m.metadata.push_back({"sigma2", 1.0 / 12.0});
  return m;
}

// ---------------------------------------------------------------------------

ProcessModel make_expanding_map(const ExpandingMapSpec& spec) {
  const UnitObservable o = unit_observable(spec.observable, spec.frequency, spec.alpha);
  const auto f = o.f;
  ProcessModel m;
  std::shared_ptr<GridKernel> kernel;
  double mu = o.lebesgue_mean;
  // Generates Y_0..Y_n of the reversed orbit Y_k = T^(n+1-k) x. Each step picks
  // an inverse branch with its PF weight, so the chain has kernel K.
  std::function<std::vector<double>(std::size_t, RngStream&)> states;

  switch (spec.map) {
    case ExpandingMapSpec::Map::doubling:
    case ExpandingMapSpec::Map::integer_beta: {
      const double bd = spec.map == ExpandingMapSpec::Map::doubling ? 2.0 : spec.beta;
      if (bd != std::floor(bd) || bd < 2.0 || bd > 1024.0)
        throw UnsupportedError("only integer beta in [2, 1024] is supported");
      const int beta = static_cast<int>(bd);
      kernel = std::make_shared<IntegerBetaKernel>(beta);
      m.name = beta == 2 ? "doubling" : "beta" + std::to_string(beta);
      // (y + d)/beta prepends the base-beta digit d: the digit shift read backwards.
      states = [beta](std::size_t n, RngStream& rng) {
        std::vector<double> y(n + 1);
        y[0] = rng.uniform();
        for (std::size_t k = 1; k <= n; ++k) {
          const auto d = static_cast<double>(rng.next_u64() % static_cast<std::uint64_t>(beta));
          y[k] = (y[k - 1] + d) / beta;
        }
        return y;
      };
      break;
    }
    case ExpandingMapSpec::Map::full_branch: {
      auto fb = std::make_shared<FullBranchKernel>(spec.breakpoints);
      kernel = fb;
      m.name = "full_branch";
      const std::vector<double> br(fb->breakpoints().begin(), fb->breakpoints().end());
      std::vector<double> len;
      for (std::size_t i = 0; i + 1 < br.size(); ++i) len.push_back(br[i + 1] - br[i]);
      const auto cum = cumulative_of(len);
      states = [br, len, cum](std::size_t n, RngStream& rng) {
        std::vector<double> y(n + 1);
        y[0] = rng.uniform();
        for (std::size_t k = 1; k <= n; ++k) {
          const std::size_t d = sample_index(cum, rng.uniform());
          y[k] = std::min(br[d] + len[d] * y[k - 1], std::nextafter(1.0, 0.0));
        }
        return y;
      };
      break;
    }
    case ExpandingMapSpec::Map::gauss: {
      kernel = std::make_shared<GaussKernel>();
      m.name = "gauss";
      mu = gauss_measure_integral(f);
      states = [](std::size_t n, RngStream& rng) {
        std::vector<double> y(n + 1);
        y[0] = gauss_inverse_cdf(rng.uniform());
        for (std::size_t k = 1; k <= n; ++k) {
          // Branch weights w_d(x) = (1+x)/((d+x)(d+1+x)) have cdf 1 - (1+x)/(d+1+x).
          const double x = y[k - 1];
          const double u = rng.uniform();
          double d = std::ceil((1.0 + x) / (1.0 - u) - 1.0 - x);
          d = std::clamp(d, 1.0, 1e15);
          y[k] = 1.0 / (d + x);
        }
        return y;
      };
      break;
    }
  }

  std::vector<double> fn(kernel->size());
  for (std::size_t i = 0; i < fn.size(); ++i) fn[i] = f(kernel->nodes()[i]);
  const double bound = std::max(o.hi - mu, mu - o.lo);
  m.bound = bound;
  m.sampler = [states, f, mu, bound](std::size_t n, RngStream& rng) {
    std::vector<double> y = states(n, rng);
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = std::clamp(f(y[k + 1]) - mu, -bound, bound);
    return Path(std::move(x), rng.master_seed(), std::move(y));
  };
  KernelModel km;
  km.kernel = kernel;
  km.observable = f;
  km.mean = kernel->integrate(fn);
  m.kernel = km;
  m.metadata = {{"mu_exact", mu}, {"mu_grid", km.mean}};
  if (spec.map == ExpandingMapSpec::Map::doubling && spec.observable == "cos") m.metadata.push_back({"sigma2", 0.5});
  return m;
}

// ---------------------------------------------------------------------------

ProcessModel make_circle_walk(const CircleWalkSpec& spec) {
  if (!spec.step.is_irrational() && !spec.allow_rational)
    throw DomainError("circle walk step must be irrational (got " + spec.step.describe() + ")");
  const double a = spec.step.value();
  if (!(a > 0.0 && a < 1.0)) throw DomainError("circle walk step must lie in (0,1)");
  const TrigPolynomial poly = spec.observable;
  const int K = poly.degree();
  if (K < 1) throw DomainError("circle walk observable needs at least one nonconstant mode");
  std::vector<double> mult(static_cast<std::size_t>(K));
  double bound = 0.0, sigma2 = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double c = std::cos(kTwoPi * k * a);
    mult[static_cast<std::size_t>(k - 1)] = c;
    const double amp = 2.0 * poly.abs_coefficient(k);
    bound += amp;
    if (amp > 0.0) {
      if (c >= 1.0) throw DomainError("multiplier equals 1 at mode " + std::to_string(k));
      sigma2 += 0.5 * amp * amp * (1.0 + c) / (1.0 - c);
    }
  }
  const double mean = poly.constant;

  ProcessModel m;
  m.name = "circle_walk";
  m.bound = bound;
  m.sampler = [a, poly, mean, bound](std::size_t n, RngStream& rng) {
    std::vector<double> y(n + 1), x(n);
    y[0] = rng.uniform();
    for (std::size_t k = 1; k <= n; ++k) {
      double v = y[k - 1] + (rng.sign() > 0 ? a : -a);
      if (v >= 1.0) v -= 1.0;
      if (v < 0.0) v += 1.0;
      y[k] = v;
      x[k - 1] = std::clamp(poly(v) - mean, -bound, bound);
    }
    return Path(std::move(x), rng.master_seed(), std::move(y));
  };
  KernelModel km;
  km.kernel = std::make_shared<CircleKernel>(a);
  km.observable = [poly](double x) { return poly(x); };
  km.mean = mean;
  // Mode k is multiplied by c_k per step: sum_{j=1}^m c^j = c (1 - c^m)/(1 - c).
  km.exact_conditional_sum = [poly, mult](double y, int steps) {
    double s = 0.0;
    for (std::size_t k = 0; k < mult.size(); ++k) {
      const double c = mult[k];
      const double g = c * (1.0 - std::pow(c, steps)) / (1.0 - c);
      const double arg = kTwoPi * static_cast<double>(k + 1) * y;
      const double sk = k < poly.sin_amp.size() ? poly.sin_amp[k] : 0.0;
      s += g * (poly.cos_amp[k] * std::cos(arg) + sk * std::sin(arg));
    }
    return s;
  };
  m.kernel = km;
  m.metadata = {{"step", a}, {"sigma2", sigma2}};
  return m;
}

// ---------------------------------------------------------------------------

std::vector<double> return_time_law(const CounterexampleChainSpec& spec) {
  std::vector<double> p;
  if (!spec.explicit_law.empty()) {
    p = spec.explicit_law;
    for (double v : p)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("return-time law must be nonnegative");
  } else {
    if (!(spec.tail_exponent > 2.0))
      throw DomainError("return-time tail exponent must exceed 2 for a finite mean");
    if (spec.j_max < 1) throw DomainError("j_max must be >= 1");
    p.resize(static_cast<std::size_t>(spec.j_max));
    for (int j = 1; j <= spec.j_max; ++j) p[static_cast<std::size_t>(j - 1)] = std::pow(j, -spec.tail_exponent);
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (!(total > 0.0)) throw DomainError("return-time law has no mass");
  for (double& v : p) v /= total;
  if (!(p[0] > 0.0)) throw DomainError("return-time law needs P(tau = 1) > 0 for ergodicity");
  return p;
}

std::vector<double> counterexample_stationary(const std::vector<double>& tau_law) {
  // Age chain: 0 -> j w.p. P(tau = j), j -> j-1. pi(0) = 1/(1+E tau), pi(j) = P(tau >= j)/(1+E tau).
  const std::size_t J = tau_law.size();
  double etau = 0.0;
  for (std::size_t j = 1; j <= J; ++j) etau += static_cast<double>(j) * tau_law[j - 1];
  std::vector<double> pi(J + 1);
  pi[0] = 1.0 / (1.0 + etau);
  double tail = 1.0;  // P(tau >= j)
  for (std::size_t j = 1; j <= J; ++j) {
    pi[j] = tail / (1.0 + etau);
    tail -= tau_law[j - 1];
    if (tail < 0.0) tail = 0.0;
  }
  return pi;
}

ProcessModel make_counterexample_chain(const CounterexampleChainSpec& spec) {
  const auto tau = return_time_law(spec);
  const auto piY = counterexample_stationary(tau);
  const std::size_t J = tau.size();
  double etau = 0.0;
  for (std::size_t j = 1; j <= J; ++j) etau += static_cast<double>(j) * tau[j - 1];

  ProcessModel m;
  m.name = "counterexample_chain";
  m.bound = 1.0;
  m.martingale_difference = true;
  const auto cumY = cumulative_of(piY);
  const auto cumTau = cumulative_of(tau);
  // Path states encode (y, xi) as 2y + (xi > 0).
  m.sampler = [cumY, cumTau](std::size_t n, RngStream& rng) {
    std::vector<double> x(n), states(n + 1);
    std::size_t y = sample_index(cumY, rng.uniform());
    int xi = rng.sign();
    states[0] = static_cast<double>(2 * y + (xi > 0 ? 1 : 0));
    for (std::size_t k = 0; k < n; ++k) {
      y = y == 0 ? sample_index(cumTau, rng.uniform()) + 1 : y - 1;
      xi = rng.sign();
      x[k] = y != 0 ? static_cast<double>(xi) : 0.0;
      states[k + 1] = static_cast<double>(2 * y + (xi > 0 ? 1 : 0));
    }
    return Path(std::move(x), rng.master_seed(), std::move(states));
  };
  const std::size_t S = 2 * (J + 1);
  std::vector<std::vector<Transition>> rows(S);
  std::vector<double> pi(S), obs(S);
  for (std::size_t y = 0; y <= J; ++y) {
    for (int b = 0; b < 2; ++b) {
      const std::size_t s = 2 * y + static_cast<std::size_t>(b);
      pi[s] = 0.5 * piY[y];
      obs[s] = y != 0 ? (b ? 1.0 : -1.0) : 0.0;
      if (y == 0) {
        for (std::size_t j = 1; j <= J; ++j) {
          if (tau[j - 1] == 0.0) continue;
          rows[s].push_back({static_cast<double>(2 * j), 0.5 * tau[j - 1]});
          rows[s].push_back({static_cast<double>(2 * j + 1), 0.5 * tau[j - 1]});
        }
      } else {
        rows[s].push_back({static_cast<double>(2 * (y - 1)), 0.5});
        rows[s].push_back({static_cast<double>(2 * (y - 1) + 1), 0.5});
      }
    }
  }
  KernelModel km;
  km.kernel = std::make_shared<FiniteKernel>("counterexample_chain", std::move(rows), pi);
  km.observable = [obs](double s) { return obs[static_cast<std::size_t>(std::llround(s))]; };
  km.mean = 0.0;
  km.exact_conditional_sum = [](double, int) { return 0.0; };
  m.kernel = km;
  m.conditional_mean_bound = [](std::size_t) { return 0.0; };
  m.metadata = {{"mean_tau", etau}, {"j_max", static_cast<double>(J)}, {"sigma2", etau / (1.0 + etau)}};
  return m;
}

}  // namespace mdlab
