#include "mdlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace mdlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_index(std::uint64_t experiment, std::uint64_t replica) {
  return splitmix64(splitmix64(experiment) ^ (replica + 0x632be59bd9b4e019ULL));
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_(master_seed),
      index_(stream_index),
      engine_(splitmix64(splitmix64(master_seed) ^ splitmix64(stream_index ^ 0xd1b54a32d192ed03ULL))) {}

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(master_, mdlab::stream_index(index_, child));
}

// ---------------------------------------------------------------------------

IidLaw IidLaw::rademacher() { return IidLaw{}; }

IidLaw IidLaw::uniform(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw DomainError("uniform law needs a positive finite half-width");
  IidLaw law;
  law.kind = Kind::uniform;
  law.c = half_width;
  return law;
}

IidLaw IidLaw::two_point(double p, double a, double b) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("two-point law needs p in (0,1)");
  if (!(a < b)) throw DomainError("two-point law needs a < b");
  const double mean = p * a + (1.0 - p) * b;
  if (std::abs(mean) > 1e-12 * std::max(std::abs(a), std::abs(b)))
    throw DomainError("two-point law must have mean zero (p*a + (1-p)*b = " + std::to_string(mean) + ")");
  IidLaw law;
  law.kind = Kind::two_point;
  law.p = p;
  law.a = a;
  law.b = b;
  return law;
}

double IidLaw::lower() const {
  switch (kind) {
    case Kind::rademacher: return -1.0;
    case Kind::uniform: return -c;
    case Kind::two_point: return a;
  }
  return 0.0;
}

double IidLaw::upper() const {
  switch (kind) {
    case Kind::rademacher: return 1.0;
    case Kind::uniform: return c;
    case Kind::two_point: return b;
  }
  return 0.0;
}

double IidLaw::bound() const { return std::max(std::abs(lower()), std::abs(upper())); }

double IidLaw::variance() const {
  switch (kind) {
    case Kind::rademacher: return 1.0;
    case Kind::uniform: return c * c / 3.0;
    case Kind::two_point: return p * a * a + (1.0 - p) * b * b;
  }
  return 0.0;
}

double IidLaw::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::rademacher: return static_cast<double>(rng.sign());
    case Kind::uniform: return c * (2.0 * rng.uniform() - 1.0);
    case Kind::two_point: return rng.uniform() < p ? a : b;
  }
  return 0.0;
}

std::string IidLaw::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::rademacher: os << "rademacher"; break;
    case Kind::uniform: os << "uniform[-" << c << "," << c << "]"; break;
    case Kind::two_point: os << "two_point(p=" << p << ",a=" << a << ",b=" << b << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

Modulus Modulus::lipschitz(double L) {
  return Modulus{"lipschitz(" + std::to_string(L) + ")", [L](double h) { return L * h; }};
}

Modulus Modulus::holder(double C, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Holder exponent must lie in (0,1]");
  return Modulus{"holder(" + std::to_string(C) + "," + std::to_string(alpha) + ")",
                 [C, alpha](double h) { return C * std::pow(h, alpha); }};
}

Modulus Modulus::log_power(double D, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("log-power modulus needs gamma > 0");
  const double ts = std::exp(-(gamma + 1.0));
  const double cs = D * std::pow(gamma + 1.0, -gamma);
  const double slope = D * gamma * std::pow(gamma + 1.0, -gamma - 1.0) / ts;
  return Modulus{"log_power(" + std::to_string(D) + "," + std::to_string(gamma) + ")",
                 [=](double h) {
                   if (h <= ts) return D * std::pow(-std::log(h), -gamma);
                   return cs + slope * (h - ts);
                 }};
}

// ---------------------------------------------------------------------------

Path::Path(std::vector<double> values, std::uint64_t origin_seed, std::vector<double> states)
    : values_(std::move(values)), seed_(origin_seed), states_(std::move(states)) {
  if (values_.empty()) throw DomainError("a path needs at least one value");
  if (!states_.empty() && states_.size() != values_.size() + 1)
    throw DomainError("path states must cover Y_0..Y_n");
}

std::vector<double> partial_sums(std::span<const double> x) {
  std::vector<double> s(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i];
    s[i] = acc;
  }
  return s;
}

std::vector<double> partial_sums(const Path& path) { return partial_sums(path.values()); }

double normalized_process(const Path& path, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("normalized_process: t must lie in [0,1]");
  const std::size_t n = path.size();
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * t));
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += path.values()[i];
  return s / std::sqrt(static_cast<double>(n));
}

double max_abs_partial_sum(std::span<const double> x) {
  double acc = 0.0, best = 0.0;
  for (double v : x) {
    acc += v;
    best = std::max(best, std::abs(acc));
  }
  return best;
}

double max_abs_partial_sum(const Path& path) { return max_abs_partial_sum(path.values()); }

// ---------------------------------------------------------------------------

SpeedSequence SpeedSequence::power(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("speed exponent must lie in (0,1)");
  SpeedSequence s;
  s.gamma_ = gamma;
  return s;
}

SpeedSequence SpeedSequence::explicit_list(std::map<std::int64_t, double> values) {
  if (values.empty()) throw DomainError("explicit speed list is empty");
  double prev_a = 0.0, prev_na = 0.0;
  bool first = true;
  for (const auto& [n, a] : values) {
    if (n < 1 || !(a > 0.0)) throw DomainError("explicit speed list needs n >= 1 and a_n > 0");
    const double na = static_cast<double>(n) * a;
    if (!first && (a > prev_a || na < prev_na))
      throw DomainError("explicit speed list must have a_n nonincreasing and n*a_n nondecreasing");
    prev_a = a;
    prev_na = na;
    first = false;
  }
  SpeedSequence s;
  s.list_ = std::move(values);
  return s;
}

double SpeedSequence::operator()(std::int64_t n) const {
  if (n < 1) throw DomainError("speed sequence index must be >= 1");
  if (!list_) return std::pow(static_cast<double>(n), -gamma_);
  auto it = list_->find(n);
  if (it == list_->end()) throw DomainError("explicit speed list has no entry for n = " + std::to_string(n));
  return it->second;
}

std::string SpeedSequence::describe() const {
  if (!list_) {
    std::ostringstream os;
    os << "n^-" << gamma_;
    return os.str();
  }
  return "explicit";
}

// ---------------------------------------------------------------------------

double MarkovKernel::integrate(std::span<const double> g) const {
  const auto w = weights();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += w[i] * g[i];
  return s;
}

std::vector<double> KernelModel::centered_at_nodes() const {
  const auto nodes = kernel->nodes();
  std::vector<double> f(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) f[i] = observable(nodes[i]) - mean;
  return f;
}

double KernelModel::conditional_sum(double state, int m) const {
  if (exact_conditional_sum) return exact_conditional_sum(state, m);
  std::vector<double> g = centered_at_nodes();
  std::vector<double> acc(g.size(), 0.0);
  for (int k = 0; k < m; ++k) {
    g = kernel->apply(g);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
  }
  return kernel->evaluate(acc, state);
}

std::function<double(double)> KernelModel::conditional_sum_fn(int m) const {
  if (m < 0) throw DomainError("m must be >= 0");
  if (exact_conditional_sum) return [f = exact_conditional_sum, m](double y) { return f(y, m); };
  std::vector<double> g = centered_at_nodes();
  std::vector<double> acc(g.size(), 0.0);
  for (int k = 0; k < m; ++k) {
    g = kernel->apply(g);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
  }
  return [K = kernel, acc = std::move(acc)](double y) { return K->evaluate(acc, y); };
}

Path ProcessModel::sample(std::size_t n, RngStream& rng) const {
  if (n == 0) throw DomainError("path length must be >= 1");
  return sampler(n, rng);
}

std::optional<double> ProcessModel::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

unsigned thread_count() {
  if (const char* env = std::getenv("MDLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Path> simulate_paths(const ProcessModel& model, std::size_t n, std::size_t replicas,
                                 std::uint64_t master_seed, std::uint64_t experiment) {
  if (replicas == 0) throw DomainError("at least one replica is required");
  std::vector<std::optional<Path>> tmp(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    RngStream rng(master_seed, stream_index(experiment, r));
    tmp[r].emplace(model.sample(n, rng));
  });
  std::vector<Path> out;
  out.reserve(replicas);
  for (auto& p : tmp) out.push_back(std::move(*p));
  return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mdlab
