#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mdlab {

// Error taxonomy. The CLI maps these onto exit codes.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Refusals for size, cost or precision reasons.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PrecisionError : public CapacityError {
 public:
  using CapacityError::CapacityError;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stream index for replica r of experiment e.
std::uint64_t stream_index(std::uint64_t experiment, std::uint64_t replica);

// Deterministic random stream derived from (master_seed, stream_index).
// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t stream_index() const { return index_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  std::uint64_t next_u64() { return engine_(); }
  // 53-bit uniform on [0,1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform on (0,1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  int sign() { return (engine_() >> 63) ? 1 : -1; }

  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t master_;
  std::uint64_t index_;
  std::mt19937_64 engine_;
};

// Law of a bounded centered real variable.
struct IidLaw {
  enum class Kind { rademacher, uniform, two_point };
  Kind kind = Kind::rademacher;
  double c = 1.0;  // uniform half-width
  double p = 0.5;  // two-point: P(X = a)
  double a = -1.0;
  double b = 1.0;

  static IidLaw rademacher();
  static IidLaw uniform(double half_width);
  static IidLaw two_point(double p, double a, double b);

  double lower() const;
  double upper() const;
  double bound() const;
  double variance() const;
  double sample(RngStream& rng) const;
  std::string describe() const;
};

// Concave nondecreasing modulus of continuity with w(0) = 0.
struct Modulus {
  std::string name;
  std::function<double(double)> eval;

  double operator()(double h) const { return h <= 0.0 ? 0.0 : eval(h); }

  static Modulus lipschitz(double L);
  static Modulus holder(double C, double alpha);
  // D|log t|^(-gamma) near 0, continued by its tangent line past the
  // inflection point e^(-(gamma+1)) so that it stays concave.
  static Modulus log_power(double D, double gamma);
};

class Path {
 public:
  Path(std::vector<double> values, std::uint64_t origin_seed, std::vector<double> states = {});

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::uint64_t origin_seed() const { return seed_; }
  // Markov states Y_0..Y_n for kernel models (empty otherwise).
  std::span<const double> states() const { return states_; }

 private:
  std::vector<double> values_;
  std::uint64_t seed_;
  std::vector<double> states_;
};

std::vector<double> partial_sums(std::span<const double> x);
std::vector<double> partial_sums(const Path& path);
double normalized_process(const Path& path, double t);
double max_abs_partial_sum(std::span<const double> x);
double max_abs_partial_sum(const Path& path);

class SpeedSequence {
 public:
  static SpeedSequence power(double gamma);
  static SpeedSequence explicit_list(std::map<std::int64_t, double> values);

  double operator()(std::int64_t n) const;
  bool is_power() const { return !list_; }
  double gamma() const { return gamma_; }
  std::string describe() const;

 private:
  double gamma_ = 0.5;
  std::optional<std::map<std::int64_t, double>> list_;
};

struct Transition {
  double state;
  double probability;
};

// Markov kernel discretized on a finite node set. Functions are carried as
// vectors of nodal values.
class MarkovKernel {
 public:
  virtual ~MarkovKernel() = default;
  virtual std::string name() const = 0;
  virtual std::span<const double> nodes() const = 0;
  // Quadrature weights of the invariant measure; sum to 1.
  virtual std::span<const double> weights() const = 0;
  virtual std::vector<double> apply(std::span<const double> g) const = 0;
  // Value at an arbitrary state of the function with nodal values g.
  virtual double evaluate(std::span<const double> g, double state) const = 0;
  // One-step law when it is a finite mixture; empty otherwise.
  virtual std::vector<Transition> successors(double /*state*/) const { return {}; }

  std::size_t size() const { return nodes().size(); }
  double integrate(std::span<const double> g) const;
};

// A kernel together with the observable that generates X_k = f(Y_k) - mu(f).
struct KernelModel {
  std::shared_ptr<const MarkovKernel> kernel;
  std::function<double(double)> observable;
  double mean = 0.0;
  // Optional exact E(X_1 + ... + X_m | Y_0 = y).
  std::function<double(double, int)> exact_conditional_sum;

  std::vector<double> centered_at_nodes() const;
  double centered(double state) const { return observable(state) - mean; }
  double conditional_sum(double state, int m) const;
  // y -> E(X_1 + ... + X_m | Y_0 = y), with the kernel iteration done once.
  std::function<double(double)> conditional_sum_fn(int m) const;
};

struct ProcessModel {
  std::string name;
  double bound = 0.0;
  std::function<Path(std::size_t, RngStream&)> sampler;
  std::optional<KernelModel> kernel;
  std::optional<IidLaw> iid_law;
  bool martingale_difference = false;
  // Bound on ||E(X_n | F_0)||_inf for innovation models, n >= 1.
  std::function<double(std::size_t)> conditional_mean_bound;
  // Bounds p_j on ||P_{k-j}(X_k)||_inf, j = 0, 1, ... (innovation models).
  std::vector<double> projection_norms;
  std::vector<std::pair<std::string, double>> metadata;

  Path sample(std::size_t n, RngStream& rng) const;
  std::optional<double> meta(const std::string& key) const;
};

// Independent replicas r = 0..replicas-1, replica r drawn from stream (experiment, r).
std::vector<Path> simulate_paths(const ProcessModel& model, std::size_t n, std::size_t replicas,
                                 std::uint64_t master_seed, std::uint64_t experiment);

unsigned thread_count();

// Runs f(i) for i in [0, n) over a fixed partition of the index range.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace mdlab
