#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mdlab/conditions.hpp"
#include "mdlab/core.hpp"
#include "mdlab/diophantine.hpp"
#include "mdlab/inequalities.hpp"
#include "mdlab/mdp.hpp"
#include "mdlab/processes.hpp"

namespace mdlab {

using Json = nlohmann::ordered_json;

struct AlternatingSpec {
  IidLaw law;
};

using ModelVariant = std::variant<IidLaw, AlternatingSpec, LinearProcessSpec, IteratedFunctionSpec, ExpandingMapSpec,
                                  CircleWalkSpec, CounterexampleChainSpec>;

struct ModelSpec {
  std::string type;
  ModelVariant spec;
};

ProcessModel build_model(const ModelSpec& m);

// Named nonnegative sequences used by the sequence-level checkers.
struct SequenceSpec {
  std::string kind = "zero";  // zero, geometric (scale*rate^k), power (scale*k^-rate, k>=1), values
  double scale = 1.0;
  double rate = 0.5;
  std::vector<double> values;
  Sequence build() const;
};

struct ModulusSpec {
  std::string kind = "lipschitz";  // lipschitz, holder, log_power
  double constant = 1.0;
  double exponent = 1.0;  // holder alpha or log-power gamma
  Modulus build() const;
};

struct SimulateParams {
  std::int64_t n = 1000;
  std::int64_t replicas = 1;
};

struct Sigma2Params {
  std::vector<std::string> methods{"covariance_series"};
  std::int64_t n = 100000;
  std::int64_t replicas = 10;
  int K_max = 25;
  int j_max = 2;
  std::vector<std::int64_t> var_sn_ns{64, 128, 256, 512, 1024};
  std::int64_t var_sn_replicas = 400;
  int fourier_K = 0;  // 0: full support
};

struct ConditionsParams {
  std::vector<std::string> checks{"mw", "bis"};
  int N_max = 1000;
  std::vector<int> ns{16, 32, 64, 128, 256};
  std::optional<double> sigma2;
  SequenceSpec R, phi, tail;
  ModulusSpec modulus;
  double width = 2.0;
  std::vector<std::vector<double>> chain;  // transition matrix for phi coefficients
};

struct InequalityParams {
  BoundSpec::Kind bound = BoundSpec::Kind::azuma;
  std::int64_t n = 100;
  std::vector<double> threshold_multipliers{0.5, 1.0, 2.0, 3.0, 4.0};  // times sqrt(n) * bound scale
  std::vector<double> thresholds;  // absolute; overrides multipliers when nonempty
  std::int64_t replicas = 100000;
};

struct MdpScanParams {
  double gamma = 1.0 / 3.0;
  std::vector<std::int64_t> ns{10000, 100000, 1000000};
  std::vector<double> xs{1.0};
  std::optional<double> sigma2;
  MdpMethod method = MdpMethod::exact_binomial;
  std::int64_t replicas = 10000;
};

struct FourierParams {
  std::string kind = "single";  // single, power
  double amplitude = 0.5;
  double exponent = 2.0;
  int support = 64;
  FourierSpec build() const;
};

struct DiophantineParams {
  IrrationalSpec step = IrrationalSpec::golden();
  int cf_depth = 30;
  std::optional<double> audit_epsilon;
  std::int64_t audit_K = 100000;
  std::optional<std::int64_t> paroux_K;
  std::optional<int> bis_N_max;
  FourierParams fourier;
};

struct TransferParams {
  int n_max = 40;
  std::optional<ModulusSpec> modulus;
};

struct DecomposeParams {
  std::int64_t n = 4096;
  int m = 8;
};

using TaskParams = std::variant<SimulateParams, Sigma2Params, ConditionsParams, InequalityParams, MdpScanParams,
                                DiophantineParams, TransferParams, DecomposeParams>;

struct ExperimentConfig {
  std::string task;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::optional<ModelSpec> model;
  TaskParams params;
  Json raw;  // the parsed input, echoed into the manifest
};

// Strict parsing: unknown keys, wrong types and out-of-range values throw ConfigError.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig parse_config_text(const std::string& text);
ModelSpec parse_model(const Json& j);
IrrationalSpec parse_irrational(const Json& j);

// JSON Schema describing the accepted config files.
std::string config_schema();

}  // namespace mdlab
