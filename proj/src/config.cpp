#include "mdlab/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace mdlab {

namespace {

// Strict view of a JSON object: every key must be consumed.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "must be an object");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    if (!j_.contains(key)) fail(where(key), "required field is missing");
    seen_.insert(key);
    return j_.at(key);
  }

  Reader sub(const std::string& key) { return Reader(raw(key), where(key)); }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) fail(where(key), "must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double def) { return has(key) ? number(key) : def; }
  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::int64_t integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail(where(key), "must be an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t def) { return has(key) ? integer(key) : def; }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) fail(where(key), "must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& def) { return has(key) ? string(key) : def; }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(where(key), "must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(where(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(where(key), "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::int64_t> integers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(where(key), "must be an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(where(key), "must be an array of integers");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(where(key), "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(where(key), "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::vector<std::vector<double>> matrix(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(where(key), "must be an array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& row : v) {
      if (!row.is_array()) fail(where(key), "must be an array of rows");
      std::vector<double> r;
      for (const auto& e : row) {
        if (!e.is_number()) fail(where(key), "entries must be numbers");
        r.push_back(e.get<double>());
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(where(it.key()), "unknown field");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) Reader::fail(where, what);
}

template <typename F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

IidLaw parse_law(Reader r) {
  const std::string kind = r.string("kind");
  IidLaw law;
  if (kind == "rademacher") {
    law = IidLaw::rademacher();
  } else if (kind == "uniform") {
    const double c = r.number("half_width", 1.0);
    law = wrap(r.where("half_width"), [&] { return IidLaw::uniform(c); });
  } else if (kind == "two_point") {
    const double p = r.number("p"), a = r.number("a"), b = r.number("b");
    law = wrap(r.where("kind"), [&] { return IidLaw::two_point(p, a, b); });
  } else {
    Reader::fail(r.where("kind"), "unknown law '" + kind + "' (rademacher, uniform, two_point)");
  }
  r.done();
  return law;
}

CoefficientSpec parse_coefficients(Reader r) {
  CoefficientSpec c;
  const std::string kind = r.string("kind");
  if (kind == "geometric") c.kind = CoefficientSpec::Kind::geometric;
  else if (kind == "power") c.kind = CoefficientSpec::Kind::power;
  else if (kind == "finite") c.kind = CoefficientSpec::Kind::finite;
  else Reader::fail(r.where("kind"), "unknown coefficient kind '" + kind + "' (geometric, power, finite)");
  c.scale = r.number("scale", 1.0);
  c.rate = r.number("rate", c.kind == CoefficientSpec::Kind::power ? 2.0 : 0.5);
  c.two_sided = r.boolean("two_sided", false);
  if (r.has("values")) c.values = r.numbers("values");
  r.done();
  return c;
}

LinearObservable parse_linear_observable(Reader r) {
  LinearObservable o;
  const std::string kind = r.string("kind", "identity");
  if (kind == "identity") o.kind = LinearObservable::Kind::identity;
  else if (kind == "holder") o.kind = LinearObservable::Kind::holder;
  else if (kind == "cosine") o.kind = LinearObservable::Kind::cosine;
  else Reader::fail(r.where("kind"), "unknown observable '" + kind + "' (identity, holder, cosine)");
  o.alpha = r.number("alpha", 0.5);
  o.frequency = r.number("frequency", 1.0);
  require(o.alpha > 0.0 && o.alpha <= 1.0, r.where("alpha"), "must lie in (0, 1]");
  r.done();
  return o;
}

TrigPolynomial parse_trig(Reader r) {
  TrigPolynomial p;
  p.constant = r.number("constant", 0.0);
  if (r.has("cos")) p.cos_amp = r.numbers("cos");
  if (r.has("sin")) p.sin_amp = r.numbers("sin");
  const std::size_t deg = std::max(p.cos_amp.size(), p.sin_amp.size());
  p.cos_amp.resize(deg, 0.0);
  p.sin_amp.resize(deg, 0.0);
  r.done();
  return p;
}

int to_int(std::int64_t v, const std::string& where) {
  require(v >= -2147483647 && v <= 2147483647, where, "out of range");
  return static_cast<int>(v);
}

}  // namespace

IrrationalSpec parse_irrational(const Json& j) {
  Reader r(j, "irrational");
  const std::string kind = r.string("kind");
  IrrationalSpec s = IrrationalSpec::golden();
  if (kind == "golden") {
    s = IrrationalSpec::golden();
  } else if (kind == "quadratic") {
    const auto P = r.integer("P"), D = r.integer("D"), Q = r.integer("Q");
    s = wrap("irrational", [&] { return IrrationalSpec::quadratic(P, D, Q); });
  } else if (kind == "literal") {
    const auto dec = r.string("decimal"), rad = r.string("radius");
    s = wrap("irrational", [&] { return IrrationalSpec::literal(dec, rad); });
  } else if (kind == "rational") {
    const auto p = r.integer("p"), q = r.integer("q");
    s = wrap("irrational", [&] { return IrrationalSpec::rational(p, q); });
  } else {
    Reader::fail("irrational.kind", "unknown kind '" + kind + "' (golden, quadratic, literal, rational)");
  }
  r.done();
  return s;
}

ModelSpec parse_model(const Json& j) {
  Reader r(j, "model");
  ModelSpec m;
  m.type = r.string("type");
  if (m.type == "iid") {
    m.spec = parse_law(r.sub("law"));
  } else if (m.type == "alternating_plus_iid") {
    m.spec = AlternatingSpec{parse_law(r.sub("law"))};
  } else if (m.type == "linear_process") {
    LinearProcessSpec s;
    s.coefficients = parse_coefficients(r.sub("coefficients"));
    if (r.has("innovation")) {
      Reader in = r.sub("innovation");
      if (in.has("law")) {
        s.innovation = parse_law(in.sub("law"));
      } else if (in.has("chain")) {
        Reader ch = in.sub("chain");
        ChainInnovation c;
        c.P = ch.matrix("P");
        c.values = ch.numbers("values");
        ch.done();
        s.innovation = c;
      } else {
        Reader::fail("model.innovation", "needs either 'law' or 'chain'");
      }
      in.done();
    }
    if (r.has("observable")) s.observable = parse_linear_observable(r.sub("observable"));
    s.lag_window = to_int(r.integer("lag_window", 0), "model.lag_window");
    s.tolerance = r.number("tolerance", 1e-8);
    require(s.lag_window >= 0, "model.lag_window", "must be >= 0");
    require(s.tolerance > 0.0, "model.tolerance", "must be > 0");
    m.spec = s;
  } else if (m.type == "iterated_function") {
    IteratedFunctionSpec s;
    s.rho = r.number("rho", 0.5);
    s.observable = r.string("observable", "identity");
    s.alpha = r.number("alpha", 0.5);
    m.spec = s;
  } else if (m.type == "expanding_map") {
    ExpandingMapSpec s;
    const std::string map = r.string("map", "doubling");
    if (map == "doubling") s.map = ExpandingMapSpec::Map::doubling;
    else if (map == "integer_beta") s.map = ExpandingMapSpec::Map::integer_beta;
    else if (map == "full_branch") s.map = ExpandingMapSpec::Map::full_branch;
    else if (map == "gauss") s.map = ExpandingMapSpec::Map::gauss;
    else Reader::fail("model.map", "unknown map '" + map + "' (doubling, integer_beta, full_branch, gauss)");
    s.beta = r.number("beta", 2.0);
    if (r.has("breakpoints")) s.breakpoints = r.numbers("breakpoints");
    s.observable = r.string("observable", "cos");
    s.frequency = to_int(r.integer("frequency", 1), "model.frequency");
    s.alpha = r.number("alpha", 0.5);
    m.spec = s;
  } else if (m.type == "circle_walk") {
    CircleWalkSpec s;
    if (r.has("step")) s.step = parse_irrational(r.raw("step"));
    if (r.has("observable")) s.observable = parse_trig(r.sub("observable"));
    s.allow_rational = r.boolean("allow_rational", false);
    m.spec = s;
  } else if (m.type == "counterexample_chain") {
    CounterexampleChainSpec s;
    s.tail_exponent = r.number("tail_exponent", 4.0);
    s.j_max = to_int(r.integer("j_max", 1000), "model.j_max");
    if (r.has("explicit_law")) s.explicit_law = r.numbers("explicit_law");
    m.spec = s;
  } else {
    Reader::fail("model.type", "unknown model type '" + m.type +
                                   "' (iid, alternating_plus_iid, linear_process, iterated_function, expanding_map, "
                                   "circle_walk, counterexample_chain)");
  }
  r.done();
  return m;
}

ProcessModel build_model(const ModelSpec& m) {
  return std::visit(
      [](const auto& s) -> ProcessModel {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IidLaw>) return make_iid(s);
        else if constexpr (std::is_same_v<T, AlternatingSpec>) return make_alternating_plus_iid(s.law);
        else if constexpr (std::is_same_v<T, LinearProcessSpec>) return make_linear_process(s);
        else if constexpr (std::is_same_v<T, IteratedFunctionSpec>) return make_iterated_function(s);
        else if constexpr (std::is_same_v<T, ExpandingMapSpec>) return make_expanding_map(s);
        else if constexpr (std::is_same_v<T, CircleWalkSpec>) return make_circle_walk(s);
        else return make_counterexample_chain(s);
      },
      m.spec);
}

Sequence SequenceSpec::build() const {
  const double sc = scale, rt = rate;
  if (kind == "zero") return [](long) { return 0.0; };
  if (kind == "geometric") return [sc, rt](long k) { return sc * std::pow(rt, static_cast<double>(std::labs(k))); };
  if (kind == "power")
    return [sc, rt](long k) { return k == 0 ? sc : sc * std::pow(static_cast<double>(std::labs(k)), -rt); };
  if (kind == "values") return sequence_from(values, 0);
  throw ConfigError("unknown sequence kind '" + kind + "' (zero, geometric, power, values)");
}

Modulus ModulusSpec::build() const {
  if (kind == "lipschitz") return Modulus::lipschitz(constant);
  if (kind == "holder") return Modulus::holder(constant, exponent);
  if (kind == "log_power") return Modulus::log_power(constant, exponent);
  throw ConfigError("unknown modulus kind '" + kind + "' (lipschitz, holder, log_power)");
}

FourierSpec FourierParams::build() const {
  if (kind == "single") return FourierSpec::single_mode(amplitude);
  if (kind == "power") return FourierSpec::power(amplitude, exponent, support);
  throw ConfigError("unknown fourier kind '" + kind + "' (single, power)");
}

namespace {

SequenceSpec parse_sequence(Reader r) {
  SequenceSpec s;
  s.kind = r.string("kind");
  s.scale = r.number("scale", 1.0);
  s.rate = r.number("rate", 0.5);
  if (r.has("values")) s.values = r.numbers("values");
  require(s.kind == "zero" || s.kind == "geometric" || s.kind == "power" || s.kind == "values", r.where("kind"),
          "must be zero, geometric, power or values");
  require(s.scale >= 0.0 && s.rate >= 0.0, r.where("scale"), "scale and rate must be >= 0");
  for (double v : s.values) require(v >= 0.0, r.where("values"), "entries must be >= 0");
  r.done();
  return s;
}

ModulusSpec parse_modulus(Reader r) {
  ModulusSpec s;
  s.kind = r.string("kind");
  s.constant = r.number("constant", 1.0);
  s.exponent = r.number("exponent", 1.0);
  require(s.kind == "lipschitz" || s.kind == "holder" || s.kind == "log_power", r.where("kind"),
          "must be lipschitz, holder or log_power");
  require(s.constant > 0.0 && s.exponent > 0.0, r.where("constant"), "constant and exponent must be > 0");
  r.done();
  return s;
}

std::int64_t positive(Reader& r, const std::string& key, std::int64_t def) {
  const std::int64_t v = r.integer(key, def);
  require(v >= 1, r.where(key), "must be >= 1");
  return v;
}

TaskParams parse_params(const std::string& task, Reader r) {
  if (task == "simulate") {
    SimulateParams p;
    p.n = positive(r, "n", p.n);
    p.replicas = positive(r, "replicas", p.replicas);
    require(p.n * p.replicas <= 100'000'000, "params", "n * replicas above 1e8 is not written out");
    r.done();
    return p;
  }
  if (task == "sigma2") {
    Sigma2Params p;
    if (r.has("methods")) p.methods = r.strings("methods");
    for (const auto& m : p.methods)
      require(m == "covariance_series" || m == "dyadic" || m == "var_sn" || m == "fourier_closed_form",
              "params.methods", "unknown method '" + m + "'");
    p.n = positive(r, "n", p.n);
    p.replicas = positive(r, "replicas", p.replicas);
    p.K_max = to_int(r.integer("K_max", p.K_max), "params.K_max");
    p.j_max = to_int(r.integer("j_max", p.j_max), "params.j_max");
    if (r.has("var_sn_ns")) p.var_sn_ns = r.integers("var_sn_ns");
    p.var_sn_replicas = positive(r, "var_sn_replicas", p.var_sn_replicas);
    p.fourier_K = to_int(r.integer("fourier_K", 0), "params.fourier_K");
    require(p.K_max >= 0, "params.K_max", "must be >= 0");
    require(p.j_max >= 0 && p.j_max <= 30, "params.j_max", "must lie in [0, 30]");
    for (auto n : p.var_sn_ns) require(n >= 1, "params.var_sn_ns", "entries must be >= 1");
    r.done();
    return p;
  }
  if (task == "conditions") {
    ConditionsParams p;
    if (r.has("checks")) p.checks = r.strings("checks");
    static const std::set<std::string> known{"mw", "bis", "s2inf", "mix", "projcond", "mixrphi",
                                             "modulus", "kac", "class_L", "phi"};
    for (const auto& c : p.checks) require(known.count(c) > 0, "params.checks", "unknown check '" + c + "'");
    p.N_max = to_int(positive(r, "N_max", p.N_max), "params.N_max");
    if (r.has("ns")) {
      p.ns.clear();
      for (auto v : r.integers("ns")) p.ns.push_back(to_int(v, "params.ns"));
    }
    p.sigma2 = r.maybe_number("sigma2");
    if (r.has("R")) p.R = parse_sequence(r.sub("R"));
    if (r.has("phi")) p.phi = parse_sequence(r.sub("phi"));
    if (r.has("tail")) p.tail = parse_sequence(r.sub("tail"));
    if (r.has("modulus")) p.modulus = parse_modulus(r.sub("modulus"));
    p.width = r.number("width", p.width);
    if (r.has("chain")) p.chain = r.matrix("chain");
    require(p.width > 0.0, "params.width", "must be > 0");
    r.done();
    return p;
  }
  if (task == "inequality") {
    InequalityParams p;
    const std::string b = r.string("bound");
    if (b == "azuma") p.bound = BoundSpec::Kind::azuma;
    else if (b == "puw") p.bound = BoundSpec::Kind::puw;
    else if (b == "projection") p.bound = BoundSpec::Kind::projection;
    else Reader::fail("params.bound", "unknown bound '" + b + "' (azuma, puw, projection)");
    p.n = positive(r, "n", p.n);
    if (r.has("threshold_multipliers")) p.threshold_multipliers = r.numbers("threshold_multipliers");
    if (r.has("thresholds")) p.thresholds = r.numbers("thresholds");
    p.replicas = positive(r, "replicas", p.replicas);
    require(p.replicas >= 1000, "params.replicas", "must be >= 1000");
    for (double t : p.thresholds) require(t >= 0.0, "params.thresholds", "entries must be >= 0");
    for (double t : p.threshold_multipliers) require(t >= 0.0, "params.threshold_multipliers", "entries must be >= 0");
    r.done();
    return p;
  }
  if (task == "mdp-scan") {
    MdpScanParams p;
    p.gamma = r.number("gamma", p.gamma);
    if (r.has("ns")) p.ns = r.integers("ns");
    if (r.has("xs")) p.xs = r.numbers("xs");
    p.sigma2 = r.maybe_number("sigma2");
    p.method = parse_mdp_method(r.string("method", "exact_binomial"));
    p.replicas = positive(r, "replicas", p.replicas);
    require(p.gamma > 0.0 && p.gamma < 1.0, "params.gamma", "must lie in (0, 1)");
    require(!p.ns.empty() && !p.xs.empty(), "params", "ns and xs must be nonempty");
    for (auto n : p.ns) require(n >= 1, "params.ns", "entries must be >= 1");
    if (p.sigma2) require(*p.sigma2 > 0.0, "params.sigma2", "must be > 0");
    r.done();
    return p;
  }
  if (task == "diophantine") {
    DiophantineParams p;
    if (r.has("irrational")) p.step = parse_irrational(r.raw("irrational"));
    p.cf_depth = to_int(r.integer("cf_depth", p.cf_depth), "params.cf_depth");
    p.audit_epsilon = r.maybe_number("audit_epsilon");
    p.audit_K = positive(r, "audit_K", p.audit_K);
    if (r.has("paroux_K")) p.paroux_K = positive(r, "paroux_K", 1);
    if (r.has("bis_N_max")) p.bis_N_max = to_int(positive(r, "bis_N_max", 1), "params.bis_N_max");
    if (r.has("fourier")) {
      Reader f = r.sub("fourier");
      p.fourier.kind = f.string("kind", "single");
      p.fourier.amplitude = f.number("amplitude", 0.5);
      p.fourier.exponent = f.number("exponent", 2.0);
      p.fourier.support = to_int(f.integer("support", 64), "params.fourier.support");
      require(p.fourier.kind == "single" || p.fourier.kind == "power", "params.fourier.kind", "must be single or power");
      f.done();
    }
    require(p.cf_depth >= 1 && p.cf_depth <= 10000, "params.cf_depth", "must lie in [1, 10000]");
    if (p.audit_epsilon) require(*p.audit_epsilon > 0.0, "params.audit_epsilon", "must be > 0");
    r.done();
    return p;
  }
  if (task == "transfer-decay") {
    TransferParams p;
    p.n_max = to_int(positive(r, "n_max", p.n_max), "params.n_max");
    if (r.has("modulus")) p.modulus = parse_modulus(r.sub("modulus"));
    r.done();
    return p;
  }
  if (task == "decompose") {
    DecomposeParams p;
    p.n = positive(r, "n", p.n);
    p.m = to_int(positive(r, "m", p.m), "params.m");
    r.done();
    return p;
  }
  Reader::fail("task", "unknown task '" + task +
                           "' (simulate, sigma2, conditions, inequality, mdp-scan, diophantine, transfer-decay, "
                           "decompose)");
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  Reader r(j, "");
  ExperimentConfig c;
  c.raw = j;
  c.task = r.string("task");
  const Json& seed = r.raw("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    Reader::fail("seed", "must be a nonnegative integer");
  c.seed = seed.get<std::uint64_t>();
  c.output_dir = r.string("output_dir", "");
  if (r.has("model")) c.model = parse_model(r.raw("model"));
  const Json empty = Json::object();
  c.params = r.has("params") ? parse_params(c.task, r.sub("params")) : parse_params(c.task, Reader(empty, "params"));
  r.done();
  const bool needs_model = c.task != "diophantine" && c.task != "conditions";
  if (needs_model && !c.model) Reader::fail("model", "task '" + c.task + "' needs a model");
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text, nullptr, true, true);  // comments allowed
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string config_schema() {
  static const char* kSchema = R"JSON({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "mdlab experiment config",
  "type": "object",
  "additionalProperties": false,
  "required": ["task", "seed"],
  "properties": {
    "task": {"enum": ["simulate", "sigma2", "conditions", "inequality", "mdp-scan", "diophantine", "transfer-decay", "decompose"]},
    "seed": {"type": "integer", "minimum": 0},
    "output_dir": {"type": "string"},
    "model": {"$ref": "#/$defs/model"},
    "params": {"type": "object", "description": "task parameters, see $defs/params_<task>"}
  },
  "$defs": {
    "law": {
      "type": "object", "additionalProperties": false, "required": ["kind"],
      "properties": {
        "kind": {"enum": ["rademacher", "uniform", "two_point"]},
        "half_width": {"type": "number", "exclusiveMinimum": 0},
        "p": {"type": "number"}, "a": {"type": "number"}, "b": {"type": "number"}
      }
    },
    "irrational": {
      "type": "object", "additionalProperties": false, "required": ["kind"],
      "properties": {
        "kind": {"enum": ["golden", "quadratic", "literal", "rational"]},
        "P": {"type": "integer"}, "D": {"type": "integer"}, "Q": {"type": "integer"},
        "decimal": {"type": "string"}, "radius": {"type": "string"},
        "p": {"type": "integer"}, "q": {"type": "integer"}
      }
    },
    "sequence": {
      "type": "object", "additionalProperties": false, "required": ["kind"],
      "properties": {
        "kind": {"enum": ["zero", "geometric", "power", "values"]},
        "scale": {"type": "number", "minimum": 0}, "rate": {"type": "number", "minimum": 0},
        "values": {"type": "array", "items": {"type": "number", "minimum": 0}}
      }
    },
    "modulus": {
      "type": "object", "additionalProperties": false, "required": ["kind"],
      "properties": {
        "kind": {"enum": ["lipschitz", "holder", "log_power"]},
        "constant": {"type": "number", "exclusiveMinimum": 0},
        "exponent": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "model": {
      "type": "object", "required": ["type"],
      "properties": {
        "type": {"enum": ["iid", "alternating_plus_iid", "linear_process", "iterated_function", "expanding_map", "circle_walk", "counterexample_chain"]},
        "law": {"$ref": "#/$defs/law"},
        "coefficients": {
          "type": "object", "additionalProperties": false, "required": ["kind"],
          "properties": {
            "kind": {"enum": ["geometric", "power", "finite"]},
            "scale": {"type": "number"}, "rate": {"type": "number"},
            "two_sided": {"type": "boolean"}, "values": {"type": "array", "items": {"type": "number"}}
          }
        },
        "innovation": {
          "type": "object", "additionalProperties": false,
          "properties": {
            "law": {"$ref": "#/$defs/law"},
            "chain": {"type": "object", "additionalProperties": false, "required": ["P", "values"],
                      "properties": {"P": {"type": "array"}, "values": {"type": "array"}}}
          }
        },
        "observable": {"description": "linear_process: {kind: identity|holder|cosine, alpha, frequency}; iterated_function / expanding_map: string; circle_walk: {constant, cos: [...], sin: [...]}"},
        "lag_window": {"type": "integer", "minimum": 0},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "rho": {"type": "number"},
        "alpha": {"type": "number"},
        "map": {"enum": ["doubling", "integer_beta", "full_branch", "gauss"]},
        "beta": {"type": "number"},
        "breakpoints": {"type": "array", "items": {"type": "number"}},
        "frequency": {"type": "integer"},
        "step": {"$ref": "#/$defs/irrational"},
        "allow_rational": {"type": "boolean"},
        "tail_exponent": {"type": "number"},
        "j_max": {"type": "integer"},
        "explicit_law": {"type": "array", "items": {"type": "number"}}
      }
    },
    "params_simulate": {"properties": {"n": {"type": "integer", "minimum": 1}, "replicas": {"type": "integer", "minimum": 1}}},
    "params_sigma2": {"properties": {
      "methods": {"type": "array", "items": {"enum": ["covariance_series", "dyadic", "var_sn", "fourier_closed_form"]}},
      "n": {"type": "integer", "minimum": 1}, "replicas": {"type": "integer", "minimum": 1},
      "K_max": {"type": "integer", "minimum": 0}, "j_max": {"type": "integer", "minimum": 0, "maximum": 30},
      "var_sn_ns": {"type": "array", "items": {"type": "integer", "minimum": 1}},
      "var_sn_replicas": {"type": "integer", "minimum": 200}, "fourier_K": {"type": "integer", "minimum": 0}}},
    "params_conditions": {"properties": {
      "checks": {"type": "array", "items": {"enum": ["mw", "bis", "s2inf", "mix", "projcond", "mixrphi", "modulus", "kac", "class_L", "phi"]}},
      "N_max": {"type": "integer", "minimum": 1}, "ns": {"type": "array", "items": {"type": "integer"}},
      "sigma2": {"type": "number"}, "R": {"$ref": "#/$defs/sequence"}, "phi": {"$ref": "#/$defs/sequence"},
      "tail": {"$ref": "#/$defs/sequence"}, "modulus": {"$ref": "#/$defs/modulus"},
      "width": {"type": "number", "exclusiveMinimum": 0}, "chain": {"type": "array"}}},
    "params_inequality": {"required": ["bound"], "properties": {
      "bound": {"enum": ["azuma", "puw", "projection"]}, "n": {"type": "integer", "minimum": 1},
      "threshold_multipliers": {"type": "array", "items": {"type": "number", "minimum": 0}},
      "thresholds": {"type": "array", "items": {"type": "number", "minimum": 0}},
      "replicas": {"type": "integer", "minimum": 1000}}},
    "params_mdp-scan": {"properties": {
      "gamma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
      "ns": {"type": "array", "items": {"type": "integer", "minimum": 1}}, "xs": {"type": "array", "items": {"type": "number"}},
      "sigma2": {"type": "number", "exclusiveMinimum": 0}, "method": {"enum": ["naive", "exact_binomial", "tilted"]},
      "replicas": {"type": "integer", "minimum": 1}}},
    "params_diophantine": {"properties": {
      "irrational": {"$ref": "#/$defs/irrational"}, "cf_depth": {"type": "integer", "minimum": 1},
      "audit_epsilon": {"type": "number", "exclusiveMinimum": 0}, "audit_K": {"type": "integer", "minimum": 1},
      "paroux_K": {"type": "integer", "minimum": 1}, "bis_N_max": {"type": "integer", "minimum": 1},
      "fourier": {"type": "object", "properties": {"kind": {"enum": ["single", "power"]}, "amplitude": {"type": "number"},
                  "exponent": {"type": "number"}, "support": {"type": "integer"}}}}},
    "params_transfer-decay": {"properties": {"n_max": {"type": "integer", "minimum": 1}, "modulus": {"$ref": "#/$defs/modulus"}}},
    "params_decompose": {"properties": {"n": {"type": "integer", "minimum": 1}, "m": {"type": "integer", "minimum": 1}}}
  }
}
)JSON";
  return kSchema;
}

}  // namespace mdlab
