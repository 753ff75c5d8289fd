#include "mdlab/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "mdlab/conditions.hpp"
#include "mdlab/transfer.hpp"
#include "mdlab/variance.hpp"

namespace mdlab {

std::string library_version() { return "0.1.0"; }

const std::string* RunArtifacts::file(const std::string& name) const {
  for (const auto& [n, c] : files)
    if (n == name) return &c;
  return nullptr;
}

namespace {

std::string fmt(double v) { return format_double(v); }

void note_model_truncations(const ProcessModel& m, RunArtifacts& a) {
  if (auto r = m.meta("truncation_radius"))
    a.truncations.push_back("linear process coefficients truncated at |i| <= " + fmt(*r) + " (tail mass " +
                            fmt(m.meta("truncation_error").value_or(0.0)) + ")");
  if (auto j = m.meta("j_max")) a.truncations.push_back("return-time law truncated at j_max = " + fmt(*j));
  if (auto b = m.meta("burn_in")) a.truncations.push_back("stationary start approximated by burn-in of " + fmt(*b) + " steps");
  if (m.kernel && m.kernel->kernel->name() == "gauss_pf")
    a.truncations.push_back("Gauss transfer operator sums " + std::to_string(GaussKernel::kBranches) +
                            " branches; remainder replaced by an integral");
  if (m.kernel && dynamic_cast<const GridKernel*>(m.kernel->kernel.get()))
    a.truncations.push_back("kernel discretized on " + std::to_string(m.kernel->kernel->size()) + " grid nodes");
}

double model_sigma2(const ProcessModel& m, const std::optional<double>& given, RunArtifacts& a) {
  if (given) return *given;
  if (auto s = m.meta("sigma2")) {
    a.warnings.push_back("sigma2 taken from the model: " + fmt(*s));
    return *s;
  }
  throw ConfigError("params.sigma2 is required: model '" + m.name + "' has no closed-form sigma2");
}

void run_simulate(const ExperimentConfig& c, const SimulateParams& p, const ProcessModel& m, RunArtifacts& a) {
  const auto paths = simulate_paths(m, static_cast<std::size_t>(p.n), static_cast<std::size_t>(p.replicas), c.seed, 0);
  CsvTable t({"replica", "k", "x", "s"});
  CsvTable s({"replica", "sum", "max_abs_partial_sum"});
  for (std::size_t r = 0; r < paths.size(); ++r) {
    const auto ps = partial_sums(paths[r]);
    const auto v = paths[r].values();
    for (std::size_t k = 0; k < v.size(); ++k) t.add(r, k + 1, v[k], ps[k]);
    s.add(r, ps.empty() ? 0.0 : ps.back(), max_abs_partial_sum(paths[r]));
  }
  a.add_file("paths.csv", t.str());
  a.add_file("path_summary.csv", s.str());
  a.summary = "simulated " + std::to_string(p.replicas) + " path(s) of length " + std::to_string(p.n);
}

void run_sigma2(const ExperimentConfig& c, const Sigma2Params& p, const ProcessModel& m, RunArtifacts& a) {
  std::vector<SigmaEstimate> est;
  std::vector<Path> paths;
  auto need_paths = [&] {
    if (paths.empty())
      paths = simulate_paths(m, static_cast<std::size_t>(p.n), static_cast<std::size_t>(p.replicas), c.seed, 0);
  };
  for (const auto& method : p.methods) {
    if (method == "covariance_series") {
      need_paths();
      est.push_back(sigma2_covariance_series(paths, p.K_max));
      a.truncations.push_back("covariance series truncated at lag K_max = " + std::to_string(p.K_max));
    } else if (method == "dyadic") {
      need_paths();
      est.push_back(sigma2_dyadic(paths, p.j_max));
      a.truncations.push_back("dyadic series truncated at level j_max = " + std::to_string(p.j_max));
    } else if (method == "var_sn") {
      std::vector<std::size_t> ns(p.var_sn_ns.begin(), p.var_sn_ns.end());
      std::sort(ns.begin(), ns.end());
      const auto vp = simulate_paths(m, ns.back(), static_cast<std::size_t>(p.var_sn_replicas), c.seed, 1);
      est.push_back(sigma2_var_sn(vp, ns));
    } else if (method == "fourier_closed_form") {
      const auto* spec = std::get_if<CircleWalkSpec>(&c.model->spec);
      if (!spec) throw UnsupportedError("fourier_closed_form applies to circle_walk models only");
      if (p.fourier_K > 0) {
        est.push_back(sigma2_circle_fourier(fourier_spec(spec->observable), spec->step, p.fourier_K));
        a.truncations.push_back("Fourier sum truncated at |k| <= " + std::to_string(p.fourier_K));
      } else {
        est.push_back(sigma2_circle_fourier(spec->observable, spec->step));
      }
    }
  }
  CsvTable summary({"method", "value", "se", "raw", "clamped"});
  for (const auto& e : est) {
    summary.add(e.method, e.value, e.se, e.raw, e.clamped);
    a.add_file("sigma2_" + e.method + "_detail.csv", e.detail_csv().str());
    for (const auto& w : e.warnings) a.warnings.push_back(e.method + ": " + w);
  }
  a.add_file("sigma2.csv", summary.str());
  for (std::size_t i = 0; i < est.size(); ++i)
    for (std::size_t j = i + 1; j < est.size(); ++j)
      if (!agree(est[i], est[j]))
        a.warnings.push_back(est[i].method + " and " + est[j].method + " disagree beyond 3 combined standard errors");
  std::ostringstream os;
  for (const auto& e : est) os << e.method << "=" << fmt(e.value) << " ";
  a.summary = os.str();
}

void add_series(RunArtifacts& a, const std::string& check, const SeriesDiagnostic& d, CsvTable& table) {
  a.add_file("conditions_" + check + ".csv", d.to_csv().str());
  table.add(check, to_string(d.verdict), d.total(), d.fit_kind, d.exponent, d.ratio, d.r2, d.note);
}

void run_conditions(const ExperimentConfig& c, const ConditionsParams& p, const std::optional<ProcessModel>& m,
                    RunArtifacts& a) {
  CsvTable table({"check", "verdict", "total", "fit_kind", "exponent", "ratio", "r2", "note"});
  auto need_model = [&](const std::string& check) -> const ProcessModel& {
    if (!m) throw ConfigError("check '" + check + "' needs a model");
    return *m;
  };
  auto linear_spec = [&](const std::string& check) -> const LinearProcessSpec& {
    if (!c.model) throw ConfigError("check '" + check + "' needs a linear_process model");
    const auto* s = std::get_if<LinearProcessSpec>(&c.model->spec);
    if (!s) throw UnsupportedError("check '" + check + "' applies to linear_process models only");
    return *s;
  };
  for (const auto& check : p.checks) {
    a.truncations.push_back(check + ": series examined up to N_max = " + std::to_string(p.N_max));
    if (check == "mw") {
      add_series(a, check, check_mw(need_model(check), p.N_max), table);
    } else if (check == "bis") {
      add_series(a, check, check_bis(need_model(check), p.N_max), table);
    } else if (check == "s2inf") {
      const auto& model = need_model(check);
      const auto r = check_s2inf(model, model_sigma2(model, p.sigma2, a), p.ns);
      a.add_file("conditions_s2inf.csv", r.to_csv().str());
      table.add(check, r.pass ? "pass" : "fail", 0.0, "spearman", r.spearman, 0.0, 0.0, "");
    } else if (check == "mix") {
      const auto r = check_mix(need_model(check), default_mix_pairs(), p.ns);
      a.add_file("conditions_mix.csv", r.to_csv().str());
      table.add(check, r.pass ? "pass" : "fail", 0.0, "", 0.0, 0.0, 0.0, "");
    } else if (check == "projcond") {
      const auto& spec = linear_spec(check);
      add_series(a, check, check_projcond_bound(spec, innovation_phi(spec, 4 * p.N_max + 1), p.N_max), table);
      a.truncations.push_back("projcond: inner mixing sums truncated at 4 N_max");
    } else if (check == "modulus") {
      add_series(a, check, check_modulus_condition(linear_spec(check), p.N_max), table);
    } else if (check == "mixrphi") {
      const auto r = check_mixrphi(p.R.build(), p.phi.build(), p.N_max);
      add_series(a, check, r.main, table);
      table.add("mixrphi_item1", r.item1 ? "holds" : "fails", 0.0, "", 0.0, 0.0, 0.0, "");
      table.add("mixrphi_item2", r.item2 ? "holds" : "fails", 0.0, "", 0.0, 0.0, 0.0, "");
    } else if (check == "kac") {
      const auto r = check_kac(p.modulus.build(), p.tail.build(), p.width, p.N_max);
      add_series(a, check, r.series, table);
      table.add("kac_integral", to_string(r.integral.verdict), r.integral.estimate, "", 0.0, 0.0, 0.0, "");
    } else if (check == "class_L") {
      const auto r = check_class_L(p.modulus.build());
      a.add_file("conditions_class_L.csv", r.blocks.to_csv().str());
      table.add(check, to_string(r.verdict), r.estimate, r.blocks.fit_kind, r.blocks.exponent, r.blocks.ratio,
                r.blocks.r2, r.blocks.note);
      a.truncations.push_back("class_L: integral split into 1000 dyadic blocks");
    } else if (check == "phi") {
      if (p.chain.empty()) throw ConfigError("check 'phi' needs params.chain");
      ChainInnovation ch;
      ch.P = p.chain;
      ch.values.assign(p.chain.size(), 0.0);
      const auto pi = ch.stationary();
      const auto phi = phi_coefficients(p.chain, pi, p.N_max);
      std::vector<double> terms(phi.begin(), phi.end());
      add_series(a, check, diagnose_series(terms, 1), table);
    }
  }
  a.add_file("conditions.csv", table.str());
  a.summary = "ran " + std::to_string(p.checks.size()) + " condition check(s)";
}

void run_inequality(const ExperimentConfig& c, const InequalityParams& p, const ProcessModel& m, RunArtifacts& a) {
  const BoundSpec bound = bound_for_model(p.bound, m, static_cast<long>(p.n));
  std::vector<double> thresholds = p.thresholds;
  if (thresholds.empty()) {
    double scale = 1.0;
    switch (bound.kind) {
      case BoundSpec::Kind::azuma: scale = bound.c; break;
      case BoundSpec::Kind::puw: scale = puw_bracket(static_cast<long>(p.n), bound.x_inf, bound.cond_norms); break;
      case BoundSpec::Kind::projection: scale = projection_bound(std::vector<double>{}, bound.p).D; break;
    }
    for (double mult : p.threshold_multipliers) thresholds.push_back(mult * std::sqrt(static_cast<double>(p.n)) * scale);
  }
  if (p.bound == BoundSpec::Kind::puw && m.kernel)
    a.truncations.push_back("puw: conditional sum norms computed up to j = n = " + std::to_string(p.n));
  const auto reports = verify_domination(m, bound, static_cast<long>(p.n), thresholds,
                                         static_cast<std::uint64_t>(p.replicas), c.seed, 0);
  a.add_file("tail_bounds.csv", tail_reports_csv(reports).str());
  std::size_t violated = 0;
  for (const auto& r : reports) violated += r.dominated ? 0 : 1;
  if (violated > 0) {
    a.verdict = "domination violated";
    a.exit_code = kExitTaskFailure;
  } else {
    a.verdict = "dominated";
  }
  a.summary = bound.name() + " bound: " + std::to_string(violated) + " of " + std::to_string(reports.size()) +
              " thresholds violated";
}

void run_mdp_scan(const ExperimentConfig& c, const MdpScanParams& p, const ProcessModel& m, RunArtifacts& a) {
  const double s2 = model_sigma2(m, p.sigma2, a);
  std::vector<long> ns(p.ns.begin(), p.ns.end());
  const auto rep = mdp_scan(m, SpeedSequence::power(p.gamma), ns, p.xs, s2, p.method,
                            static_cast<std::uint64_t>(p.replicas), c.seed, 0);
  a.add_file("mdp_scan.csv", rep.to_csv().str());
  a.add_file("mdp_diagnostics.csv", rep.diagnostics_csv().str());
  a.add_file("mdp_scan.json", rep.to_json());
  for (const auto& r : rep.rows)
    if (r.no_exceedance)
      a.warnings.push_back("no exceedance observed at n = " + std::to_string(r.n) + ", x = " + fmt(r.x));
  a.summary = "mdp scan: " + rep.label;
}

void run_diophantine(const DiophantineParams& p, RunArtifacts& a) {
  const auto cf = cf_expand(p.step, p.cf_depth);
  if (cf.terminated) a.warnings.push_back("continued fraction terminated: the input is rational");
  const auto conv = convergents(cf.quotients);
  const auto check = check_convergents(cf.quotients, conv, p.step);
  a.add_file("convergents.csv", convergent_table(conv, p.step).str());
  CsvTable checks({"property", "holds"});
  checks.add("recurrence", check.recurrence);
  checks.add("determinant", check.determinant);
  checks.add("coprime", check.coprime);
  checks.add("q_increasing", check.q_increasing);
  checks.add("approximation", check.approximation);
  checks.add("gaps_decreasing", check.gaps_decreasing);
  a.add_file("convergent_checks.csv", checks.str());
  std::ostringstream os;
  os << "convergents to depth " << p.cf_depth << (check.ok() ? " verified" : " FAILED checks");
  if (p.audit_epsilon) {
    const auto audit = badly_approximable_audit(p.step, *p.audit_epsilon, p.audit_K);
    a.add_file("audit.csv", audit.to_csv().str());
    os << "; audit: " << audit.summary();
  }
  if (p.paroux_K) {
    const auto r = paroux_sum(p.fourier.build(), p.step, *p.paroux_K);
    a.add_file("paroux_blocks.csv", r.blocks_csv().str());
    os << "; fourier sum " << r.verdict;
  }
  if (p.bis_N_max) {
    const auto r = bis_series_circle(p.fourier.build(), p.step, *p.bis_N_max);
    a.add_file("bis_circle.csv", r.diagnostic.to_csv().str());
    CsvTable t({"right", "right_declared", "holds", "first_violation"});
    t.add(r.right, r.right_declared, r.holds, r.first_violation);
    a.add_file("bis_circle_summary.csv", t.str());
    os << "; bis inequality " << (r.holds ? "holds" : "fails");
  }
  if (!check.ok()) {
    a.verdict = "convergent checks failed";
    a.exit_code = kExitTaskFailure;
  }
  a.summary = os.str();
}

void run_transfer(const TransferParams& p, const ProcessModel& m, RunArtifacts& a) {
  if (!m.kernel) throw UnsupportedError("transfer-decay needs a kernel model; '" + m.name + "' has none");
  const auto& K = *m.kernel->kernel;
  const auto f = m.kernel->centered_at_nodes();
  const auto decay = sup_norm_decay(K, f, p.n_max);
  a.add_file("decay.csv", decay.to_csv().str());
  CsvTable s({"kappa", "rho", "residual", "fitted", "diverging", "invariance_defect"});
  s.add(decay.kappa, decay.rho, decay.residual, decay.fitted, decay.diverging, invariance_defect(K, f));
  a.add_file("decay_fit.csv", s.str());
  std::ostringstream os;
  os << "fitted rho = " << fmt(decay.rho);
  if (p.modulus) {
    const auto* gk = dynamic_cast<const GridKernel*>(&K);
    if (!gk) throw UnsupportedError("modulus check needs a grid kernel");
    const auto mc = modulus_bound_check(*gk, f, p.modulus->build(), p.n_max);
    CsvTable t({"n", "norm", "u", "margin"});
    for (std::size_t n = 0; n < mc.norms.size(); ++n) t.add(n, mc.norms[n], mc.u[n], mc.margins[n]);
    a.add_file("modulus_check.csv", t.str());
    os << "; modulus bound " << (mc.ok ? "holds" : "violated");
    if (!mc.ok) {
      a.verdict = "modulus bound violated";
      a.exit_code = kExitTaskFailure;
    }
  }
  a.summary = os.str();
}

void run_decompose(const ExperimentConfig& c, const DecomposeParams& p, const ProcessModel& m, RunArtifacts& a) {
  RngStream rng(c.seed, stream_index(0, 0));
  const Path path = m.sample(static_cast<std::size_t>(p.n), rng);
  const auto d = block_martingale_decompose(m, path, p.m);
  a.add_file("decomposition.csv", d.to_csv().str());
  CsvTable s({"m", "blocks", "max_increment_conditional_mean", "reconstruction_error", "residual_sup",
              "residual_bound", "verified"});
  s.add(d.m, d.blocks, d.max_increment_conditional_mean, d.reconstruction_error, d.residual_sup, d.residual_bound,
        d.verified);
  a.add_file("decomposition_summary.csv", s.str());
  if (std::isnan(d.max_increment_conditional_mean))
    a.refusals.push_back("conditional means not re-verified by enumeration: successor tree too large");
  if (!d.verified) {
    a.verdict = "decomposition not verified";
    a.exit_code = kExitTaskFailure;
  }
  a.summary = "block decomposition with m = " + std::to_string(p.m) + (d.verified ? " verified" : " NOT verified");
}

}  // namespace

RunArtifacts execute(const ExperimentConfig& c) {
  RunArtifacts a;
  std::optional<ProcessModel> model;
  if (c.model) {
    try {
      model = build_model(*c.model);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    note_model_truncations(*model, a);
  }
  try {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, SimulateParams>) run_simulate(c, p, *model, a);
          else if constexpr (std::is_same_v<T, Sigma2Params>) run_sigma2(c, p, *model, a);
          else if constexpr (std::is_same_v<T, ConditionsParams>) run_conditions(c, p, model, a);
          else if constexpr (std::is_same_v<T, InequalityParams>) run_inequality(c, p, *model, a);
          else if constexpr (std::is_same_v<T, MdpScanParams>) run_mdp_scan(c, p, *model, a);
          else if constexpr (std::is_same_v<T, DiophantineParams>) run_diophantine(p, a);
          else if constexpr (std::is_same_v<T, TransferParams>) run_transfer(p, *model, a);
          else run_decompose(c, p, *model, a);
        },
        c.params);
  } catch (const CapacityError& e) {
    a.files.clear();
    a.refusals.push_back(e.what());
    a.verdict = "refused";
    a.summary = std::string("refused: ") + e.what();
    a.exit_code = kExitRefused;
  }
  return a;
}

std::string manifest_json(const ExperimentConfig& c, const RunArtifacts& a) {
  Json m;
  m["tool"] = "mdlab";
  m["version"] = library_version();
  m["build"] = {{"compiler", __VERSION__},
                {"boost", BOOST_LIB_VERSION},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)}};
  m["task"] = c.task;
  m["seed"] = c.seed;
  m["config"] = c.raw;
  Json outputs = Json::array();
  for (const auto& [name, content] : a.files) outputs.push_back({{"file", name}, {"bytes", content.size()}});
  m["outputs"] = outputs;
  m["truncations"] = a.truncations;
  m["refusals"] = a.refusals;
  m["warnings"] = a.warnings;
  m["verdict"] = a.verdict;
  m["exit_code"] = a.exit_code;
  m["summary"] = a.summary;
  return m.dump(2) + "\n";
}

void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& a, const std::string& manifest,
                     double wall_seconds) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
  };
  for (const auto& [name, content] : a.files) put(name, content);
  put("manifest.json", manifest);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  Json t;
  t["finished_at"] = ts.str();
  t["wall_seconds"] = wall_seconds;
  t["threads"] = thread_count();
  put("timing.json", t.dump(2) + "\n");
}

int run_config_file(const std::filesystem::path& config_path, const std::filesystem::path& output_override,
                    std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  RunArtifacts a;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file " + config_path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    config = parse_config_text(buf.str());
    a = execute(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CapacityError& e) {
    err << "refused: " << e.what() << "\n";
    return kExitRefused;
  }
  std::filesystem::path dir = output_override;
  if (dir.empty()) dir = std::filesystem::path(config.output_dir.empty() ? "mdlab_out" : config.output_dir);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_artifacts(dir, a, manifest_json(config, a), wall);
  out << a.summary << "\n";
  if (a.exit_code == kExitRefused) err << "refused: " << (a.refusals.empty() ? "" : a.refusals.back()) << "\n";
  if (a.exit_code == kExitTaskFailure) err << "task failure: " << a.verdict << "\n";
  out << "outputs written to " << dir.string() << "\n";
  return a.exit_code;
}

}  // namespace mdlab
