#include "mdlab/suite.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "mdlab/conditions.hpp"
#include "mdlab/diophantine.hpp"
#include "mdlab/inequalities.hpp"
#include "mdlab/mdp.hpp"
#include "mdlab/oracles.hpp"
#include "mdlab/processes.hpp"
#include "mdlab/transfer.hpp"
#include "mdlab/variance.hpp"

namespace mdlab {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

CriterionResult criterion(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

ProcessModel circle_cos() {
  CircleWalkSpec s;
  s.step = IrrationalSpec::golden();
  s.observable = TrigPolynomial::cosine(1);
  return make_circle_walk(s);
}

ProcessModel doubling_cos() {
  ExpandingMapSpec s;
  s.map = ExpandingMapSpec::Map::doubling;
  s.observable = "cos";
  return make_expanding_map(s);
}

CriterionResult ac1(std::uint64_t seed, DataFiles& files) {
  auto r = criterion(1, "MDP endpoint rate (exact binomial oracle)");
  const auto model = make_iid(IidLaw::rademacher());
  const auto rep = mdp_scan(model, SpeedSequence::power(1.0 / 3.0), {10000, 1000000}, {1.0}, 1.0,
                            MdpMethod::exact_binomial, 0, seed, 1);
  files["ac1_mdp_scan.csv"] = rep.to_csv().str();
  const double g4 = std::abs(rep.rows[0].gap), g6 = std::abs(rep.rows[1].gap);
  // Independent check of the log tail against Boost's binomial law.
  double worst = 0.0;
  for (const auto& row : rep.rows) {
    const double ref = oracle::binomial_tail_log(row.n, row.threshold);
    worst = std::max(worst, std::abs(row.estimate / row.a_n - ref) / std::abs(ref));
  }
  r.pass = g6 <= 0.06 && g6 < g4 && worst < 1e-9;
  r.detail = "|gap| n=1e4: " + fmt(g4) + ", n=1e6: " + fmt(g6) + "; oracle rel diff " + fmt(worst);
  return r;
}

CriterionResult ac2(std::uint64_t seed, DataFiles& files) {
  auto r = criterion(2, "sigma2 cross-method agreement");
  const auto dm = doubling_cos();
  const auto dpaths = simulate_paths(dm, 100000, 10, seed, 21);
  const auto cov = sigma2_covariance_series(dpaths, 5);
  const auto dy = sigma2_dyadic(dpaths, 2);

  const auto cm = circle_cos();
  const auto cpaths = simulate_paths(cm, 1000000, 20, seed, 22);
  const auto ccov = sigma2_covariance_series(cpaths, 25);
  const auto exact = sigma2_circle_fourier(TrigPolynomial::cosine(1), IrrationalSpec::golden());
  const double a = IrrationalSpec::golden().value();
  const double brute = oracle::circle_covariance_sum(a, 200);

  CsvTable t({"model", "method", "value", "se"});
  t.add("doubling_cos", cov.method, cov.value, cov.se);
  t.add("doubling_cos", dy.method, dy.value, dy.se);
  t.add("circle_golden_cos", ccov.method, ccov.value, ccov.se);
  t.add("circle_golden_cos", exact.method, exact.value, exact.se);
  t.add("circle_golden_cos", "bruteforce_200_lags", brute, 0.0);
  files["ac2_sigma2.csv"] = t.str();

  const bool in_band = cov.value >= 0.49 && cov.value <= 0.51 && dy.value >= 0.49 && dy.value <= 0.51;
  const bool oracle_ok = std::abs(exact.value - brute) <= 1e-10;
  const double rel = std::abs(ccov.value - exact.value) / exact.value;
  r.pass = in_band && oracle_ok && rel <= 0.10;
  r.detail = "doubling cov " + fmt(cov.value) + ", dyadic " + fmt(dy.value) + "; circle cov " + fmt(ccov.value) +
             " vs exact " + fmt(exact.value) + " (rel " + fmt(rel) + ", brute force " + fmt(brute) + ")";
  return r;
}

CriterionResult ac3(std::uint64_t seed, DataFiles& files) {
  auto r = criterion(3, "inequality domination");
  const long n = 100;
  const std::uint64_t replicas = 100000;
  LinearProcessSpec lp;
  lp.coefficients.kind = CoefficientSpec::Kind::geometric;
  lp.coefficients.rate = 0.5;
  struct Combo {
    std::string name;
    ProcessModel model;
    BoundSpec::Kind kind;
  };
  std::vector<Combo> combos{{"iid_azuma", make_iid(IidLaw::rademacher()), BoundSpec::Kind::azuma},
                            {"iid_puw", make_iid(IidLaw::rademacher()), BoundSpec::Kind::puw},
                            {"circle_puw", circle_cos(), BoundSpec::Kind::puw},
                            {"iid_projection", make_iid(IidLaw::rademacher()), BoundSpec::Kind::projection},
                            {"linear_geometric_projection", make_linear_process(lp), BoundSpec::Kind::projection}};
  std::size_t violations = 0, checked = 0;
  std::uint64_t exp = 30;
  for (const auto& c : combos) {
    const BoundSpec b = bound_for_model(c.kind, c.model, n);
    double scale = 1.0;
    if (c.kind == BoundSpec::Kind::azuma) scale = b.c;
    else if (c.kind == BoundSpec::Kind::puw) scale = puw_bracket(n, b.x_inf, b.cond_norms);
    else scale = projection_bound(std::vector<double>{}, b.p).D;
    std::vector<double> th;
    for (double m : {0.5, 1.0, 2.0, 3.0, 4.0}) th.push_back(m * std::sqrt(static_cast<double>(n)) * scale);
    const auto reps = verify_domination(c.model, b, n, th, replicas, seed, exp++);
    files["ac3_" + c.name + ".csv"] = tail_reports_csv(reps).str();
    for (const auto& x : reps) {
      ++checked;
      violations += x.dominated ? 0 : 1;
    }
  }
  r.pass = violations == 0;
  r.detail = std::to_string(violations) + " violation(s) over " + std::to_string(checked) + " (combination, threshold) cells";
  return r;
}

CriterionResult ac4(std::uint64_t, DataFiles& files) {
  auto r = criterion(4, "transfer operator exactness");
  const auto f = GridFunction::sample([](double x) { return std::cos(2.0 * std::numbers::pi * x); });
  const auto pf = apply_pf_integer_beta(f, 2);
  double pf_max = 0.0;
  for (double v : pf.values()) pf_max = std::max(pf_max, std::abs(v));

  IntegerBetaKernel K(2);
  std::vector<double> id(K.nodes().begin(), K.nodes().end());
  const auto decay = sup_norm_decay(K, id, 30);
  files["ac4_decay.csv"] = decay.to_csv().str();

  auto g = [](auto fn) { return GridFunction::sample(fn); };
  const double tau = 2.0 * std::numbers::pi;
  double dual = 0.0;
  dual = std::max(dual, std::abs(duality_defect(g([](double x) { return x; }), g([&](double x) { return std::cos(tau * x); }), 2)));
  dual = std::max(dual, std::abs(duality_defect(g([](double x) { return x * x; }), g([&](double x) { return std::sin(tau * x); }), 2)));
  dual = std::max(dual, std::abs(duality_defect(g([&](double x) { return std::cos(tau * x); }), g([&](double x) { return std::exp(std::cos(tau * x)); }), 2)));

  CsvTable t({"quantity", "value"});
  t.add("pf_cos_max_abs", pf_max);
  t.add("fitted_rho", decay.rho);
  t.add("fitted_kappa", decay.kappa);
  t.add("duality_defect_max", dual);
  files["ac4_transfer.csv"] = t.str();
  r.pass = pf_max < 1e-12 && decay.fitted && decay.rho <= 0.51 && dual <= 1e-6;
  r.detail = "max|P cos| = " + fmt(pf_max) + ", fitted rho = " + fmt(decay.rho) + ", duality defect = " + fmt(dual);
  return r;
}

CriterionResult ac5(std::uint64_t, DataFiles& files) {
  auto r = criterion(5, "diophantine exactness");
  const auto golden = IrrationalSpec::golden();
  const auto cf = cf_expand(golden, 30);
  const auto conv = convergents(cf.quotients);
  const auto fib = oracle::fibonacci_convergents(30);
  bool fib_ok = conv.size() == fib.size();
  bool det_ok = true;
  for (std::size_t k = 0; k < conv.size() && k < fib.size(); ++k) {
    fib_ok = fib_ok && conv[k].p == fib[k].first && conv[k].q == fib[k].second;
    if (k >= 1) {
      const BigInt d = conv[k].p * conv[k - 1].q - conv[k - 1].p * conv[k].q;
      det_ok = det_ok && (d == 1 || d == -1);
    }
  }
  files["ac5_convergents.csv"] = convergent_table(conv, golden).str();
  const auto audit = badly_approximable_audit(golden, 0.1, 100000);
  files["ac5_audit.csv"] = audit.to_csv().str();
  const auto beyond = audit.violations_beyond(1);
  r.pass = fib_ok && det_ok && beyond.empty();
  std::ostringstream os;
  os << "Fibonacci convergents " << (fib_ok ? "match" : "MISMATCH") << ", determinant identity "
     << (det_ok ? "holds" : "FAILS") << "; audit beyond k = 1: " << beyond.size() << " violation(s)";
  if (!beyond.empty()) os << " (largest k = " << beyond.back().first << ")";
  r.detail = os.str();
  return r;
}

CriterionResult ac6(std::uint64_t, DataFiles& files) {
  auto r = criterion(6, "condition-checker coherence");
  std::vector<ProcessModel> models;
  models.push_back(make_iid(IidLaw::rademacher()));
  models.push_back(make_alternating_plus_iid(IidLaw::rademacher()));
  models.push_back(make_iterated_function(IteratedFunctionSpec{}));
  models.push_back(doubling_cos());
  {
    ExpandingMapSpec s;
    s.map = ExpandingMapSpec::Map::integer_beta;
    s.beta = 3;
    s.observable = "identity";
    models.push_back(make_expanding_map(s));
    s.map = ExpandingMapSpec::Map::full_branch;
    s.breakpoints = {0.0, 0.4, 1.0};
    models.push_back(make_expanding_map(s));
    s.map = ExpandingMapSpec::Map::gauss;
    s.breakpoints.clear();
    models.push_back(make_expanding_map(s));
  }
  models.push_back(circle_cos());
  models.push_back(make_counterexample_chain(CounterexampleChainSpec{}));

  CsvTable t({"model", "bis", "mw"});
  bool coherent = true;
  for (const auto& m : models) {
    const auto bis = check_bis(m, 1000);
    const auto mw = check_mw(m, 1000);
    t.add(m.name, to_string(bis.verdict), to_string(mw.verdict));
    if (bis.verdict == Verdict::converging && mw.verdict != Verdict::converging) coherent = false;
  }
  files["ac6_coherence.csv"] = t.str();

  CsvTable c({"gamma", "verdict", "estimate"});
  bool split = true;
  std::ostringstream os;
  for (double gamma : {0.3, 0.5, 0.6, 0.75, 1.0}) {
    const auto rep = check_class_L(Modulus::log_power(1.0, gamma));
    c.add(gamma, to_string(rep.verdict), rep.estimate);
    const Verdict want = gamma > 0.5 ? Verdict::converging : Verdict::diverging;
    if (rep.verdict != want) split = false;
    os << gamma << ":" << to_string(rep.verdict) << " ";
  }
  files["ac6_class_L.csv"] = c.str();
  r.pass = coherent && split;
  r.detail = std::string("bis => mw ") + (coherent ? "holds" : "FAILS") + " on " + std::to_string(models.size()) +
             " kernel models; class L: " + os.str();
  return r;
}

CriterionResult ac7(std::uint64_t seed, DataFiles& files) {
  auto r = criterion(7, "rate-function algebra");
  RngStream rng(seed, stream_index(7, 0));
  double worst_h = 0.0, worst_r = 0.0, worst_e = 0.0;
  CsvTable t({"path", "pieces", "sigma2", "alpha", "rate", "homogeneity_err", "refinement_err", "endpoint_err"});
  for (int i = 0; i < 50; ++i) {
    const int pieces = 1 + static_cast<int>(rng.uniform() * 9.0);
    std::vector<double> cuts;
    for (int k = 1; k < pieces; ++k) cuts.push_back(rng.uniform_open());
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> tt{0.0}, hh{0.0};
    for (double c : cuts)
      if (c > tt.back() + 1e-6 && c < 1.0 - 1e-6) tt.push_back(c);
    tt.push_back(1.0);
    for (std::size_t k = 1; k < tt.size(); ++k) hh.push_back(4.0 * rng.uniform() - 2.0);
    const PiecewiseLinearPath h(tt, hh);
    const double s2 = 0.25 + 2.0 * rng.uniform();
    const double alpha = 0.1 + 3.0 * rng.uniform();
    const double base = rate_I(h, s2);
    const double eh = rel_diff(rate_I(h.scaled(alpha), s2), alpha * alpha * base);
    std::vector<double> extra;
    for (int k = 0; k < 5; ++k) extra.push_back(rng.uniform_open());
    const double er = rel_diff(rate_I(h.refined(extra), s2), base);
    const double x = 4.0 * rng.uniform() - 2.0;
    const double ee = rel_diff(rate_I(PiecewiseLinearPath::linear(x), s2), endpoint_rate(x, s2));
    worst_h = std::max(worst_h, eh);
    worst_r = std::max(worst_r, er);
    worst_e = std::max(worst_e, ee);
    t.add(i, h.pieces(), s2, alpha, base, eh, er, ee);
  }
  files["ac7_rate.csv"] = t.str();
  r.pass = worst_h <= 1e-12 && worst_r <= 1e-12 && worst_e <= 1e-12;
  r.detail = "max rel errors: homogeneity " + fmt(worst_h) + ", refinement " + fmt(worst_r) + ", endpoint " +
             fmt(worst_e);
  return r;
}

CriterionResult ac8(std::uint64_t seed, DataFiles& files) {
  auto r = criterion(8, "block martingale decomposition");
  const auto model = circle_cos();
  RngStream rng(seed, stream_index(8, 0));
  const Path path = model.sample(4096, rng);
  const auto d = block_martingale_decompose(model, path, 8);
  CsvTable t({"m", "blocks", "max_increment_conditional_mean", "reconstruction_error", "residual_sup",
              "residual_bound", "verified"});
  t.add(d.m, d.blocks, d.max_increment_conditional_mean, d.reconstruction_error, d.residual_sup, d.residual_bound,
        d.verified);
  files["ac8_decomposition.csv"] = t.str();
  r.pass = d.max_increment_conditional_mean < 1e-10 && d.reconstruction_error <= 1e-12;
  r.detail = "max |E(D | past)| = " + fmt(d.max_increment_conditional_mean) + ", reconstruction error = " +
             fmt(d.reconstruction_error);
  return r;
}

using Criterion = CriterionResult (*)(std::uint64_t, DataFiles&);
constexpr Criterion kCriteria[] = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8};

}  // namespace

std::vector<CriterionResult> run_acceptance_criteria(std::uint64_t seed, DataFiles& files,
                                                     const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (Criterion c : kCriteria) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = c(seed, files);
    } catch (const std::exception& e) {
      r.id = static_cast<int>(out.size()) + 1;
      r.title = "criterion " + std::to_string(r.id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, DataFiles& files,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  auto out = run_acceptance_criteria(seed, files, on_result);
  const auto start = std::chrono::steady_clock::now();
  DataFiles second;
  run_acceptance_criteria(seed, second);
  auto r = criterion(9, "reproducibility");
  std::vector<std::string> differing;
  for (const auto& [name, content] : files) {
    auto it = second.find(name);
    if (it == second.end() || it->second != content) differing.push_back(name);
  }
  if (second.size() != files.size()) differing.push_back("(file set differs)");
  r.pass = differing.empty();
  r.detail = std::to_string(files.size()) + " data files compared, " + std::to_string(differing.size()) + " differ";
  for (const auto& d : differing) r.detail += " " + d;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (on_result) on_result(r);
  out.push_back(r);
  return out;
}

DataFiles run_demo(std::uint64_t seed, std::ostream& out) {
  DataFiles files;
  const auto model = make_counterexample_chain(CounterexampleChainSpec{});
  const double s2 = model.meta("sigma2").value_or(1.0);
  auto rep = mdp_scan(model, SpeedSequence::power(1.0 / 3.0), {64, 256, 1024}, {0.5}, s2, MdpMethod::naive, 20000,
                      seed, 90);
  rep.label = "expected non-convergence";
  files["demo_counterexample_mdp.csv"] = rep.to_csv().str();
  files["demo_counterexample_mdp.json"] = rep.to_json();
  out << "demo: counterexample chain MDP scan [" << rep.label << "]\n" << rep.to_csv().str();
  return files;
}

std::string format_criterion(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << r.id << " [" << (r.pass ? "PASS" : "FAIL") << "] " << r.title << ": " << r.detail << " ("
     << std::fixed << std::setprecision(1) << r.seconds << " s)";
  return os.str();
}

void write_data_files(const std::filesystem::path& dir, const DataFiles& files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files) {
    std::ofstream o(dir / name, std::ios::binary | std::ios::trunc);
    if (!o) throw std::runtime_error("cannot write " + (dir / name).string());
    o << content;
  }
}

int run_suite(const std::string& name, const std::filesystem::path& output_dir, std::ostream& out, std::ostream& err) {
  if (name == "acceptance") {
    DataFiles files;
    const auto results = run_acceptance(kAcceptanceSeed, files, [&](const CriterionResult& r) {
      out << format_criterion(r) << "\n" << std::flush;
    });
    write_data_files(output_dir, files);
    std::vector<int> failed;
    for (const auto& r : results)
      if (!r.pass) failed.push_back(r.id);
    if (failed.empty()) {
      out << "acceptance: all criteria pass\n";
      return 0;
    }
    err << "acceptance: failing criteria:";
    for (int id : failed) err << " " << id;
    err << "\n";
    return 1;
  }
  if (name == "demo") {
    write_data_files(output_dir, run_demo(kAcceptanceSeed, out));
    return 0;
  }
  err << "unknown suite '" << name << "' (acceptance, demo)\n";
  return 2;
}

}  // namespace mdlab
