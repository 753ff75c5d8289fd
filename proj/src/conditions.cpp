#include "mdlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mdlab/transfer.hpp"

namespace mdlab {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

const KernelModel& require_kernel(const ProcessModel& model, const char* what) {
  if (!model.kernel)
    throw UnsupportedError(std::string(what) + " needs a kernel model; '" + model.name + "' has none");
  return *model.kernel;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double m = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - m) * (ry[i] - m);
    sxx += (rx[i] - m) * (rx[i] - m);
    syy += (ry[i] - m) * (ry[i] - m);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Centered nodal values with the quadrature mean removed.
std::vector<double> centered_nodes(const KernelModel& km) {
  std::vector<double> g = km.centered_at_nodes();
  const double mu = km.kernel->integrate(g);
  for (double& v : g) v -= mu;
  return g;
}

double noise_floor(std::span<const double> g) { return 1e-14 * std::max(1.0, max_abs(g)); }

}  // namespace

Sequence sequence_from(std::vector<double> values, long first_index) {
  return [values = std::move(values), first_index](long i) {
    const long k = i - first_index;
    if (k < 0 || static_cast<std::size_t>(k) >= values.size()) return 0.0;
    return values[static_cast<std::size_t>(k)];
  };
}

std::vector<double> kernel_conditional_mean_norms(const KernelModel& km, int N_max) {
  if (N_max < 1) throw DomainError("N_max must be >= 1");
  const MarkovKernel& K = *km.kernel;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(N_max));
  const auto nodes = K.nodes();
  if (km.exact_conditional_sum) {
    const double floor = noise_floor(centered_nodes(km));
    std::vector<double> prev(nodes.size(), 0.0), cur(nodes.size());
    for (int n = 1; n <= N_max; ++n) {
      double m = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        cur[i] = km.exact_conditional_sum(nodes[i], n);
        m = std::max(m, std::abs(cur[i] - prev[i]));
      }
      std::swap(prev, cur);
      out.push_back(m < floor ? 0.0 : m);
    }
    return out;
  }
  std::vector<double> g = centered_nodes(km);
  const double floor = noise_floor(g);
  bool settled = false;
  for (int n = 1; n <= N_max; ++n) {
    if (!settled) {
      g = K.apply(g);
      // Remove the constant drift left by the discretization.
      const double mu = K.integrate(g);
      for (double& v : g) v -= mu;
      if (max_abs(g) < floor) settled = true;
    }
    out.push_back(settled ? 0.0 : max_abs(g));
  }
  return out;
}

std::vector<double> kernel_conditional_sum_norms(const KernelModel& km, int N_max) {
  if (N_max < 1) throw DomainError("N_max must be >= 1");
  const MarkovKernel& K = *km.kernel;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(N_max));
  const auto nodes = K.nodes();
  if (km.exact_conditional_sum) {
    const double floor = noise_floor(centered_nodes(km));
    for (int n = 1; n <= N_max; ++n) {
      double m = 0.0;
      for (double y : nodes) m = std::max(m, std::abs(km.exact_conditional_sum(y, n)));
      out.push_back(m < floor ? 0.0 : m);
    }
    return out;
  }
  std::vector<double> g = centered_nodes(km);
  const double floor = noise_floor(g);
  std::vector<double> acc(g.size(), 0.0);
  bool settled = false;
  for (int n = 1; n <= N_max; ++n) {
    if (!settled) {
      g = K.apply(g);
      const double mu = K.integrate(g);
      for (double& v : g) v -= mu;
      if (max_abs(g) < floor) {
        settled = true;
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
      }
    }
    const double m = max_abs(acc);
    out.push_back(m < floor ? 0.0 : m);
  }
  return out;
}

SeriesDiagnostic check_mw(const ProcessModel& model, int N_max) {
  const KernelModel& km = require_kernel(model, "check_mw");
  const std::vector<double> norms = kernel_conditional_sum_norms(km, N_max);
  std::vector<double> terms(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) terms[i] = norms[i] * std::pow(static_cast<double>(i + 1), -1.5);
  SeriesDiagnostic d = diagnose_series(terms, 1);
  d.aux.emplace_back("cond_sum_norm", norms);

  std::vector<double> f2 = centered_nodes(km);
  for (double& v : f2) v *= v;
  const double sq = std::sqrt(max_abs(km.kernel->apply(f2)));
  std::vector<double> dyadic;  // 2^(-j/2) ||E(S_{2^j}|F_0)||
  for (long p = 1, j = 0; p <= N_max; p *= 2, ++j)
    dyadic.push_back(std::pow(2.0, -0.5 * static_cast<double>(j)) * norms[static_cast<std::size_t>(p - 1)]);
  double tail = 0.0;
  std::vector<double> tilde(dyadic.size());
  for (std::size_t r = dyadic.size(); r-- > 0;) {
    tail += dyadic[r];
    tilde[r] = tail;
  }
  d.scalars.emplace_back("delta_inf", sq + (tilde.empty() ? 0.0 : tilde[0]));
  for (std::size_t r = 0; r < tilde.size(); ++r) d.scalars.emplace_back("delta_tilde_" + std::to_string(r), tilde[r]);
  return d;
}

SeriesDiagnostic check_bis(const ProcessModel& model, int N_max) {
  if (N_max < 1) throw DomainError("N_max must be >= 1");
  std::vector<double> norms;
  std::string source;
  if (model.kernel) {
    norms = kernel_conditional_mean_norms(*model.kernel, N_max);
    source = "kernel";
  } else if (model.conditional_mean_bound) {
    for (int n = 1; n <= N_max; ++n) norms.push_back(model.conditional_mean_bound(static_cast<std::size_t>(n)));
    source = "closed-form bound";
  } else {
    throw UnsupportedError("check_bis: '" + model.name + "' has neither a kernel nor a conditional mean bound");
  }
  std::vector<double> terms(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) terms[i] = norms[i] / std::sqrt(static_cast<double>(i + 1));
  SeriesDiagnostic d = diagnose_series(terms, 1);
  d.aux.emplace_back("cond_mean_norm", norms);
  if (d.note.empty()) d.note = "norms from " + source;
  return d;
}

CsvTable S2infReport::to_csv() const {
  CsvTable t({"n", "deviation"});
  for (std::size_t i = 0; i < ns.size(); ++i) t.add(ns[i], deviations[i]);
  return t;
}

S2infReport check_s2inf(const ProcessModel& model, double sigma2, const std::vector<int>& ns) {
  const KernelModel& km = require_kernel(model, "check_s2inf");
  if (ns.size() < 2) throw DomainError("check_s2inf needs at least two values of n");
  S2infReport r;
  r.ns = ns;
  r.deviations = conditional_square_norms(*km.kernel, km.centered_at_nodes(), ns, sigma2);
  std::vector<double> x(ns.begin(), ns.end());
  r.spearman = spearman(x, r.deviations);
  const bool flat = std::all_of(r.deviations.begin(), r.deviations.end(), [](double v) { return v <= 1e-12; });
  r.pass = flat || r.spearman < 0.0;
  return r;
}

CsvTable MixReport::to_csv() const {
  CsvTable t({"i", "j", "n", "deviation"});
  for (const auto& row : rows) t.add(row.i, row.j, row.n, row.deviation);
  return t;
}

std::vector<std::pair<int, int>> default_mix_pairs() {
  std::vector<std::pair<int, int>> p;
  for (int i = 1; i <= 8; ++i)
    for (int j = i; j <= 8; ++j) p.emplace_back(i, j);
  return p;
}

MixReport check_mix(const ProcessModel& model, const std::vector<std::pair<int, int>>& pairs,
                    const std::vector<int>& ns) {
  const KernelModel& km = require_kernel(model, "check_mix");
  if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()) || ns.front() < 0)
    throw DomainError("check_mix needs an ascending list of n >= 0");
  const MarkovKernel& K = *km.kernel;
  const std::vector<double> f = km.centered_at_nodes();
  MixReport r;
  r.pass = true;
  for (auto [i, j] : pairs) {
    if (j < i) std::swap(i, j);
    const std::vector<double> h = pair_moment(K, f, i, j);
    const double floor = noise_floor(h);
    const std::vector<double> sn = sup_norms(K, h, ns.back());
    std::vector<double> x, dev;
    for (int n : ns) {
      const double v = sn[static_cast<std::size_t>(n)];
      r.rows.push_back({i, j, n, v < floor ? 0.0 : v});
      x.push_back(n);
      dev.push_back(r.rows.back().deviation);
    }
    const bool flat = std::all_of(dev.begin(), dev.end(), [](double v) { return v <= 1e-12; });
    if (!flat && !(spearman(x, dev) < 0.0)) r.pass = false;
  }
  return r;
}

SeriesDiagnostic check_projcond_bound(const Sequence& delta, const Sequence& phi, int N_max, bool two_sided) {
  if (N_max < 1) throw DomainError("N_max must be >= 1");
  const long k_max = 4L * N_max;
  std::vector<double> phis(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (long k = 1; k <= k_max; ++k) {
    phis[static_cast<std::size_t>(k)] = phi(k);
    if (phis[static_cast<std::size_t>(k)] < 0.0) throw DomainError("phi must be nonnegative");
  }
  auto D = [&](long i) {
    if (i < 0 && !two_sided) return 0.0;
    const double v = delta(i);
    if (v < 0.0) throw DomainError("Delta must be nonnegative");
    return v;
  };
  std::vector<double> terms, direct, mixed;
  for (long n = 0; n <= N_max; ++n) {
    double a = 0.0, b = 0.0;
    std::vector<long> is{n};
    if (n > 0 && two_sided) is.push_back(-n);
    for (long i : is) {
      a += 2.0 * D(i);
      for (long k = 1; k <= k_max; ++k) b += 2.0 * D(i - k) * phis[static_cast<std::size_t>(k)];
    }
    direct.push_back(a);
    mixed.push_back(b);
    terms.push_back(a + b);
  }
  SeriesDiagnostic d = diagnose_series(terms, 0);
  d.aux.emplace_back("delta_part", direct);
  d.aux.emplace_back("mixing_part", mixed);
  return d;
}

SeriesDiagnostic check_projcond_bound(const LinearProcessSpec& spec, const Sequence& phi, int N_max) {
  const auto [a, b] = innovation_range(spec);
  const double width = b - a;
  const Modulus w = spec.observable.modulus();
  const int lag = spec.lag_window;
  const double wl = 1.0 / static_cast<double>(lag + 1);
  const CoefficientSpec cs = spec.coefficients;
  Sequence delta = [=](long i) {
    double s = 0.0;
    for (int l = 0; l <= lag; ++l) s += wl * w(2.0 * width * std::abs(cs.coefficient(i - l)));
    return s;
  };
  return check_projcond_bound(delta, phi, N_max, true);
}

Sequence innovation_phi(const LinearProcessSpec& spec, int n_max) {
  if (std::holds_alternative<IidLaw>(spec.innovation)) return [](long k) { return k == 0 ? 1.0 : 0.0; };
  const auto& ch = std::get<ChainInnovation>(spec.innovation);
  const std::vector<double> pi = ch.stationary();
  std::vector<double> v = phi_coefficients(ch.P, pi, n_max);
  v.insert(v.begin(), 1.0 - *std::min_element(pi.begin(), pi.end()));
  return [v = std::move(v)](long k) {
    if (k < 0) throw DomainError("phi index must be >= 0");
    if (static_cast<std::size_t>(k) < v.size()) return v[static_cast<std::size_t>(k)];
    if (v.back() < 1e-15) return 0.0;
    throw DomainError("phi requested beyond the computed range " + std::to_string(v.size() - 1));
  };
}

MixRPhiReport check_mixrphi(const Sequence& R, const Sequence& phi, int N_max) {
  if (N_max < 1) throw DomainError("N_max must be >= 1");
  const long m_max = 4L * N_max;
  std::vector<double> phis(static_cast<std::size_t>(m_max) + 1);
  for (long m = 0; m <= m_max; ++m) phis[static_cast<std::size_t>(m)] = phi(m);
  std::vector<double> rs(static_cast<std::size_t>(N_max) + 1);
  for (long l = 1; l <= N_max; ++l) rs[static_cast<std::size_t>(l)] = R(l);
  for (double v : phis)
    if (v < 0.0) throw DomainError("phi must be nonnegative");
  for (long l = 1; l <= N_max; ++l) {
    if (rs[l] < 0.0) throw DomainError("R must be nonnegative");
    if (l > 1 && rs[l] > rs[l - 1] * (1.0 + 1e-12) + 1e-300) throw DomainError("R must be nonincreasing");
  }

  MixRPhiReport r;
  std::vector<double> terms, rw, rsum, pw, psum;
  for (long l = 1; l <= N_max; ++l) {
    double s = 0.0;
    if (rs[l] > 0.0)
      for (long m = 0; m <= m_max; ++m) s += phis[m] / std::sqrt(static_cast<double>(l + m));
    terms.push_back(rs[l] * s);
    const double w = 1.0 / std::sqrt(static_cast<double>(l));
    rw.push_back(w * rs[l]);
    rsum.push_back(rs[l]);
    pw.push_back(w * phis[l]);
    psum.push_back(phis[l]);
  }
  r.main = diagnose_series(terms, 1);
  r.phi_sum = diagnose_series(psum, 1);
  r.r_weighted = diagnose_series(rw, 1);
  r.r_sum = diagnose_series(rsum, 1);
  r.phi_weighted = diagnose_series(pw, 1);
  r.item1 = r.phi_sum.verdict == Verdict::converging && r.r_weighted.verdict == Verdict::converging;
  r.item2 = r.r_sum.verdict == Verdict::converging && r.phi_weighted.verdict == Verdict::converging;
  return r;
}

SeriesDiagnostic check_modulus_condition(const std::vector<Modulus>& w, const Sequence& c, double width, int N_max,
                                         bool two_sided) {
  if (N_max < 1) throw DomainError("N_max must be >= 1");
  if (!(width > 0.0)) throw DomainError("innovation width must be positive");
  if (w.empty()) throw DomainError("at least one modulus is required");
  std::vector<double> terms;
  for (long n = 0; n <= N_max; ++n) {
    double s = 0.0;
    std::vector<long> is{n};
    if (n > 0 && two_sided) is.push_back(-n);
    for (long i : is) {
      const double h = 2.0 * width * std::abs(c(i));
      for (const auto& wl : w) s += wl(h);
    }
    terms.push_back(s);
  }
  return diagnose_series(terms, 0);
}

SeriesDiagnostic check_modulus_condition(const LinearProcessSpec& spec, int N_max) {
  const auto [a, b] = innovation_range(spec);
  const Modulus base = spec.observable.modulus();
  const double wl = 1.0 / static_cast<double>(spec.lag_window + 1);
  std::vector<Modulus> w(static_cast<std::size_t>(spec.lag_window + 1),
                         Modulus{base.name, [base, wl](double h) { return wl * base(h); }});
  const CoefficientSpec cs = spec.coefficients;
  return check_modulus_condition(w, [cs](long i) { return cs.coefficient(i); }, b - a, N_max, cs.two_sided);
}

IntegralReport class_L_integral(const Modulus& c, int blocks) {
  if (blocks < 16) throw DomainError("need at least 16 dyadic blocks");
  using boost::math::quadrature::gauss_kronrod;
  const double ln2 = std::log(2.0);
  std::vector<double> b;
  b.reserve(static_cast<std::size_t>(blocks));
  // Block j: t in [2^-(j+1), 2^-j], integrated in s = -log t.
  for (int j = 1; j <= blocks; ++j) {
    auto g = [&](double s) { return c(std::exp(-s)) / std::sqrt(s); };
    const double v = gauss_kronrod<double, 31>::integrate(g, j * ln2, (j + 1) * ln2, 5, 1e-12);
    if (!std::isfinite(v) || v < 0.0) throw DomainError("modulus produced a negative or non-finite integrand");
    b.push_back(v);
  }
  IntegralReport r;
  r.blocks = diagnose_series(b, 1);
  r.verdict = r.blocks.verdict;
  r.estimate = r.blocks.total() + (r.verdict == Verdict::converging ? r.blocks.tail_estimate : 0.0);
  return r;
}

IntegralReport check_class_L(const Modulus& c) {
  if (!is_concave_on(c, 0.0, 0.5, 100))
    throw DomainError("modulus '" + c.name + "' rejected: concavity or monotonicity spot check failed on (0, 1/2]");
  return class_L_integral(c);
}

KacReport check_kac(const Modulus& w, const Sequence& tail, double width, int N_max) {
  if (N_max < 1) throw DomainError("N_max must be >= 1");
  if (!(width > 0.0)) throw DomainError("innovation width must be positive");
  std::vector<double> terms;
  for (long n = 1; n <= N_max; ++n) {
    const double t = tail(n);
    if (t < 0.0) throw DomainError("coefficient tail must be nonnegative");
    terms.push_back(w(2.0 * width * t) / std::sqrt(static_cast<double>(n)));
  }
  KacReport r;
  r.series = diagnose_series(terms, 1);
  r.integral = class_L_integral(w);
  return r;
}

std::vector<double> phi_coefficients(const std::vector<std::vector<double>>& P, const std::vector<double>& pi,
                                     int n_max) {
  const std::size_t S = P.size();
  if (S == 0 || pi.size() != S) throw DomainError("transition matrix and stationary law sizes differ");
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  Eigen::MatrixXd M(S, S);
  for (std::size_t i = 0; i < S; ++i) {
    if (P[i].size() != S) throw DomainError("transition matrix is not square");
    double row = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
      if (P[i][j] < 0.0) throw DomainError("transition matrix has a negative entry");
      M(i, j) = P[i][j];
      row += P[i][j];
    }
    if (std::abs(row - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "transition matrix row " << i << " sums to " << row << ", not 1";
      throw DomainError(os.str());
    }
  }
  Eigen::VectorXd p(S);
  for (std::size_t i = 0; i < S; ++i) p(i) = pi[i];
  if (std::abs(p.sum() - 1.0) > 1e-12 || p.minCoeff() < 0.0) throw DomainError("pi is not a probability vector");
  if ((M.transpose() * p - p).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("pi is not stationary for P");

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max));
  Eigen::MatrixXd Q = M;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) Q = Q * M;
    double best = 0.0;
    for (std::size_t x = 0; x < S; ++x) {
      double s = 0.0;
      for (std::size_t b = 0; b < S; ++b) s += std::max(0.0, Q(x, b) - p(b));
      best = std::max(best, s);
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace mdlab
