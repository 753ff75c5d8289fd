#include "mdlab/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mdlab {

namespace {

void finalize(SigmaEstimate& e) {
  e.raw = e.value;
  if (e.value < 0.0) {
    std::ostringstream os;
    os << "negative estimate " << e.value << " clamped to 0";
    if (e.se > 0.0 && e.value < -3.0 * e.se) os << " (more than 3 standard errors below 0)";
    e.warnings.push_back(os.str());
    e.value = 0.0;
    e.clamped = true;
  }
}

double jackknife_se(const std::vector<double>& loo) {
  const double G = static_cast<double>(loo.size());
  if (loo.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= G;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt((G - 1.0) / G * ss);
}

}  // namespace

CsvTable SigmaEstimate::summary_csv() const {
  CsvTable t({"method", "value", "se", "raw", "clamped"});
  t.add(method, value, se, raw, clamped);
  return t;
}

CsvTable SigmaEstimate::detail_csv() const {
  CsvTable t(detail_header);
  for (const auto& r : detail) {
    std::vector<std::string> cells;
    for (double v : r) cells.push_back(format_double(v));
    t.row(cells);
  }
  return t;
}

SigmaEstimate sigma2_covariance_series(std::span<const Path> paths, int K_max) {
  if (K_max < 0) throw DomainError("K_max must be >= 0");
  std::size_t total = 0;
  double sum = 0.0;
  for (const auto& p : paths) {
    total += p.size();
    for (double v : p.values()) sum += v;
  }
  if (paths.empty() || total < 100 * static_cast<std::size_t>(std::max(K_max, 1))) {
    std::ostringstream os;
    os << "covariance series refused: " << total << " samples < 100 * K_max = " << 100 * std::max(K_max, 1);
    throw DomainError(os.str());
  }
  const double mean = sum / static_cast<double>(total);
  const std::size_t K = static_cast<std::size_t>(K_max);

  // Groups for the jackknife: whole paths, or contiguous segments when there are few paths.
  struct Group {
    std::size_t path, lo, hi;
  };
  std::vector<Group> groups;
  if (paths.size() >= 10) {
    for (std::size_t p = 0; p < paths.size(); ++p) groups.push_back({p, 0, paths[p].size()});
  } else {
    const std::size_t per = (20 + paths.size() - 1) / paths.size();
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const std::size_t n = paths[p].size();
      for (std::size_t s = 0; s < per; ++s) groups.push_back({p, n * s / per, n * (s + 1) / per});
    }
  }
  const std::size_t G = groups.size();
  std::vector<std::vector<double>> S(G, std::vector<double>(K + 1, 0.0));
  std::vector<std::vector<double>> C(G, std::vector<double>(K + 1, 0.0));
  parallel_for(G, [&](std::size_t g) {
    const auto x = paths[groups[g].path].values();
    const std::size_t n = x.size();
    for (std::size_t i = groups[g].lo; i < groups[g].hi; ++i) {
      const double xi = x[i] - mean;
      const std::size_t kk = std::min(K, n - 1 - i);
      for (std::size_t k = 0; k <= kk; ++k) S[g][k] += xi * (x[i + k] - mean);
      for (std::size_t k = 0; k <= kk; ++k) C[g][k] += 1.0;
    }
  });
  std::vector<double> St(K + 1, 0.0), Ct(K + 1, 0.0);
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t k = 0; k <= K; ++k) {
      St[k] += S[g][k];
      Ct[k] += C[g][k];
    }
  auto estimate = [&](const std::vector<double>& s, const std::vector<double>& c) {
    double v = s[0] / c[0];
    for (std::size_t k = 1; k <= K; ++k)
      if (c[k] > 0.0) v += 2.0 * s[k] / c[k];
    return v;
  };
  SigmaEstimate e;
  e.method = "covariance_series";
  e.value = estimate(St, Ct);
  std::vector<double> loo;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> s = St, c = Ct;
    for (std::size_t k = 0; k <= K; ++k) {
      s[k] -= S[g][k];
      c[k] -= C[g][k];
    }
    if (c[0] > 0.0) loo.push_back(estimate(s, c));
  }
  e.se = jackknife_se(loo);
  e.metadata = {{"K_max", static_cast<double>(K_max)},
                {"samples", static_cast<double>(total)},
                {"paths", static_cast<double>(paths.size())},
                {"jackknife_groups", static_cast<double>(G)}};
  e.detail_header = {"lag", "gamma"};
  for (std::size_t k = 0; k <= K; ++k) e.detail.push_back({static_cast<double>(k), St[k] / Ct[k]});
  finalize(e);
  return e;
}

SigmaEstimate sigma2_dyadic(std::span<const Path> paths, int j_max) {
  if (j_max < 0 || j_max > 40) throw DomainError("j_max must be in [0, 40]");
  if (paths.empty()) throw DomainError("dyadic estimator needs at least one path");
  const std::size_t need = std::size_t{1} << (j_max + 1);
  for (const auto& p : paths)
    if (p.size() < need) {
      std::ostringstream os;
      os << "dyadic estimator refused: path length " << p.size() << " < 2^(j_max+1) = " << need;
      throw DomainError(os.str());
    }
  auto mean_se = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{m, se};
  };

  SigmaEstimate e;
  e.method = "dyadic";
  e.detail_header = {"level", "blocks", "term", "se"};
  std::vector<double> sq;
  for (const auto& p : paths)
    for (double v : p.values()) sq.push_back(v * v);
  auto [m2, se2] = mean_se(sq);
  e.value = m2;
  double var = se2 * se2;
  e.detail.push_back({-1.0, static_cast<double>(sq.size()), m2, se2});
  for (int j = 0; j <= j_max; ++j) {
    const std::size_t half = std::size_t{1} << j;
    std::vector<double> prod;
    for (const auto& p : paths) {
      const auto x = p.values();
      for (std::size_t b = 0; (b + 1) * 2 * half <= x.size(); ++b) {
        double sa = 0.0, sb = 0.0;
        const std::size_t o = b * 2 * half;
        for (std::size_t i = 0; i < half; ++i) {
          sa += x[o + i];
          sb += x[o + half + i];
        }
        prod.push_back(sa * sb / static_cast<double>(half));
      }
    }
    auto [t, se] = mean_se(prod);
    e.value += t;
    var += se * se;
    e.detail.push_back({static_cast<double>(j), static_cast<double>(prod.size()), t, se});
  }
  e.se = std::sqrt(var);
  e.metadata = {{"j_max", static_cast<double>(j_max)}, {"paths", static_cast<double>(paths.size())}};
  finalize(e);
  return e;
}

SigmaEstimate sigma2_var_sn(std::span<const Path> paths, const std::vector<std::size_t>& ns) {
  if (paths.size() < 200) {
    std::ostringstream os;
    os << "var_sn refused: " << paths.size() << " replicas < 200";
    throw DomainError(os.str());
  }
  if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()) || ns.front() < 1)
    throw DomainError("var_sn needs an ascending list of n >= 1");
  for (const auto& p : paths)
    if (p.size() < ns.back()) throw DomainError("var_sn: a replica is shorter than the largest n");
  const double R = static_cast<double>(paths.size());
  SigmaEstimate e;
  e.method = "var_sn";
  e.detail_header = {"n", "var_sn_over_n", "se"};
  std::vector<double> xs, ys, ws;
  std::vector<double> S(paths.size(), 0.0);
  std::size_t done = 0;
  for (std::size_t n : ns) {
    for (std::size_t r = 0; r < paths.size(); ++r) {
      const auto x = paths[r].values();
      for (std::size_t i = done; i < n; ++i) S[r] += x[i];
    }
    done = n;
    double m = 0.0;
    for (double s : S) m += s;
    m /= R;
    double ss = 0.0;
    for (double s : S) ss += (s - m) * (s - m);
    const double v = ss / (R - 1.0) / static_cast<double>(n);
    const double se = v * std::sqrt(2.0 / (R - 1.0));
    e.detail.push_back({static_cast<double>(n), v, se});
    xs.push_back(1.0 / static_cast<double>(n));
    ys.push_back(v);
    ws.push_back(se > 0.0 ? 1.0 / (se * se) : 1.0);
  }
  if (xs.size() == 1) {
    e.value = ys[0];
    e.se = e.detail[0][2];
  } else {
    // Weighted least squares for v = sigma2 + c/n.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sw += ws[i];
      sx += ws[i] * xs[i];
      sy += ws[i] * ys[i];
      sxx += ws[i] * xs[i] * xs[i];
      sxy += ws[i] * xs[i] * ys[i];
    }
    const double det = sw * sxx - sx * sx;
    if (det <= 0.0) throw DomainError("var_sn: degenerate n grid");
    e.value = (sxx * sy - sx * sxy) / det;
    e.se = std::sqrt(sxx / det);
    e.metadata.emplace_back("slope_c", (sw * sxy - sx * sy) / det);
  }
  e.metadata.emplace_back("replicas", R);
  e.metadata.emplace_back("n_max", static_cast<double>(ns.back()));
  e.warnings.push_back("standard error ignores the correlation between nested partial sums");
  finalize(e);
  return e;
}

SigmaEstimate sigma2_circle_fourier(const FourierSpec& f, const IrrationalSpec& a, int K) {
  if (K < 1) throw DomainError("K must be >= 1");
  SigmaEstimate e;
  e.method = "fourier_closed_form";
  e.detail_header = {"k", "abs_fhat", "multiplier_ratio", "contribution"};
  const int top = std::min(K, f.support());
  for (int k = 1; k <= top; ++k) {
    const double m = f.magnitude[static_cast<std::size_t>(k - 1)];
    if (m == 0.0) continue;
    const DistanceValue d = dist_to_integers(k, a);
    if (d.exact_zero || d.value == 0.0) {
      std::ostringstream os;
      os << "d(" << k << "a, Z) = 0: the covariance series diverges for this mode";
      throw DomainError(os.str());
    }
    // (1 + cos 2 pi k a)/(1 - cos 2 pi k a) = cot^2(pi d(ka, Z)).
    const double t = 1.0 / std::tan(std::numbers::pi * d.value);
    const double c = 2.0 * m * m * t * t;
    e.value += c;
    e.detail.push_back({static_cast<double>(k), m, t * t, c});
  }
  e.metadata = {{"K", static_cast<double>(K)}, {"step", a.value()}};
  finalize(e);
  return e;
}

SigmaEstimate sigma2_circle_fourier(const TrigPolynomial& f, const IrrationalSpec& a) {
  return sigma2_circle_fourier(fourier_spec(f), a, std::max(1, f.degree()));
}

bool agree(const SigmaEstimate& a, const SigmaEstimate& b, double z, double floor) {
  return std::abs(a.value - b.value) <= z * std::hypot(a.se, b.se) + floor;
}

}  // namespace mdlab
