#include "mdlab/series.hpp"

#include <algorithm>
#include <cmath>

#include "mdlab/core.hpp"

namespace mdlab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("fit_line needs at least two matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  if (sxx == 0.0) throw DomainError("fit_line: degenerate abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converging: return "converging";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CsvTable SeriesDiagnostic::to_csv() const {
  std::vector<std::string> header{"index", "term", "partial_sum"};
  for (const auto& [name, col] : aux) header.push_back(name);
  CsvTable t(header);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    std::vector<std::string> row{std::to_string(first_index + i), format_double(terms[i]),
                                 format_double(partial[i])};
    for (const auto& [name, col] : aux) row.push_back(i < col.size() ? format_double(col[i]) : "");
    t.row(row);
  }
  return t;
}

SeriesDiagnostic diagnose_series(std::vector<double> terms, std::size_t first_index) {
  SeriesDiagnostic d;
  d.first_index = first_index;
  for (double& t : terms) {
    if (!std::isfinite(t)) throw DomainError("series term is not finite");
    if (t < 0.0) {
      if (t < -1e-12) throw DomainError("series terms must be nonnegative");
      t = 0.0;
    }
  }
  d.terms = std::move(terms);
  d.partial.resize(d.terms.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    acc += d.terms[i];
    d.partial[i] = acc;
  }
  const std::size_t N = d.terms.size();
  if (N == 0) {
    d.note = "empty series";
    return d;
  }

  // Running envelope from the right: nonincreasing and summable iff the terms are.
  std::vector<double> env(N);
  double m = 0.0;
  for (std::size_t i = N; i-- > 0;) {
    m = std::max(m, d.terms[i]);
    env[i] = m;
  }
  if (env[0] == 0.0) {
    d.fit_kind = "zero";
    d.verdict = Verdict::converging;
    d.increments_decreasing = true;
    return d;
  }
  const std::size_t last_nonzero = [&] {
    std::size_t k = N;
    while (k > 0 && d.terms[k - 1] == 0.0) --k;
    return k - 1;
  }();
  if (N >= 10 && last_nonzero < N - std::max<std::size_t>(1, N / 10)) {
    d.fit_kind = "finite";
    d.verdict = Verdict::converging;
    d.increments_decreasing = true;
    d.note = "terms vanish beyond index " + std::to_string(first_index + last_nonzero);
    return d;
  }
  if (N < 16) {
    d.note = "too few terms for a tail fit";
    return d;
  }

  std::size_t lo = N / 8;
  std::size_t hi = N - 1;
  std::vector<double> xs_p, xs_g, ys;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (env[i] <= 1e-300) continue;
    const double n = static_cast<double>(first_index + i);
    xs_p.push_back(std::log(n));
    xs_g.push_back(n);
    ys.push_back(std::log(env[i]));
  }
  if (ys.size() < 8) {
    d.note = "too few positive tail terms";
    return d;
  }
  const LineFit pf = fit_line(xs_p, ys);
  const LineFit gf = fit_line(xs_g, ys);
  d.increments_decreasing = env[lo] > env[hi] || env[lo] == env[hi];
  bool strictly = env[hi] < env[lo];
  const double nN = static_cast<double>(first_index + hi);
  if (gf.r2 > pf.r2 && gf.slope < 0.0) {
    d.fit_kind = "geometric";
    d.ratio = std::exp(gf.slope);
    d.r2 = gf.r2;
    if (d.r2 > kFitR2 && d.ratio < 1.0 && strictly) {
      d.verdict = Verdict::converging;
      d.tail_estimate = env[hi] * d.ratio / (1.0 - d.ratio);
    }
  } else {
    d.fit_kind = "power";
    d.exponent = pf.slope;
    d.r2 = pf.r2;
    if (d.r2 > kFitR2) {
      if (d.exponent < kDivergenceExponent && strictly) {
        d.verdict = Verdict::converging;
        d.tail_estimate = std::exp(pf.intercept) * std::pow(nN, d.exponent + 1.0) / (-d.exponent - 1.0);
      } else if (d.exponent >= kDivergenceExponent) {
        d.verdict = Verdict::diverging;
      }
    }
  }
  if (d.verdict == Verdict::inconclusive && d.note.empty())
    d.note = "tail fit not decisive (R2 = " + format_double(d.r2) + ")";
  return d;
}

}  // namespace mdlab
