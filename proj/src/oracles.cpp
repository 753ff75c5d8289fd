#include "mdlab/oracles.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/binomial.hpp>

namespace mdlab::oracle {

std::vector<std::pair<BigInt, BigInt>> fibonacci_convergents(int k_max) {
  std::vector<BigInt> F{0, 1};
  while (static_cast<int>(F.size()) < k_max + 2) F.push_back(F[F.size() - 1] + F[F.size() - 2]);
  std::vector<std::pair<BigInt, BigInt>> out;
  for (int k = 0; k <= k_max; ++k) out.emplace_back(F[k], F[k + 1]);
  return out;
}

double circle_covariance_sum(double a, int lags, double amplitude) {
  double total = 0.0;
  for (int k = 0; k <= lags; ++k) {
    double g = 0.0;
    for (int j = 0; j <= k; ++j) {
      const double logp = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) - k * std::log(2.0);
      g += std::exp(logp) * std::cos(2.0 * std::numbers::pi * a * (2.0 * j - k));
    }
    g *= 0.5 * amplitude * amplitude;
    total += (k == 0 ? 1.0 : 2.0) * g;
  }
  return total;
}

double binomial_tail_log(long n, double t) {
  const double k0 = std::ceil((static_cast<double>(n) + t) / 2.0 - 1e-9);
  if (k0 <= 0) return 0.0;
  if (k0 > static_cast<double>(n)) return -INFINITY;
  boost::math::binomial_distribution<double> b(static_cast<double>(n), 0.5);
  return std::log(boost::math::cdf(boost::math::complement(b, k0 - 1.0)));
}

double rademacher_saddlepoint_log(long n, double t) {
  const double nn = static_cast<double>(n);
  // Second continuity correction: half a span below the first lattice point >= t.
  const double k0 = nn + 2.0 * std::ceil((t - nn) / 2.0 - 1e-9);
  const double s = k0 - 1.0;
  const double theta = std::atanh(s / nn);
  const double K = nn * std::log(std::cosh(theta));
  const double K2 = nn / (std::cosh(theta) * std::cosh(theta));
  const double w = std::copysign(std::sqrt(2.0 * (theta * s - K)), theta);
  const double u = std::sinh(theta) * std::sqrt(K2);
  const double log_phi = -0.5 * w * w - 0.5 * std::log(2.0 * std::numbers::pi);
  double log_q;
  if (w < 30.0) {
    log_q = std::log(0.5 * std::erfc(w / std::numbers::sqrt2));
  } else {
    log_q = log_phi - std::log(w) + std::log1p(-1.0 / (w * w) + 3.0 / std::pow(w, 4));
  }
  const double ratio = std::exp(log_phi - log_q);
  return log_q + std::log1p(ratio * (1.0 / u - 1.0 / w));
}

double chain_covariance_sum(const std::vector<std::vector<double>>& P, const std::vector<double>& pi,
                            const std::vector<double>& f, int lags) {
  const std::size_t S = pi.size();
  double mean = 0.0;
  for (std::size_t x = 0; x < S; ++x) mean += pi[x] * f[x];
  std::vector<double> g(S), h(S);
  for (std::size_t x = 0; x < S; ++x) g[x] = h[x] = f[x] - mean;
  double total = 0.0;
  for (int k = 0; k <= lags; ++k) {
    double gamma = 0.0;
    for (std::size_t x = 0; x < S; ++x) gamma += pi[x] * g[x] * h[x];
    total += (k == 0 ? 1.0 : 2.0) * gamma;
    std::vector<double> next(S, 0.0);
    for (std::size_t x = 0; x < S; ++x)
      for (std::size_t y = 0; y < S; ++y) next[x] += P[x][y] * h[y];
    h = std::move(next);
  }
  return total;
}

}  // namespace mdlab::oracle
