#include "mdlab/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/integer/common_factor_rt.hpp>
#include <boost/multiprecision/integer.hpp>

#include "mdlab/core.hpp"

namespace mdlab {

namespace {

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

BigInt floor_rational(const BigRational& r) {
  return floor_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

BigInt mod_pos(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  if (r < 0) r += m;
  return r;
}

// Parses [-]digits[.digits][e[+-]digits] exactly into num / 10^scale.
std::pair<BigInt, BigInt> parse_decimal(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) neg = text[i++] == '-';
  BigInt num = 0;
  long long frac_digits = 0;
  bool any = false, dot = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      num = num * 10 + (c - '0');
      if (dot) ++frac_digits;
      any = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  long long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) eneg = text[i++] == '-';
    long long e = 0;
    bool edigits = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      e = e * 10 + (text[i] - '0');
      edigits = true;
      if (e > 100000) throw ConfigError("decimal exponent too large in '" + text + "'");
    }
    if (!edigits) throw ConfigError("malformed decimal literal '" + text + "'");
    exponent = eneg ? -e : e;
  }
  if (!any || i != text.size()) throw ConfigError("malformed decimal literal '" + text + "'");
  if (neg) num = -num;
  long long scale = frac_digits - exponent;
  BigInt den = 1;
  if (scale >= 0) {
    den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale));
  } else {
    num *= boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-scale));
  }
  return {num, den};
}

HighFloat to_high(const BigInt& n, const BigInt& d) { return HighFloat(n) / HighFloat(d); }

bool is_perfect_square(const BigInt& D) {
  if (D < 0) return false;
  const BigInt r = boost::multiprecision::sqrt(D);
  return r * r == D;
}

// x >= c for x = (P + sqrt D)/Q, exactly.
bool quad_ge(const BigInt& P, const BigInt& D, const BigInt& Q, const BigInt& c) {
  const BigInt m = c * Q - P;
  if (Q > 0) return m <= 0 || D >= m * m;
  return m >= 0 && D <= m * m;
}

BigInt quad_floor(const BigInt& P, const BigInt& D, const BigInt& Q) {
  const HighFloat x = (HighFloat(P) + boost::multiprecision::sqrt(HighFloat(D))) / HighFloat(Q);
  BigInt c = static_cast<BigInt>(boost::multiprecision::floor(x));
  while (!quad_ge(P, D, Q, c)) --c;
  while (quad_ge(P, D, Q, c + 1)) ++c;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

IrrationalSpec IrrationalSpec::quadratic(long long P, long long D, long long Q) {
  if (Q == 0) throw DomainError("quadratic irrational needs Q != 0");
  if (D <= 0) throw DomainError("quadratic irrational needs D > 0");
  IrrationalSpec s;
  s.kind_ = Kind::quadratic;
  s.P_ = P;
  s.D_ = D;
  s.Q_ = Q;
  if (is_perfect_square(s.D_)) throw DomainError("D = " + std::to_string(D) + " is a perfect square; value is rational");
  // Keep Q | D - P^2 so the periodic algorithm stays in the integers.
  if ((s.D_ - s.P_ * s.P_) % s.Q_ != 0) {
    const BigInt aq = boost::multiprecision::abs(s.Q_);
    s.P_ *= aq;
    s.D_ *= s.Q_ * s.Q_;
    s.Q_ *= aq;
  }
  return s;
}

IrrationalSpec IrrationalSpec::golden() { return quadratic(-1, 5, 2); }

IrrationalSpec IrrationalSpec::literal(const std::string& decimal, const std::string& radius) {
  IrrationalSpec s;
  s.kind_ = Kind::literal;
  auto [n, d] = parse_decimal(decimal);
  auto [rn, rd] = parse_decimal(radius);
  if (rn <= 0) throw DomainError("literal radius must be positive");
  s.num_ = n;
  s.den_ = d;
  s.center_ = BigRational(n, d);
  s.radius_ = BigRational(rn, rd);
  return s;
}

IrrationalSpec IrrationalSpec::rational(long long p, long long q) {
  if (q == 0) throw DomainError("rational needs q != 0");
  IrrationalSpec s;
  s.kind_ = Kind::rational;
  s.center_ = BigRational(p, q);
  s.num_ = boost::multiprecision::numerator(s.center_);
  s.den_ = boost::multiprecision::denominator(s.center_);
  s.radius_ = 0;
  return s;
}

HighFloat IrrationalSpec::value_hp() const {
  if (kind_ == Kind::quadratic)
    return (HighFloat(P_) + boost::multiprecision::sqrt(HighFloat(D_))) / HighFloat(Q_);
  return to_high(num_, den_);
}

double IrrationalSpec::value() const { return static_cast<double>(value_hp()); }

HighFloat IrrationalSpec::uncertainty() const {
  switch (kind_) {
    case Kind::quadratic: return HighFloat("1e-95") * std::max(HighFloat(1), boost::multiprecision::abs(value_hp()));
    case Kind::literal: return to_high(boost::multiprecision::numerator(radius_), boost::multiprecision::denominator(radius_));
    case Kind::rational: return HighFloat(0);
  }
  return HighFloat(0);
}

std::string IrrationalSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::quadratic: os << "(" << P_ << "+sqrt(" << D_ << "))/" << Q_; break;
    case Kind::literal: os << "literal " << value_hp().str(30) << " +- " << uncertainty().str(3); break;
    case Kind::rational: os << "rational " << num_ << "/" << den_; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

CfExpansion cf_expand(const IrrationalSpec& a, int K) {
  if (K < 0) throw DomainError("cf_expand: K must be >= 0");
  CfExpansion out;
  switch (a.kind()) {
    case IrrationalSpec::Kind::quadratic: {
      BigInt P = a.P(), D = a.D(), Q = a.Q();
      for (int k = 0; k <= K; ++k) {
        const BigInt c = quad_floor(P, D, Q);
        out.quotients.push_back(c);
        P = c * Q - P;
        Q = (D - P * P) / Q;
      }
      return out;
    }
    case IrrationalSpec::Kind::rational: {
      out.irrational = false;
      BigInt p = boost::multiprecision::numerator(a.center());
      BigInt q = boost::multiprecision::denominator(a.center());
      for (int k = 0; k <= K; ++k) {
        const BigInt c = floor_div(p, q);
        out.quotients.push_back(c);
        const BigInt r = p - c * q;
        if (r == 0) {
          out.terminated = true;
          break;
        }
        p = q;
        q = r;
      }
      return out;
    }
    case IrrationalSpec::Kind::literal: {
      BigRational lo = a.center() - a.radius();
      BigRational hi = a.center() + a.radius();
      for (int k = 0; k <= K; ++k) {
        const BigInt fl = floor_rational(lo), fh = floor_rational(hi);
        if (fl != fh)
          throw PrecisionError("cf_expand: depth limited, literal precision supports quotients only up to index " +
                               std::to_string(k - 1));
        out.quotients.push_back(fl);
        lo -= BigRational(fl);
        hi -= BigRational(fl);
        if (lo == 0)
          throw PrecisionError("cf_expand: depth limited, interval touches a rational at index " + std::to_string(k));
        BigRational nlo = 1 / hi, nhi = 1 / lo;
        lo = nlo;
        hi = nhi;
      }
      return out;
    }
  }
  return out;
}

std::vector<Convergent> convergents(const std::vector<BigInt>& quotients) {
  std::vector<Convergent> out;
  BigInt p2 = 0, p1 = 1, q2 = 1, q1 = 0;
  for (std::size_t k = 0; k < quotients.size(); ++k) {
    const BigInt p = quotients[k] * p1 + p2;
    const BigInt q = quotients[k] * q1 + q2;
    out.push_back({static_cast<int>(k), p, q});
    p2 = p1;
    p1 = p;
    q2 = q1;
    q1 = q;
  }
  return out;
}

ConvergentCheck check_convergents(const std::vector<BigInt>& quotients, const std::vector<Convergent>& conv,
                                  const IrrationalSpec& a) {
  ConvergentCheck c;
  const HighFloat x = a.value_hp();
  std::vector<HighFloat> gaps;
  for (std::size_t k = 0; k < conv.size(); ++k) {
    const BigInt pm1 = k >= 1 ? conv[k - 1].p : BigInt(1);
    const BigInt pm2 = k >= 2 ? conv[k - 2].p : (k == 1 ? BigInt(1) : BigInt(0));
    const BigInt qm1 = k >= 1 ? conv[k - 1].q : BigInt(0);
    const BigInt qm2 = k >= 2 ? conv[k - 2].q : (k == 1 ? BigInt(0) : BigInt(1));
    if (k < quotients.size()) {
      if (conv[k].p != quotients[k] * pm1 + pm2 || conv[k].q != quotients[k] * qm1 + qm2) c.recurrence = false;
    }
    if (boost::integer::gcd(conv[k].p, conv[k].q) != 1) c.coprime = false;
    if (k >= 1) {
      const BigInt det = conv[k].p * conv[k - 1].q - conv[k - 1].p * conv[k].q;
      const BigInt expect = (k % 2 == 1) ? BigInt(1) : BigInt(-1);  // (-1)^(k-1)
      if (det != expect) c.determinant = false;
    }
    if (k >= 2 && !(conv[k].q > conv[k - 1].q)) c.q_increasing = false;
    gaps.push_back(boost::multiprecision::abs(HighFloat(conv[k].q) * x - HighFloat(conv[k].p)));
  }
  for (std::size_t k = 0; k + 1 < conv.size(); ++k) {
    if (!(gaps[k] < 1 / HighFloat(conv[k + 1].q))) c.approximation = false;
    if (!(gaps[k + 1] < gaps[k]) && !(gaps[k] == 0 && gaps[k + 1] == 0)) c.gaps_decreasing = false;
  }
  return c;
}

CsvTable convergent_table(const std::vector<Convergent>& conv, const IrrationalSpec& a) {
  CsvTable t({"k", "p", "q", "gap"});
  const HighFloat x = a.value_hp();
  for (const auto& c : conv) {
    const HighFloat gap = boost::multiprecision::abs(HighFloat(c.q) * x - HighFloat(c.p));
    t.row({std::to_string(c.k), c.p.str(), c.q.str(), format_double(static_cast<double>(gap))});
  }
  return t;
}

// ---------------------------------------------------------------------------

DistanceValue dist_to_integers(long long k, const IrrationalSpec& a) {
  if (k == 0) throw DomainError("dist_to_integers needs k != 0");
  DistanceValue out;
  const BigInt bk = k;
  if (a.kind() == IrrationalSpec::Kind::quadratic) {
    const HighFloat y = HighFloat(bk) * a.value_hp();
    const HighFloat fr = y - boost::multiprecision::floor(y);
    const HighFloat d = std::min(fr, 1 - fr);
    out.value = static_cast<double>(d);
    out.error_bound = static_cast<double>(HighFloat(std::abs(k)) * a.uncertainty());
  } else {
    const BigInt r = mod_pos(bk * a.num_, a.den_);
    const BigInt other = a.den_ - r;
    const BigInt dnum = r < other ? r : other;
    out.value = static_cast<double>(to_high(dnum, a.den_));
    out.exact_zero = dnum == 0 && a.kind() == IrrationalSpec::Kind::rational;
    out.error_bound = static_cast<double>(HighFloat(std::abs(k)) * a.uncertainty());
  }
  if (a.kind() != IrrationalSpec::Kind::rational && out.error_bound >= out.value)
    throw PrecisionError("dist_to_integers: insufficient precision at k = " + std::to_string(k));
  return out;
}

std::vector<double> distances_up_to(long long K, const IrrationalSpec& a, long long multiplier) {
  if (K < 1) throw DomainError("distances_up_to needs K >= 1");
  if (multiplier == 0) throw DomainError("multiplier must be nonzero");
  std::vector<double> d(static_cast<std::size_t>(K));
  if (a.kind() == IrrationalSpec::Kind::quadratic) {
    // Fractional part of m*a carried in high precision and advanced additively.
    HighFloat step = HighFloat(multiplier) * a.value_hp();
    step -= boost::multiprecision::floor(step);
    const HighFloat unc = a.uncertainty() * std::abs(multiplier);
    HighFloat fr = 0;
    for (long long k = 1; k <= K; ++k) {
      fr += step;
      if (fr >= 1) fr -= 1;
      const HighFloat v = std::min(fr, 1 - fr);
      const HighFloat err = unc * k + HighFloat("1e-90") * k;
      if (err >= v) throw PrecisionError("distances_up_to: insufficient precision at k = " + std::to_string(k));
      d[static_cast<std::size_t>(k - 1)] = static_cast<double>(v);
    }
    return d;
  }
  const BigInt step = mod_pos(BigInt(multiplier) * a.num_, a.den_);
  const double rad = static_cast<double>(a.uncertainty()) * std::abs(static_cast<double>(multiplier));
  BigInt r = 0;
  for (long long k = 1; k <= K; ++k) {
    r += step;
    if (r >= a.den_) r -= a.den_;
    const BigInt other = a.den_ - r;
    const BigInt dn = r < other ? r : other;
    const double v = static_cast<double>(to_high(dn, a.den_));
    if (a.kind() == IrrationalSpec::Kind::literal && rad * static_cast<double>(k) >= v)
      throw PrecisionError("distances_up_to: insufficient precision at k = " + std::to_string(k));
    d[static_cast<std::size_t>(k - 1)] = v;
  }
  return d;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<long long, double>> AuditReport::violations_beyond(long long k0) const {
  std::vector<std::pair<long long, double>> out;
  for (const auto& v : violations)
    if (v.first > k0) out.push_back(v);
  return out;
}

std::string AuditReport::summary() const {
  std::ostringstream os;
  if (violations.empty()) {
    os << "no violation up to K = " << K;
  } else {
    os << violations.size() << " violation(s) up to K = " << K << ", largest k = " << violations.back().first;
  }
  return os.str();
}

CsvTable AuditReport::to_csv() const {
  CsvTable t({"k", "distance", "threshold"});
  for (const auto& [k, d] : violations)
    t.add(k, d, std::pow(static_cast<double>(k), -1.0 - epsilon));
  return t;
}

AuditReport badly_approximable_audit(const IrrationalSpec& a, double epsilon, long long K) {
  if (!(epsilon > 0.0)) throw DomainError("badly_approximable_audit needs epsilon > 0");
  if (K < 1) throw DomainError("badly_approximable_audit needs K >= 1");
  AuditReport rep;
  rep.epsilon = epsilon;
  rep.K = K;
  const auto d = distances_up_to(K, a);
  rep.min_k_times_d = INFINITY;
  for (long long k = 1; k <= K; ++k) {
    const double dk = d[static_cast<std::size_t>(k - 1)];
    const double kd = static_cast<double>(k) * dk;
    if (kd < rep.min_k_times_d) {
      rep.min_k_times_d = kd;
      rep.argmin_k = k;
    }
    if (dk < std::pow(static_cast<double>(k), -1.0 - epsilon)) rep.violations.emplace_back(k, dk);
  }
  return rep;
}

// ---------------------------------------------------------------------------

FourierSpec FourierSpec::single_mode(double amplitude) {
  FourierSpec f;
  f.magnitude = {std::abs(amplitude)};
  f.C = std::abs(amplitude);
  f.epsilon = 1.0;
  return f;
}

FourierSpec FourierSpec::power(double C, double p, int K) {
  if (K < 1) throw DomainError("Fourier support must be >= 1");
  if (!(C > 0.0)) throw DomainError("Fourier amplitude must be positive");
  FourierSpec f;
  f.magnitude.resize(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) f.magnitude[static_cast<std::size_t>(k - 1)] = C * std::pow(k, -p);
  if (p > 1.0) {
    f.C = C;
    f.epsilon = p - 1.0;
  }
  return f;
}

CsvTable ParouxReport::blocks_csv() const {
  CsvTable t({"block", "k_lo", "k_hi", "subtotal"});
  for (std::size_t N = 0; N < blocks.size(); ++N)
    t.add(N, std::uint64_t{1} << N, (std::uint64_t{1} << (N + 1)) - 1, blocks[N]);
  return t;
}

ParouxReport paroux_sum(const FourierSpec& f, const IrrationalSpec& a, long long K) {
  if (K < 1) throw DomainError("paroux_sum needs K >= 1");
  ParouxReport rep;
  const auto d = distances_up_to(K, a);
  rep.partial.resize(static_cast<std::size_t>(K));
  double acc = 0.0;
  std::vector<double> block_max_coef;
  for (long long k = 1; k <= K; ++k) {
    const double m = k <= f.support() ? f.magnitude[static_cast<std::size_t>(k - 1)] : 0.0;
    const double dk = d[static_cast<std::size_t>(k - 1)];
    const double term = 2.0 * m * m / (dk * dk);
    acc += term;
    rep.partial[static_cast<std::size_t>(k - 1)] = acc;
    const auto N = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(k)) + 1e-12));
    if (rep.blocks.size() <= N) {
      rep.blocks.resize(N + 1, 0.0);
      block_max_coef.resize(N + 1, 0.0);
    }
    rep.blocks[N] += term;
    block_max_coef[N] = std::max(block_max_coef[N], m);
  }
  // Empirical D in  sum_{block N} d(ka,Z)^-2 <= D 4^(N+1).
  for (std::size_t N = 0; N < rep.blocks.size(); ++N) {
    if (block_max_coef[N] <= 0.0) continue;
    const double scale = 2.0 * block_max_coef[N] * block_max_coef[N] * std::ldexp(1.0, 2 * static_cast<int>(N + 1));
    rep.fitted_constant = std::max(rep.fitted_constant, rep.blocks[N] / scale);
  }
  if (2LL * f.support() <= K) {
    rep.verdict = "finite";
    return rep;
  }
  std::vector<double> xs, ys;
  for (std::size_t N = 1; N < rep.blocks.size(); ++N) {
    if (rep.blocks[N] <= 0.0) continue;
    // Skip the last block when it is only partially covered.
    if ((1LL << (N + 1)) - 1 > K) continue;
    xs.push_back(static_cast<double>(N));
    ys.push_back(std::log(rep.blocks[N]));
  }
  if (xs.size() < 3) {
    rep.verdict = "inconclusive";
    return rep;
  }
  const LineFit fit = fit_line(xs, ys);
  rep.block_ratio = std::exp(fit.slope);
  if (rep.block_ratio <= 0.8)
    rep.verdict = "decaying";
  else if (rep.block_ratio >= 0.9)
    rep.verdict = "non-decaying";
  else
    rep.verdict = "inconclusive";
  return rep;
}

BisCircleReport bis_series_circle(const FourierSpec& f, const IrrationalSpec& a, int N_max) {
  if (N_max < 1) throw DomainError("bis_series_circle needs N_max >= 1");
  if (f.support() < 1) throw DomainError("Fourier spec is empty");
  BisCircleReport rep;
  const int K = f.support();
  const double av = a.value();
  std::vector<double> mult(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) mult[static_cast<std::size_t>(k - 1)] = std::cos(2.0 * std::numbers::pi * k * av);

  // Sup over a grid of the cosine series sum 2 m_k c_k^n cos(2 pi k x).
  const int G = K == 1 ? 2 : 512;
  std::vector<double> table(static_cast<std::size_t>(K * G));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < G; ++j)
      table[static_cast<std::size_t>(k * G + j)] =
          std::cos(2.0 * std::numbers::pi * (k + 1) * static_cast<double>(j) / G);
  std::vector<double> coef(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) coef[static_cast<std::size_t>(k)] = 2.0 * f.magnitude[static_cast<std::size_t>(k)];

  std::vector<double> terms(static_cast<std::size_t>(N_max));
  std::vector<double> vals(static_cast<std::size_t>(G));
  for (int n = 1; n <= N_max; ++n) {
    double biggest = 0.0;
    for (int k = 0; k < K; ++k) {
      coef[static_cast<std::size_t>(k)] *= mult[static_cast<std::size_t>(k)];
      biggest = std::max(biggest, std::abs(coef[static_cast<std::size_t>(k)]));
    }
    double sup = 0.0;
    if (biggest > 1e-300) {
      std::fill(vals.begin(), vals.end(), 0.0);
      for (int k = 0; k < K; ++k) {
        const double c = coef[static_cast<std::size_t>(k)];
        if (c == 0.0) continue;
        const double* row = &table[static_cast<std::size_t>(k * G)];
        for (int j = 0; j < G; ++j) vals[static_cast<std::size_t>(j)] += c * row[j];
      }
      for (double v : vals) sup = std::max(sup, std::abs(v));
    }
    terms[static_cast<std::size_t>(n - 1)] = sup / std::sqrt(static_cast<double>(n));
  }
  rep.left = partial_sums(terms);

  // sum_n n^-1/2 |c|^n <= sqrt(pi/(1-|c|)) and 1 - |cos(pi u)| >= pi d(u,Z)^2 give 1/d(2ka,Z) per mode.
  const auto d2 = distances_up_to(K, a, 2);
  for (int k = 1; k <= K; ++k) {
    const double dk = d2[static_cast<std::size_t>(k - 1)];
    rep.right += 2.0 * f.magnitude[static_cast<std::size_t>(k - 1)] / dk;
    if (f.epsilon > 0.0 && f.C > 0.0) rep.right_declared += 2.0 * f.C * std::pow(k, -1.0 - f.epsilon) / dk;
  }
  for (int n = 0; n < N_max; ++n) {
    if (rep.left[static_cast<std::size_t>(n)] > rep.right * (1.0 + 1e-12)) {
      rep.holds = false;
      rep.first_violation = n + 1;
      break;
    }
  }
  rep.diagnostic = diagnose_series(terms);
  return rep;
}

}  // namespace mdlab
