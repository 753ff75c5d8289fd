#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/core.hpp"
#include "mdlab/csv.hpp"
#include "mdlab/diophantine.hpp"
#include "mdlab/processes.hpp"

namespace mdlab {

struct SigmaEstimate {
  double value = 0.0;
  std::string method;  // covariance_series, dyadic, var_sn, fourier_closed_form
  double se = 0.0;     // 0 for exact methods
  double raw = 0.0;    // value before clamping
  bool clamped = false;
  std::vector<std::pair<std::string, double>> metadata;
  std::vector<std::string> warnings;
  // Per-lag / per-level / per-n detail rows.
  std::vector<std::string> detail_header;
  std::vector<std::vector<double>> detail;

  CsvTable summary_csv() const;
  CsvTable detail_csv() const;
};

// gamma_0 + 2 sum_{k<=K_max} gamma_k from the pooled empirical autocovariances.
// Needs total length >= 100 K_max.
SigmaEstimate sigma2_covariance_series(std::span<const Path> paths, int K_max);

// E(X_1^2) + sum_{j<=j_max} 2^-j E(S_{2^j}(S_{2^{j+1}} - S_{2^j})) on non-overlapping blocks.
SigmaEstimate sigma2_dyadic(std::span<const Path> paths, int j_max);

// Var(S_n)/n over >= 200 replicas per n, extrapolated by fitting sigma2 + c/n.
SigmaEstimate sigma2_var_sn(std::span<const Path> paths, const std::vector<std::size_t>& ns);

// Exact sum over 0 < |k| <= K of |fhat(k)|^2 (1 + cos 2 pi k a)/(1 - cos 2 pi k a).
SigmaEstimate sigma2_circle_fourier(const FourierSpec& f, const IrrationalSpec& a, int K);
SigmaEstimate sigma2_circle_fourier(const TrigPolynomial& f, const IrrationalSpec& a);

// Combined-SE agreement test |a - b| <= z * sqrt(se_a^2 + se_b^2) (plus an absolute floor).
bool agree(const SigmaEstimate& a, const SigmaEstimate& b, double z = 3.0, double floor = 1e-12);

}  // namespace mdlab
