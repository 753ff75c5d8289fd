#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/core.hpp"
#include "mdlab/csv.hpp"
#include "mdlab/processes.hpp"
#include "mdlab/series.hpp"

namespace mdlab {

// A nonnegative sequence given by a closed form, indexed from 0.
using Sequence = std::function<double(long)>;

Sequence sequence_from(std::vector<double> values, long first_index = 0);

// Sum n^-3/2 ||E(S_n | F_0)||_inf. Auxiliary scalars: delta_inf and delta_tilde_r1.
SeriesDiagnostic check_mw(const ProcessModel& model, int N_max);

// Sum n^-1/2 ||E(X_n | F_0)||_inf (exact for kernel models, bounded for linear processes).
SeriesDiagnostic check_bis(const ProcessModel& model, int N_max);

// ||E(X_n | F_0)||_inf for n = 1..N_max from the kernel, with a noise floor.
std::vector<double> kernel_conditional_mean_norms(const KernelModel& km, int N_max);
// ||E(S_n | F_0)||_inf for n = 1..N_max.
std::vector<double> kernel_conditional_sum_norms(const KernelModel& km, int N_max);

struct S2infReport {
  std::vector<int> ns;
  std::vector<double> deviations;
  double spearman = 0.0;
  bool pass = false;
  CsvTable to_csv() const;
};

S2infReport check_s2inf(const ProcessModel& model, double sigma2, const std::vector<int>& ns);

struct MixRow {
  int i = 0, j = 0, n = 0;
  double deviation = 0.0;
};

struct MixReport {
  std::vector<MixRow> rows;
  bool pass = false;
  CsvTable to_csv() const;
};

// Pre-registered pairs {(i,j): 1 <= i <= j <= 8}.
std::vector<std::pair<int, int>> default_mix_pairs();
MixReport check_mix(const ProcessModel& model, const std::vector<std::pair<int, int>>& pairs,
                    const std::vector<int>& ns);

// Bound 2 sum_i Delta_i + 2 sum_i sum_{k>=1} Delta_{i-k} phi(k), grouped by |i| = 0..N_max.
SeriesDiagnostic check_projcond_bound(const Sequence& delta, const Sequence& phi, int N_max, bool two_sided = true);
SeriesDiagnostic check_projcond_bound(const LinearProcessSpec& spec, const Sequence& phi, int N_max);
// phi of the innovation: 0 for iid, computed from the chain otherwise.
Sequence innovation_phi(const LinearProcessSpec& spec, int n_max);

struct MixRPhiReport {
  SeriesDiagnostic main;  // terms R_l sum_{m>=0} phi(m)/sqrt(l+m), l = 1..N_max
  bool item1 = false;     // sum phi < inf and sum k^-1/2 R_k < inf
  bool item2 = false;     // sum R < inf and sum k^-1/2 phi(k) < inf
  SeriesDiagnostic phi_sum, r_weighted, r_sum, phi_weighted;
};

MixRPhiReport check_mixrphi(const Sequence& R, const Sequence& phi, int N_max);

// sum_i sum_l w_l(2(b-a)|c_{i-l}|) with terms grouped by |i| = 0..N_max.
SeriesDiagnostic check_modulus_condition(const std::vector<Modulus>& w, const Sequence& c, double width, int N_max,
                                         bool two_sided);
SeriesDiagnostic check_modulus_condition(const LinearProcessSpec& spec, int N_max);

struct IntegralReport {
  double estimate = 0.0;  // partial integral over the computed blocks (+ fitted tail when converging)
  SeriesDiagnostic blocks;  // block j covers t in [2^-(j+1), 2^-j], j = 1..
  Verdict verdict = Verdict::inconclusive;
};

// integral_0^{1/2} c(t) / (t sqrt|log t|) dt by dyadic blocks toward 0.
IntegralReport class_L_integral(const Modulus& c, int blocks = 1000);

// Rejects non-concave moduli (midpoint spot check on (0, 1/2]).
IntegralReport check_class_L(const Modulus& c);

struct KacReport {
  SeriesDiagnostic series;  // n^-1/2 w(2 width t_n)
  IntegralReport integral;
};

KacReport check_kac(const Modulus& w, const Sequence& tail, double width, int N_max);

// phi(n) = max_x sum_B (P^n(x,B) - pi(B))^+ for n = 1..n_max.
std::vector<double> phi_coefficients(const std::vector<std::vector<double>>& P, const std::vector<double>& pi,
                                     int n_max);

}  // namespace mdlab
