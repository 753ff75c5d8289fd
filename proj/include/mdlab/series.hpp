#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/csv.hpp"

namespace mdlab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

enum class Verdict { converging, diverging, inconclusive };
std::string to_string(Verdict v);

// Convergence diagnostic for a series of nonnegative terms.
struct SeriesDiagnostic {
  std::size_t first_index = 1;  // index of terms[0]
  std::vector<double> terms;
  std::vector<double> partial;
  Verdict verdict = Verdict::inconclusive;
  std::string fit_kind = "none";  // power, geometric, finite, zero
  double exponent = 0.0;          // power fit: term ~ C n^exponent
  double ratio = 0.0;             // geometric fit: term ~ C r^n
  double r2 = 0.0;
  bool increments_decreasing = false;
  double tail_estimate = 0.0;     // fitted remainder beyond the last term (converging only)
  std::string note;
  std::vector<std::pair<std::string, std::vector<double>>> aux;  // extra per-term columns
  std::vector<std::pair<std::string, double>> scalars;

  double total() const { return partial.empty() ? 0.0 : partial.back(); }
  CsvTable to_csv() const;
};

// Power exponents at or above this count as non-summable. The band below -1
// absorbs log corrections such as n^-1 (log n)^-1/2 ... at finite range.
inline constexpr double kDivergenceExponent = -1.01;
inline constexpr double kFitR2 = 0.999;

SeriesDiagnostic diagnose_series(std::vector<double> terms, std::size_t first_index = 1);

}  // namespace mdlab
