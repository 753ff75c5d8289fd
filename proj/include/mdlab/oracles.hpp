#pragma once

#include <utility>
#include <vector>

#include "mdlab/diophantine.hpp"

// Reference computations that share no code with the modules they check.
namespace mdlab::oracle {

// (F_k, F_{k+1}) for k = 0..k_max: the convergents of (sqrt 5 - 1)/2.
std::vector<std::pair<BigInt, BigInt>> fibonacci_convergents(int k_max);

// gamma_0 + 2 sum_{k<=lags} gamma_k for X = amplitude * cos(2 pi Y) under the
// +-a circle walk, each gamma_k summed over the binomial law of the walk.
double circle_covariance_sum(double a, int lags, double amplitude = 1.0);

// log P(Bin(n, 1/2) >= k0) with k0 = ceil((n + t)/2) via Boost's binomial law.
double binomial_tail_log(long n, double t);

// Lugannani-Rice saddlepoint approximation of log P(S_n >= t) for fair +-1 steps.
double rademacher_saddlepoint_log(long n, double t);

// Brute-force sum of the first `lags` autocovariances of a finite-state
// stationary chain with transition P, law pi and observable f.
double chain_covariance_sum(const std::vector<std::vector<double>>& P, const std::vector<double>& pi,
                            const std::vector<double>& f, int lags);

}  // namespace mdlab::oracle
