#pragma once

#include <cstdint>

namespace dlasso {

/// exp(1/(2L^2 - 2L)); bound on E exp(UW/L) for independent N(0,1) U, W.
/// Throws LOutOfRange unless L > 1.
double product_mgf_bound(double l);

/// sqrt(2t/n) + t/n; P(U'W/n >= threshold) <= exp(-t).
double inner_product_tail(double n, double t);

/// lambda + (sqrt(2) sigma + 2 lambda) sqrt(t/n) + (sigma + 2 lambda) t/n;
/// P(U'V/n >= threshold) <= 2 exp(-t).
double correlated_pair_tail(double n, double t, double lambda_sharp, double sigma_sharp);

/// 2 sqrt(t/n) + 2t/n; P(||U||^2/n - 1 >= threshold) <= exp(-t).
double chi_square_tail(double n, double t);

/// t + log(m).
double union_bound_t(double t, double m);

struct MonteCarloTail {
  double exceedance = 0.0;
  double level = 0.0;
  std::int64_t replicates = 0;
  bool within(double factor) const { return exceedance <= level * factor; }
};

struct MonteCarloMean {
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  std::int64_t replicates = 0;
};

/// Monte Carlo estimate of E exp(UW/L).
MonteCarloMean mc_product_mgf(double l, std::int64_t replicates, std::uint64_t seed);

MonteCarloTail mc_inner_product_tail(int n, double t, std::int64_t replicates,
                                     std::uint64_t seed);

/// U_i ~ N(0,1); V_i = lambda U_i + sigma_perp W_i with var(V) = sigma^2.
/// The threshold is the one-sided bound on U'V/n.
MonteCarloTail mc_correlated_pair_tail(int n, double t, double lambda_sharp, double sigma_sharp,
                                       std::int64_t replicates, std::uint64_t seed);

MonteCarloTail mc_chi_square_tail(int n, double t, std::int64_t replicates,
                                  std::uint64_t seed);

}  // namespace dlasso
