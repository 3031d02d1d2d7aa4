#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dlasso/types.h"

namespace dlasso {

double normal_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS241, relative error ~1e-16).
double normal_quantile(double prob);

double mean(const std::vector<double>& v);
/// Unbiased sample variance (n - 1 denominator).
double sample_variance(const std::vector<double>& v);

/// sup_x |F_n(x) - Phi(x)|.
double ks_distance_normal(std::vector<double> values);

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Fills `m` column by column with N(0,1) draws.
void fill_normal(Matrix& m, std::mt19937_64& rng);
void fill_normal(Vector& v, std::mt19937_64& rng);

}  // namespace dlasso
