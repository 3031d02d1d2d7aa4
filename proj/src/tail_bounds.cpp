#include "dlasso/tail_bounds.h"

#include <cmath>
#include <random>

#include "dlasso/error.h"
#include "dlasso/stats.h"

namespace dlasso {

double product_mgf_bound(double l) {
  if (!(l > 1.0)) throw Error(ErrorCode::kLOutOfRange, "L must exceed 1", l);
  if (std::isinf(l)) return 1.0;
  return std::exp(1.0 / (2.0 * l * l - 2.0 * l));
}

double inner_product_tail(double n, double t) {
  if (!(n >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "n must be at least 1", n);
  if (t < 0.0) throw Error(ErrorCode::kInvalidArgument, "t must be nonnegative", t);
  return std::sqrt(2.0 * t / n) + t / n;
}

double correlated_pair_tail(double n, double t, double lambda_sharp, double sigma_sharp) {
  if (!(n >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "n must be at least 1", n);
  if (t < 0.0) throw Error(ErrorCode::kInvalidArgument, "t must be nonnegative", t);
  return lambda_sharp + (std::sqrt(2.0) * sigma_sharp + 2.0 * lambda_sharp) * std::sqrt(t / n) +
         (sigma_sharp + 2.0 * lambda_sharp) * t / n;
}

double chi_square_tail(double n, double t) {
  if (!(n >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "n must be at least 1", n);
  if (t < 0.0) throw Error(ErrorCode::kInvalidArgument, "t must be nonnegative", t);
  return 2.0 * std::sqrt(t / n) + 2.0 * t / n;
}

double union_bound_t(double t, double m) {
  if (!(m >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "m must be at least 1", m);
  return t + std::log(m);
}

namespace {

constexpr std::int64_t kBlock = 1 << 14;

// Runs `draw(rng, normal)` for each replicate; replicate blocks get their own seed.
template <typename Draw>
void for_each_replicate(std::int64_t replicates, std::uint64_t seed, Draw&& draw) {
  std::int64_t done = 0;
  std::uint64_t block = 0;
  while (done < replicates) {
    std::mt19937_64 rng(derive_seed(seed, block++));
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::int64_t stop = std::min(replicates, done + kBlock);
    for (; done < stop; ++done) draw(rng, normal);
  }
}

}  // namespace

MonteCarloMean mc_product_mgf(double l, std::int64_t replicates, std::uint64_t seed) {
  MonteCarloMean out;
  out.bound = product_mgf_bound(l);
  out.replicates = replicates;
  double sum = 0.0;
  double sum_sq = 0.0;
  for_each_replicate(replicates, seed, [&](std::mt19937_64& rng,
                                           std::normal_distribution<double>& normal) {
    const double u = normal(rng);
    const double w = normal(rng);
    const double v = std::exp(u * w / l);
    sum += v;
    sum_sq += v * v;
  });
  const double n = static_cast<double>(replicates);
  out.mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - out.mean * out.mean);
  out.std_error = std::sqrt(var / n);
  return out;
}

MonteCarloTail mc_inner_product_tail(int n, double t, std::int64_t replicates,
                                     std::uint64_t seed) {
  const double thr = inner_product_tail(n, t);
  std::int64_t hits = 0;
  for_each_replicate(replicates, seed, [&](std::mt19937_64& rng,
                                           std::normal_distribution<double>& normal) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = normal(rng);
      s += u * normal(rng);
    }
    if (s / n >= thr) ++hits;
  });
  return {static_cast<double>(hits) / static_cast<double>(replicates), std::exp(-t), replicates};
}

MonteCarloTail mc_correlated_pair_tail(int n, double t, double lambda_sharp, double sigma_sharp,
                                       std::int64_t replicates, std::uint64_t seed) {
  if (sigma_sharp < std::abs(lambda_sharp)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma_sharp must be at least |lambda_sharp|");
  }
  const double thr = correlated_pair_tail(n, t, lambda_sharp, sigma_sharp);
  const double perp = std::sqrt(sigma_sharp * sigma_sharp - lambda_sharp * lambda_sharp);
  std::int64_t hits = 0;
  for_each_replicate(replicates, seed, [&](std::mt19937_64& rng,
                                           std::normal_distribution<double>& normal) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = normal(rng);
      const double v = lambda_sharp * u + perp * normal(rng);
      s += u * v;
    }
    if (s / n >= thr) ++hits;
  });
  return {static_cast<double>(hits) / static_cast<double>(replicates), 2.0 * std::exp(-t),
          replicates};
}

MonteCarloTail mc_chi_square_tail(int n, double t, std::int64_t replicates,
                                  std::uint64_t seed) {
  const double thr = chi_square_tail(n, t);
  std::int64_t hits = 0;
  for_each_replicate(replicates, seed, [&](std::mt19937_64& rng,
                                           std::normal_distribution<double>& normal) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = normal(rng);
      s += u * u;
    }
    if (s / n - 1.0 >= thr) ++hits;
  });
  return {static_cast<double>(hits) / static_cast<double>(replicates), std::exp(-t), replicates};
}

}  // namespace dlasso
