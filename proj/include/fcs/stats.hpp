#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fcs::stats {

// Fixed-order pairwise reduction; the result does not depend on thread count.
double pairwise_sum(std::span<const double> x);
double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased

double normal_cdf(double x);
double chi_squared_cdf(double x, double dof);

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
// Asymptotic survival function with the small-sample scaling sqrt(n) + 0.12 + 0.11 / sqrt(n).
double ks_pvalue(double d, std::size_t n);

// Uniform on [0, 1) from the top 53 bits.
inline double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

struct BootstrapResult {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Resamples indices 0..n-1 with replacement; statistic receives the index multiset.
BootstrapResult bootstrap(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                          int replicates, std::uint64_t seed);

}  // namespace fcs::stats
