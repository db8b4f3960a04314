#include "fcs/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "fcs/errors.hpp"

namespace fcs::stats {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) return std::accumulate(x.begin(), x.end(), 0.0);
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

double mean(std::span<const double> x) {
  if (x.empty()) fail(ErrorCode::ConfigError, "mean of empty sample");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) fail(ErrorCode::ConfigError, "variance needs at least two samples");
  const double m = mean(x);
  std::vector<double> sq(x.size());
  std::transform(x.begin(), x.end(), sq.begin(), [m](double v) { return (v - m) * (v - m); });
  return pairwise_sum(sq) / static_cast<double>(x.size() - 1);
}

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<>(), x); }

double chi_squared_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::chi_squared_distribution<>(dof), x);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) fail(ErrorCode::ConfigError, "KS statistic of empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double t = (rn + 0.12 + 0.11 / rn) * d;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

BootstrapResult bootstrap(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                          int replicates, std::uint64_t seed) {
  if (n == 0 || replicates < 2) fail(ErrorCode::ConfigError, "bootstrap needs samples and at least two replicates");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  BootstrapResult r;
  r.estimate = statistic(all);
  std::mt19937_64 rng(seed);
  std::vector<double> reps(static_cast<std::size_t>(replicates));
  std::vector<std::size_t> idx(n);
  for (auto& rep : reps) {
    for (auto& i : idx) i = static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(n));
    rep = statistic(idx);
  }
  r.std_error = std::sqrt(variance(reps));
  return r;
}

}  // namespace fcs::stats
