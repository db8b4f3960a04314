#pragma once

// Independent reference computations for tests. Nothing here calls the library's density or generator code.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "fcs/model.hpp"

namespace fcs::oracle {

// Random valid model: d in [2, max_dim], |K| in [1, max_res], ohmic densities, box [-beta, 2 beta].
inline ModelConfig random_model(std::uint64_t seed, bool hermitian_coupling = true, int max_dim = 4, int max_res = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_dist(2, max_dim), res_dist(1, max_res);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = dim_dist(rng);
  const int nk = res_dist(rng);
  ModelConfig m;
  m.system = build_system(random_hermitian(d, seed * 7 + 1));
  for (int k = 0; k < nk; ++k) {
    ReservoirSpec r;
    r.label = "r" + std::to_string(k);
    r.beta = 0.5 + 2.5 * unit(rng);
    CMat c = random_hermitian(d, seed * 7 + 2 + static_cast<unsigned long>(k));
    if (!hermitian_coupling) c += I * random_hermitian(d, seed * 7 + 50 + static_cast<unsigned long>(k));
    r.coupling = c;
    r.density = SpectralDensity{OhmicDensity{0.2 + 0.8 * unit(rng), 0.5 + 1.5 * unit(rng), 2.0 + 4.0 * unit(rng)}};
    m.domain.lo.push_back(-r.beta);
    m.domain.hi.push_back(2.0 * r.beta);
    m.reservoirs.push_back(std::move(r));
  }
  m.lambda = 0.1;
  return m;
}

// Canonical qubit rates written out by hand: J(w) = w e^{-w/5} / 2, D = sigma_x, |<e|D|g>|^2 = 1.
struct QubitRates {
  double down[2];  // 2 pi G_k(1), system loses one quantum to reservoir k
  double up[2];    // 2 pi G_k(-1)
};

inline QubitRates canonical_qubit_rates(double beta1 = 1.0, double beta2 = 2.0) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double j1 = 0.5 * std::exp(-0.2);
  QubitRates r{};
  const double betas[2] = {beta1, beta2};
  for (int k = 0; k < 2; ++k) {
    const double n = 1.0 / (std::exp(betas[k]) - 1.0);
    r.down[k] = two_pi * j1 * (1.0 + n);
    r.up[k] = two_pi * j1 * n;
  }
  return r;
}

// Largest eigenvalue of [[-a, sum down e^{-kappa}], [sum up e^{kappa}, -b]] with a = sum up, b = sum down, times
// lambda^2. Written as (c - ab) / (root + (a + b) / 2) to avoid cancellation near zero.
inline double qubit_f(double k1, double k2, double lambda = 0.1, const QubitRates& r = canonical_qubit_rates()) {
  const double a = r.up[0] + r.up[1];
  const double b = r.down[0] + r.down[1];
  const double c = (r.down[0] * std::exp(-k1) + r.down[1] * std::exp(-k2)) * (r.up[0] * std::exp(k1) + r.up[1] * std::exp(k2));
  const double root = std::sqrt(0.25 * (a - b) * (a - b) + c);
  return lambda * lambda * (c - a * b) / (root + 0.5 * (a + b));
}

// Natural rate scale of the 2x2 tilted matrix, lambda^2 (a + b) / 2.
inline double qubit_rate_scale(double lambda = 0.1, const QubitRates& r = canonical_qubit_rates()) {
  return lambda * lambda * 0.5 * (r.up[0] + r.up[1] + r.down[0] + r.down[1]);
}

// Richardson-extrapolated central differences of a scalar function of two variables.
template <class F>
double fd_second(F f, int a, int b, double h) {
  auto at = [&](double da, double db) {
    double x[2] = {0.0, 0.0};
    x[a] += da;
    x[b] += db;
    return f(x[0], x[1]);
  };
  auto est = [&](double s) {
    if (a == b) return (at(s, 0.0) - 2.0 * at(0.0, 0.0) + at(-s, 0.0)) / (s * s);
    return (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4.0 * s * s);
  };
  return (4.0 * est(0.5 * h) - est(h)) / 3.0;
}

template <class F>
double fd_first(F f, int a, double h) {
  auto at = [&](double da) {
    double x[2] = {0.0, 0.0};
    x[a] += da;
    return f(x[0], x[1]);
  };
  auto est = [&](double s) { return (at(s) - at(-s)) / (2.0 * s); };
  return (4.0 * est(0.5 * h) - est(h)) / 3.0;
}

}  // namespace fcs::oracle
