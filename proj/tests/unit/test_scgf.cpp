#include <gtest/gtest.h>

#include <cmath>

#include "fcs/errors.hpp"
#include "fcs/scgf.hpp"
#include "oracles.hpp"

using namespace fcs;
using oracle::qubit_f;

namespace {

RVec k2(double a, double b) {
  RVec k(2);
  k << a, b;
  return k;
}

// Ternary search of a convex function on [lo, hi].
template <class F>
double argmin_convex(F f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Scgf, VanishesAtZeroWithIdentityEigenvector) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelConfig m = oracle::random_model(seed);
    const Scgf s(m);
    const ScgfResult r = s.at(RVec::Zero(s.reservoir_count()));
    const int d = m.system.dim;
    EXPECT_NEAR(r.f, 0.0, 1e-13) << seed;
    EXPECT_LT(max_abs(r.right_eigvec - CMat::Identity(d, d)), 1e-9) << seed;
    EXPECT_GT(r.gap, 0.0);
  }
}

TEST(Scgf, CanonicalQubitClosedForm) {
  const Scgf s(canonical_qubit());
  const double scale = oracle::qubit_rate_scale();
  for (double a : {-1.0, -0.4, 0.0, 0.3, 1.0, 2.5})
    for (double b : {-1.0, 0.2, 1.1, 2.5}) {
      const double f = s.f(k2(a, b));
      EXPECT_LE(std::abs(f - qubit_f(a, b)), 1e-10 * std::max(std::abs(qubit_f(a, b)), scale)) << a << "," << b;
    }
  EXPECT_NEAR(s.at(RVec::Zero(2)).gap, 0.0447161, 1e-6);
}

TEST(Scgf, IndependentOfInitialState) {
  ModelConfig m = canonical_qubit();
  const double f0 = Scgf(m).f(k2(0.4, -0.2));
  m.rho_E = random_density_matrix(2, 3);
  EXPECT_EQ(Scgf(m).f(k2(0.4, -0.2)), f0);
}

TEST(Scgf, RightEigenvectorPositiveAwayFromZero) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelConfig m = oracle::random_model(seed);
    const Scgf s(m);
    RVec k(s.reservoir_count());
    for (int a = 0; a < k.size(); ++a) k(a) = 0.5 * m.domain.hi[static_cast<std::size_t>(a)];
    const ScgfResult r = s.at(k);
    EXPECT_LT(hermiticity_residual(r.right_eigvec), 1e-8);
    EXPECT_GT(hermitian_eigen(0.5 * (r.right_eigvec + r.right_eigvec.adjoint())).values.minCoeff(), 0.0);
    EXPECT_NEAR(r.right_eigvec.trace().real(), m.system.dim, 1e-9);
    EXPECT_NEAR(std::abs((r.left_eigvec.adjoint() * r.right_eigvec).trace()), 1.0, 1e-9);
  }
}

TEST(Gallavotti, SymmetryHoldsUnderDetailedBalance) {
  const Scgf s(canonical_qubit());
  const GcReport gc = gc_symmetry_defect(s, {1.0, 2.0}, {0.0, 0.1, 0.25, 0.4, 0.5});
  EXPECT_LE(gc.max_defect, 1e-9);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ModelConfig m = oracle::random_model(seed);
    const Scgf rs(m);
    EXPECT_LE(gc_symmetry_defect(rs, m.betas(), {0.0, 0.2, 0.45}).max_defect, 1e-9) << seed;
  }
}

TEST(Gallavotti, BrokenDetailedBalanceIsDetected) {
  const ModelConfig m = canonical_qubit();
  std::vector<Coupling> cs = couplings(m);
  const SpectralDensity j{OhmicDensity{0.5, 1.0, 5.0}};
  // Absorption three times too strong for reservoir 0.
  cs[0].G = EffectiveDensity::custom(
      [j](double w) {
        if (w == 0.0) return 0.0;
        const double n = 1.0 / std::expm1(std::abs(w));
        return w > 0.0 ? (1.0 + n) * j(w) : 3.0 * n * j(-w);
      },
      -60.0, 60.0, {0.0});
  const Scgf s(DeformedLindblad(m.system, cs, GeneratorVariant::FullSecular, true, m.quadrature), 0.1, m.domain);
  EXPECT_GT(gc_symmetry_defect(s, {1.0, 2.0}, {0.0, 0.2, 0.4}).max_defect, 1e-3 * oracle::qubit_rate_scale());
}

TEST(Gallavotti, ConvexAlongTheTemperatureRay) {
  const Scgf s(canonical_qubit());
  std::vector<double> nu;
  for (int i = 0; i <= 20; ++i) nu.push_back(-0.2 + 0.07 * i);
  const GcReport gc = gc_symmetry_defect(s, {1.0, 2.0}, nu);
  for (std::size_t i = 1; i + 1 < nu.size(); ++i)
    EXPECT_GE(gc.f_nu[i + 1] - 2.0 * gc.f_nu[i] + gc.f_nu[i - 1], -1e-14);
}

TEST(Moments, CanonicalQubitSignsAndValues) {
  const Scgf s(canonical_qubit());
  const TransportMoments tm = transport_moments(s, {1.0, 2.0});
  EXPECT_NEAR(tm.mean_currents(0), -0.0031473, 1e-7);
  EXPECT_NEAR(tm.mean_currents(1), 0.0031473, 1e-7);
  EXPECT_GT(tm.entropy_production_rate, 0.0);
  EXPECT_NEAR(tm.energy_balance_residual, 0.0, 1e-12);
  auto f = [](double a, double b) { return qubit_f(a, b); };
  for (int a = 0; a < 2; ++a) {
    EXPECT_NEAR(tm.mean_currents(a), -oracle::fd_first(f, a, 1e-3), 1e-11);
    for (int b = 0; b < 2; ++b) EXPECT_NEAR(tm.covariance(a, b), oracle::fd_second(f, a, b, 1e-3), 1e-9);
  }
  EXPECT_NEAR(tm.covariance(0, 0), 0.0065892, 1e-7);
}

TEST(Moments, EquilibriumHasNoCurrent) {
  ModelConfig m = canonical_qubit();
  m.reservoirs[1].beta = 1.0;
  const TransportMoments tm = transport_moments(Scgf(m), {1.0, 1.0});
  EXPECT_LT(tm.mean_currents.cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(tm.entropy_production_rate, 0.0, 1e-13);
  EXPECT_GT(tm.covariance(0, 0), 0.0);
}

TEST(Moments, RandomModelsPassTheDerivativeCrossCheck) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ModelConfig m = oracle::random_model(seed);
    const TransportMoments tm = transport_moments(Scgf(m), m.betas());
    EXPECT_GE(tm.entropy_production_rate, -1e-12) << seed;
    EXPECT_GE(symmetric_eigen(tm.covariance).values.minCoeff(), -1e-10) << seed;
  }
}

TEST(Moments, CltCharacteristicIsGaussian) {
  const TransportMoments tm = transport_moments(Scgf(canonical_qubit()), {1.0, 2.0});
  const CltParameters c = clt_normalization(tm);
  const RVec g = k2(3.0, -1.0);
  EXPECT_NEAR(c.characteristic(g), std::exp(-0.5 * g.dot(tm.covariance * g)), 1e-15);
  EXPECT_EQ(c.b_mean.norm(), 0.0);
}

TEST(RateFunction, ZeroAtMeanAndNonNegative) {
  const Scgf s(canonical_qubit());
  const TransportMoments tm = transport_moments(s, {1.0, 2.0});
  const RateFunctionPoint at_mean = legendre_point(s, tm.mean_currents);
  EXPECT_NEAR(at_mean.I, 0.0, 1e-15);
  EXPECT_FALSE(at_mean.boundary);
  const RateFunctionTable t = rate_function(s, {k2(-0.01, 0.01), k2(0.002, -0.002), k2(0.02, 0.03)});
  for (const auto& p : t.points) EXPECT_GE(p.I, 0.0);
  // Energy conservation forces y1 + y2 = 0; off that line the optimiser runs into the box.
  EXPECT_TRUE(t.points[2].boundary);
}

TEST(RateFunction, MarginalMatchesGridOracle) {
  ModelConfig m = canonical_qubit();
  m.domain = DomainBox{{-1.0, 0.0}, {2.5, 0.0}};
  const Scgf s(m);
  for (double a1 : {-0.008, -0.005, -0.002, 0.0, 0.002}) {
    const RateFunctionPoint p = legendre_point(s, k2(a1, 0.0));
    auto obj = [a1](double k) { return k * a1 + qubit_f(k, 0.0); };
    const double k_star = argmin_convex(obj, -1.0, 2.5);
    EXPECT_NEAR(p.I, -obj(k_star), 1e-12 + 1e-8 * std::abs(obj(k_star))) << a1;
    EXPECT_NEAR(p.kappa_star(1), 0.0, 0.0);
  }
}

TEST(Scgf, CollisionWhenNoTransitions) {
  ModelConfig m = canonical_qubit();
  for (auto& r : m.reservoirs) r.coupling = CMat::Identity(2, 2);
  const Scgf s(m);
  try {
    s.at(RVec::Zero(2));
    ADD_FAILURE() << "expected EigenvalueCollision";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EigenvalueCollision);
  }
}

TEST(Scgf, OneCoupledReservoirKeepsIrreducibility) {
  ModelConfig m = canonical_qubit();
  m.reservoirs[1].coupling = CMat::Zero(2, 2);
  RVec e(2);
  e << 0.0, 0.0;
  EXPECT_TRUE(Scgf(m).at(e).warnings.empty());
}
