#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fcs/errors.hpp"
#include "fcs/trajectories.hpp"
#include "oracles.hpp"

using namespace fcs;

namespace {

RVec k2(double a, double b) {
  RVec k(2);
  k << a, b;
  return k;
}

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(RateProcess, CanonicalQubitTransitions) {
  const RateProcess rp = build_rate_process(canonical_qubit());
  const auto r = oracle::canonical_qubit_rates();
  ASSERT_EQ(rp.transitions.size(), 4u);
  // Level 1 is excited.
  for (const auto& t : rp.transitions) {
    const double base = t.from == 1 ? r.down[t.reservoir] : r.up[t.reservoir];
    EXPECT_NEAR(t.omega, t.from == 1 ? 1.0 : -1.0, 1e-15);
    EXPECT_NEAR(t.rate, 0.01 * base, 1e-12);
  }
  EXPECT_NEAR(rp.exit_rates(1), 0.01 * (r.down[0] + r.down[1]), 1e-12);
  EXPECT_NEAR(rp.stationary().sum(), 1.0, 1e-15);
  EXPECT_LT((rp.stationary().transpose() * rp.tilted_generator(k2(0.0, 0.0))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RateProcess, DetailedBalancePerReservoir) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelConfig m = oracle::random_model(seed);
    const RateProcess rp = build_rate_process(m);
    for (const auto& a : rp.transitions)
      for (const auto& b : rp.transitions)
        if (a.reservoir == b.reservoir && a.from == b.to && a.to == b.from && a.omega > 0.0)
          EXPECT_NEAR(b.rate / a.rate, std::exp(-m.reservoirs[static_cast<std::size_t>(a.reservoir)].beta * a.omega), 1e-12);
  }
}

TEST(RateProcess, ZeroCouplingHasNoJumps) {
  ModelConfig m = canonical_qubit();
  for (auto& r : m.reservoirs) r.coupling = CMat::Zero(2, 2);
  const RateProcess rp = build_rate_process(m);
  EXPECT_TRUE(rp.transitions.empty());
  EXPECT_EQ(rp.exit_rates.norm(), 0.0);
}

TEST(RateProcess, DegenerateSpectrumRejected) {
  ModelConfig m = canonical_qubit();
  RVec e(3);
  e << 0.0, 0.0, 1.0;
  m.system = build_system(e.cast<cplx>().asDiagonal());
  for (auto& r : m.reservoirs) r.coupling = random_hermitian(3, 5);
  expect_code(ErrorCode::PopulationReductionInvalid, [&] { build_rate_process(m); });
}

TEST(RateProcess, PerronMatchesQuantumGenerator) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelConfig m = oracle::random_model(seed);
    const RateProcess rp = build_rate_process(m);
    const Scgf s(m);
    RVec k(static_cast<Eigen::Index>(m.reservoirs.size()));
    for (Eigen::Index a = 0; a < k.size(); ++a) k(a) = 0.3 * m.domain.hi[static_cast<std::size_t>(a)] - 0.1 * static_cast<double>(a);
    const double ref = s.f(k);
    EXPECT_NEAR(rp.perron(k), ref, 1e-10 * std::max(std::abs(ref), 1e-3)) << seed;
    // Finite horizons add log(pi.r l.1 / l.r) / T, with r, l the Perron right and left eigenvectors.
    const RMat mk = rp.tilted_generator(k);
    Eigen::EigenSolver<RMat> right(mk), left(mk.transpose());
    Eigen::Index ir = 0, il = 0;
    right.eigenvalues().real().maxCoeff(&ir);
    left.eigenvalues().real().maxCoeff(&il);
    const RVec r = right.eigenvectors().col(ir).real();
    const RVec l = left.eigenvectors().col(il).real();
    const double c = std::log(rp.stationary().dot(r) * l.sum() / l.dot(r));
    for (double horizon : {1e3, 1e5})
      EXPECT_NEAR((rp.finite_time_scgf(k, horizon) - rp.perron(k)) * horizon, c, 1e-8 * std::max(std::abs(c), 1.0))
          << seed;
  }
}

TEST(Sampling, DeterministicAcrossThreadCounts) {
  const RateProcess rp = build_rate_process(canonical_qubit());
  const TrajectoryEnsemble a = sample(rp, 300.0, 500, 42, 1);
  const TrajectoryEnsemble b = sample(rp, 300.0, 500, 42, 4);
  const TrajectoryEnsemble c = sample(rp, 300.0, 500, 43, 4);
  EXPECT_EQ((a.y - b.y).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((a.y - c.y).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sampling, EnergyIsConservedPathwise) {
  // y_1 + y_2 equals the system energy lost, so it takes values in {-1, 0, 1}.
  const RateProcess rp = build_rate_process(canonical_qubit());
  const TrajectoryEnsemble e = sample(rp, 500.0, 2000, 5);
  for (Eigen::Index i = 0; i < e.y.rows(); ++i) {
    const double s = e.y(i, 0) + e.y(i, 1);
    EXPECT_NEAR(s, std::round(s), 1e-12);
    EXPECT_LE(std::abs(s), 1.0 + 1e-12);
    EXPECT_NEAR(e.entropy(i), e.y(i, 0) + 2.0 * e.y(i, 1), 1e-12);
  }
}

TEST(Sampling, MeanCurrentAndScgfWithinErrorBars) {
  const ModelConfig m = canonical_qubit();
  const RateProcess rp = build_rate_process(m);
  const double horizon = 2000.0;
  const TrajectoryEnsemble e = sample(rp, horizon, 4000, 11);
  RVec pred(2);
  pred << -0.0031473, 0.0031473;
  const MeanCurrentEstimate mc = empirical_mean_currents(e, pred);
  for (int a = 0; a < 2; ++a) EXPECT_LT(std::abs(mc.estimate(a) - pred(a)), 4.0 * mc.std_error(a) + 1e-7);
  const ScgfEstimate se = empirical_scgf(e, rp, k2(0.2, 0.4));
  EXPECT_NEAR(se.prediction, rp.finite_time_scgf(k2(0.2, 0.4), horizon), 0.0);
  EXPECT_LT(std::abs(se.estimate - se.prediction), 4.0 * se.std_error + 1e-9);
  EXPECT_GT(se.effective_samples, 400.0);
}

TEST(Sampling, ZeroKappaScgfIsExactlyZero) {
  const RateProcess rp = build_rate_process(canonical_qubit());
  const TrajectoryEnsemble e = sample(rp, 100.0, 300, 3);
  EXPECT_EQ(empirical_scgf(e, rp, k2(0.0, 0.0)).estimate, 0.0);
}

TEST(Sampling, EffectiveSampleCollapseDetected) {
  const RateProcess rp = build_rate_process(canonical_qubit());
  const TrajectoryEnsemble e = sample(rp, 2000.0, 300, 3);
  expect_code(ErrorCode::EffectiveSampleCollapse, [&] { empirical_scgf(e, rp, k2(2.5, -1.0), 50, 1, 0.5); });
}

TEST(Clt, GaussianSamplesPassAndUniformFail) {
  RMat cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  const Eigen::LLT<RMat> llt(cov);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  RMat g(20000, 2), v(20000, 2);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    RVec z(2);
    z << n01(rng), n01(rng);
    g.row(i) = (llt.matrixL() * z).transpose();
    z << u(rng), u(rng);
    v.row(i) = (llt.matrixL() * z).transpose() * std::sqrt(3.0) / 2.0;
  }
  const CltReport ok = clt_test_samples(g, cov);
  EXPECT_TRUE(ok.pass) << ok.min_p;
  EXPECT_EQ(ok.rank, 2);
  EXPECT_FALSE(clt_test_samples(v, cov).pass);
}

TEST(Clt, SingularCovarianceTestedOnItsRange) {
  RMat cov(2, 2);
  cov << 1.0, -1.0, -1.0, 1.0;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  RMat b(10000, 2);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    const double z = n01(rng);
    b(i, 0) = z;
    b(i, 1) = -z;
  }
  const CltReport r = clt_test_samples(b, cov);
  EXPECT_EQ(r.rank, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.null_leak, 1e-12);
}

TEST(Clt, ShortHorizonIsRejected) {
  const ModelConfig m = canonical_qubit();
  const RateProcess rp = build_rate_process(m);
  const TrajectoryEnsemble e = sample(rp, 20.0, 10000, 21);
  CltParameters clt;
  clt.drift = RVec(2);
  clt.drift << -0.0031473, 0.0031473;
  clt.b_mean = RVec::Zero(2);
  clt.covariance = 0.0065892 * (RMat(2, 2) << 1.0, -1.0, -1.0, 1.0).finished();
  EXPECT_FALSE(clt_test(e, clt, 1.0).pass);
}

TEST(Lattice, StepOfBohrFrequencies) {
  EXPECT_NEAR(lattice_step({-1.0, 0.0, 1.0}), 1.0, 1e-15);
  EXPECT_NEAR(lattice_step({-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5}), 0.5, 1e-12);
  EXPECT_NEAR(lattice_step({-0.9, -0.6, 0.0, 0.6, 0.9}), 0.3, 1e-12);
  EXPECT_EQ(lattice_step({-std::sqrt(2.0), -1.0, 0.0, 1.0, std::sqrt(2.0)}), 0.0);
  EXPECT_EQ(lattice_step({0.0}), 0.0);
}

TEST(Histogram, EntropyReversalIsSuppressed) {
  const RateProcess rp = build_rate_process(canonical_qubit());
  const TrajectoryEnsemble e = sample(rp, 200.0, 20000, 4);
  const auto rows = entropy_histogram(e, 12, 30);
  ASSERT_FALSE(rows.empty());
  double num = 0.0, den = 0.0;
  for (const auto& r : rows) {
    EXPECT_GT(r.s, 0.0);
    num += r.log_ratio * r.s;
    den += r.s * r.s;
  }
  // Least-squares slope of the log ratio against s; the fluctuation relation predicts -1.
  EXPECT_LT(num / den, 0.0);
}
