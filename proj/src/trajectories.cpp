#include "fcs/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

#include "fcs/errors.hpp"
#include "fcs/stats.hpp"

namespace fcs {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Stream index reserved for jitter draws; sample streams use 0..N-1.
constexpr std::uint64_t kJitterStream = ~std::uint64_t{0};

}  // namespace

RMat RateProcess::tilted_generator(const RVec& kappa) const {
  if (kappa.size() != reservoir_count) fail(ErrorCode::ConfigError, "kappa length must equal reservoir count");
  const int n = state_count();
  RMat q = RMat::Zero(n, n);
  for (const auto& t : transitions) q(t.from, t.to) += t.rate * std::exp(-kappa(t.reservoir) * t.omega);
  q.diagonal() -= exit_rates;
  return q;
}

RVec RateProcess::stationary() const {
  const RMat qt = tilted_generator(RVec::Zero(reservoir_count)).transpose();
  Eigen::JacobiSVD<RMat> svd(qt, Eigen::ComputeFullV);
  RVec p = svd.matrixV().col(qt.cols() - 1);
  p /= p.sum();
  return p.cwiseMax(0.0) / p.cwiseMax(0.0).sum();
}

double RateProcess::perron(const RVec& kappa) const {
  Eigen::EigenSolver<RMat> es(tilted_generator(kappa), false);
  return es.eigenvalues().real().maxCoeff();
}

double RateProcess::finite_time_scgf(const RVec& kappa, double horizon) const {
  const double mu = perron(kappa);
  const int n = state_count();
  const RMat shifted = horizon * (tilted_generator(kappa) - mu * RMat::Identity(n, n));
  const RMat e = shifted.exp();
  return mu + std::log(stationary().dot(e * RVec::Ones(n))) / horizon;
}

RateProcess build_rate_process(const SystemSpec& sys, const std::vector<Coupling>& cs, double lambda,
                               const std::vector<double>& betas) {
  if (!sys.nondegenerate())
    fail(ErrorCode::PopulationReductionInvalid, "population reduction needs a nondegenerate system spectrum");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  RateProcess rp;
  rp.energies = sys.eigenvalues;
  rp.betas = betas;
  rp.lambda = lambda;
  rp.reservoir_count = static_cast<int>(cs.size());
  const int n = sys.level_count();
  rp.exit_rates = RVec::Zero(n);
  for (std::size_t k = 0; k < cs.size(); ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double m =
            (sys.projections[j] * cs[k].D * sys.projections[i] * cs[k].D.adjoint()).trace().real();
        const double w = sys.eigenvalues[i] - sys.eigenvalues[j];
        const double rate = lambda * lambda * two_pi * cs[k].G(w) * m;
        if (!(rate > 0.0)) continue;
        rp.transitions.push_back({i, j, static_cast<int>(k), w, rate});
        rp.exit_rates(i) += rate;
      }
  return rp;
}

RateProcess build_rate_process(const ModelConfig& model) {
  return build_rate_process(model.system, couplings(model), model.lambda, model.betas());
}

double lattice_step(const std::vector<double>& bohr_set) {
  double scale = 0.0;
  for (double w : bohr_set) scale = std::max(scale, std::abs(w));
  if (scale == 0.0) return 0.0;
  const double tol = 1e-9 * scale;
  double h = 0.0;
  for (double w : bohr_set) {
    double a = std::abs(w);
    if (a <= tol) continue;
    double b = h;
    while (b > tol) {
      const double r = std::fmod(a, b);
      a = b;
      b = (r > b - tol) ? 0.0 : r;
    }
    h = a;
  }
  // A step far below the frequencies means they are incommensurate at this tolerance.
  return h > 1e-6 * scale ? h : 0.0;
}

TrajectoryEnsemble sample(const RateProcess& rp, double horizon, int n_samples, std::uint64_t seed, int jobs) {
  if (!(horizon > 0.0) || n_samples < 1) fail(ErrorCode::ConfigError, "sample needs T > 0 and N >= 1");
  const int n = rp.state_count();
  const int nk = rp.reservoir_count;
  std::vector<std::vector<const Transition*>> out(static_cast<std::size_t>(n));
  for (const auto& t : rp.transitions) out[static_cast<std::size_t>(t.from)].push_back(&t);
  const RVec p = rp.stationary();

  TrajectoryEnsemble ens;
  ens.n_samples = n_samples;
  ens.horizon = horizon;
  ens.seed = seed;
  ens.betas = rp.betas;
  ens.y = RMat::Zero(n_samples, nk);

  auto run = [&](int begin, int end) {
    for (int s = begin; s < end; ++s) {
      auto rng = stream(seed, static_cast<std::uint64_t>(s));
      double u = stats::unit_uniform(rng());
      int e = 0;
      for (double acc = p(0); e + 1 < n && u >= acc; acc += p(++e)) {
      }
      double t = 0.0;
      while (true) {
        const double r = rp.exit_rates(e);
        if (!(r > 0.0)) break;
        t += -std::log1p(-stats::unit_uniform(rng())) / r;
        if (t > horizon) break;
        u = stats::unit_uniform(rng()) * r;
        const auto& opts = out[static_cast<std::size_t>(e)];
        std::size_t pick = 0;
        for (double acc = opts[0]->rate; pick + 1 < opts.size() && u >= acc; acc += opts[++pick]->rate) {
        }
        ens.y(s, opts[pick]->reservoir) += opts[pick]->omega;
        e = opts[pick]->to;
      }
    }
  };

  int workers = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n_samples);
  if (workers == 1) {
    run(0, n_samples);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (n_samples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w * chunk, std::min(n_samples, (w + 1) * chunk));
  }

  RVec beta(nk);
  for (int k = 0; k < nk; ++k) beta(k) = rp.betas[static_cast<std::size_t>(k)];
  ens.entropy = ens.y * beta;
  return ens;
}

MeanCurrentEstimate empirical_mean_currents(const TrajectoryEnsemble& ens, const RVec& prediction, int replicates,
                                            std::uint64_t seed) {
  const auto nk = ens.y.cols();
  MeanCurrentEstimate m;
  m.estimate = RVec(nk);
  m.std_error = RVec(nk);
  m.prediction = prediction;
  for (Eigen::Index k = 0; k < nk; ++k) {
    const RVec col = ens.y.col(k) / ens.horizon;
    const auto stat = [&col](std::span<const std::size_t> idx) {
      std::vector<double> v(idx.size());
      std::transform(idx.begin(), idx.end(), v.begin(), [&col](std::size_t i) { return col(static_cast<Eigen::Index>(i)); });
      return stats::mean(v);
    };
    const auto b = stats::bootstrap(static_cast<std::size_t>(ens.n_samples), stat, replicates, seed + static_cast<std::uint64_t>(k));
    m.estimate(k) = b.estimate;
    m.std_error(k) = b.std_error;
  }
  return m;
}

ScgfEstimate empirical_scgf(const TrajectoryEnsemble& ens, const RateProcess& rp, const RVec& kappa, int replicates,
                            std::uint64_t seed, double min_ess_fraction) {
  if (kappa.size() != ens.y.cols()) fail(ErrorCode::ConfigError, "kappa length must equal reservoir count");
  const RVec x = -(ens.y * kappa);
  const double shift = x.maxCoeff();
  std::vector<double> w(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) w[static_cast<std::size_t>(i)] = std::exp(x(i) - shift);

  ScgfEstimate r;
  r.kappa = kappa;
  std::vector<double> w2(w.size());
  std::transform(w.begin(), w.end(), w2.begin(), [](double v) { return v * v; });
  const double sw = stats::pairwise_sum(w);
  r.effective_samples = sw * sw / stats::pairwise_sum(w2);
  if (r.effective_samples < min_ess_fraction * ens.n_samples)
    fail(ErrorCode::EffectiveSampleCollapse,
         "effective sample size " + std::to_string(r.effective_samples) + " of " + std::to_string(ens.n_samples));

  const auto stat = [&](std::span<const std::size_t> idx) {
    std::vector<double> v(idx.size());
    std::transform(idx.begin(), idx.end(), v.begin(), [&w](std::size_t i) { return w[i]; });
    return (shift + std::log(stats::mean(v))) / ens.horizon;
  };
  const auto b = stats::bootstrap(w.size(), stat, replicates, seed);
  r.estimate = b.estimate;
  r.std_error = b.std_error;
  r.prediction = rp.finite_time_scgf(kappa, ens.horizon);
  r.asymptotic_prediction = rp.perron(kappa);
  return r;
}

namespace {

// z = L^{-1} V^T b with L L^T = V^T C V.
CltReport whitened_test(const RMat& b, const RMat& cov, const RMat& range, const RMat& kernel, double alpha) {
  CltReport rep;
  rep.alpha = alpha;
  rep.rank = static_cast<int>(range.cols());
  if (rep.rank == 0) return rep;
  const RMat c = range.transpose() * cov * range;
  Eigen::LLT<RMat> llt(c);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NonConvexObjective, "projected CLT covariance is not positive");
  const RMat z = llt.matrixL().solve(range.transpose() * b.transpose());  // rank x N
  const auto n = static_cast<std::size_t>(z.cols());
  for (int j = 0; j < rep.rank; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = z(j, static_cast<Eigen::Index>(i));
    const double d = stats::ks_statistic(std::move(col), stats::normal_cdf);
    rep.ks.push_back(d);
    rep.p_values.push_back(stats::ks_pvalue(d, n));
  }
  std::vector<double> m2(n);
  for (std::size_t i = 0; i < n; ++i) m2[i] = z.col(static_cast<Eigen::Index>(i)).squaredNorm();
  const double r = rep.rank;
  rep.mahalanobis_ks = stats::ks_statistic(std::move(m2), [r](double x) { return stats::chi_squared_cdf(x, r); });
  rep.mahalanobis_p = stats::ks_pvalue(rep.mahalanobis_ks, n);
  rep.min_p = std::min(rep.mahalanobis_p, *std::min_element(rep.p_values.begin(), rep.p_values.end()));
  if (kernel.cols() > 0) rep.null_leak = std::sqrt((b * kernel).squaredNorm() / static_cast<double>(b.rows()));
  rep.pass = rep.min_p >= alpha / (rep.rank + 1);
  return rep;
}

std::pair<RMat, RMat> split_range(const RMat& sigma) {
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (sigma + sigma.transpose()));
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> in, out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    (es.eigenvalues()(i) > 1e-9 * top ? in : out).push_back(i);
  RMat range(sigma.rows(), static_cast<Eigen::Index>(in.size()));
  RMat kernel(sigma.rows(), static_cast<Eigen::Index>(out.size()));
  for (std::size_t i = 0; i < in.size(); ++i) range.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(in[i]);
  for (std::size_t i = 0; i < out.size(); ++i) kernel.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(out[i]);
  return {range, kernel};
}

}  // namespace

CltReport clt_test_samples(const RMat& b, const RMat& covariance, double alpha) {
  const auto [range, kernel] = split_range(covariance);
  return whitened_test(b, covariance, range, kernel, alpha);
}

CltReport clt_test(const TrajectoryEnsemble& ens, const CltParameters& clt, double lattice_step, double alpha,
                   std::uint64_t seed) {
  const auto nk = ens.y.cols();
  if (clt.drift.size() != nk) fail(ErrorCode::ConfigError, "CLT drift length must equal reservoir count");
  RMat y = ens.y;
  if (lattice_step > 0.0) {
    auto rng = stream(seed, kJitterStream);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      for (Eigen::Index k = 0; k < nk; ++k) y(i, k) += lattice_step * (stats::unit_uniform(rng()) - 0.5);
  }
  const double t = ens.horizon;
  const RMat b = (y.rowwise() - (t * clt.drift).transpose()) / std::sqrt(t);
  const RMat cov = clt.covariance + (lattice_step * lattice_step / (12.0 * t)) * RMat::Identity(nk, nk);
  const auto [range, kernel] = split_range(clt.covariance);
  return whitened_test(b, cov, range, kernel, alpha);
}

std::vector<EntropyHistogramRow> entropy_histogram(const TrajectoryEnsemble& ens, int bins, long min_count) {
  if (bins < 1) fail(ErrorCode::ConfigError, "histogram needs at least one bin");
  const RVec s = ens.entropy / ens.horizon;
  const double top = s.cwiseAbs().maxCoeff();
  std::vector<EntropyHistogramRow> rows;
  if (top == 0.0) return rows;
  const double width = top / (bins + 0.5);
  std::vector<long> pos(static_cast<std::size_t>(bins) + 1, 0), neg(static_cast<std::size_t>(bins) + 1, 0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const long k = std::lround(s(i) / width);
    const auto a = static_cast<std::size_t>(std::min<long>(std::labs(k), bins));
    (k >= 0 ? pos : neg)[a] += 1;
  }
  for (int k = 1; k <= bins; ++k) {
    const auto a = static_cast<std::size_t>(k);
    if (pos[a] < min_count || neg[a] < min_count) continue;
    rows.push_back({k * width, std::log(static_cast<double>(neg[a]) / static_cast<double>(pos[a])) / ens.horizon,
                    pos[a], neg[a]});
  }
  return rows;
}

}  // namespace fcs
