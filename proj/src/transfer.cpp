#include "fcs/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fcs/errors.hpp"

namespace fcs {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

CompressedDynamics::CompressedDynamics(const FiniteVolumeModel& fv, const Propagator& prop, const RVec& kappa,
                                       double t_micro, double tau)
    : d_(fv.sys_dim), rd_(fv.res_dim), t_(t_micro), tau_(tau), rho_ref_(fv.gibbs) {
  if (kappa.size() != static_cast<Eigen::Index>(fv.reservoir_energy.size()))
    fail(ErrorCode::ConfigError, "kappa length must equal reservoir count");
  RVec x = RVec::Zero(fv.dim);
  for (Eigen::Index k = 0; k < kappa.size(); ++k) x += kappa(k) * fv.full_energy(static_cast<int>(k));
  if (0.5 * x.cwiseAbs().maxCoeff() > 700.0) fail(ErrorCode::OverflowGuard, "kappa times reservoir energy too large");
  const RVec half = (-0.5 * x).array().exp();
  b_ = half.asDiagonal() * prop.unitary(t_micro) * half.cwiseInverse().asDiagonal();
}

CMat CompressedDynamics::up(const CMat& s) const {
  CMat out = CMat::Zero(d_ * rd_, d_ * rd_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) out.block(i * rd_, j * rd_, rd_, rd_).diagonal() = s(i, j) * rho_ref_.cast<cplx>();
  return out;
}

CMat CompressedDynamics::down(const CMat& a) const {
  CMat out(d_, d_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) out(i, j) = a.block(i * rd_, j * rd_, rd_, rd_).trace();
  return out;
}

CMat CompressedDynamics::step(const CMat& a) const {
  CMat tmp;
  tmp.noalias() = b_ * a;
  CMat out;
  out.noalias() = tmp * b_.adjoint();
  return out;
}

CMat CompressedDynamics::step_up(int i, int j) const {
  const CMat left = b_.middleCols(i * rd_, rd_) * rho_ref_.asDiagonal();
  CMat out;
  out.noalias() = left * b_.middleCols(j * rd_, rd_).adjoint();
  return out;
}

Superoperator CompressedDynamics::compressed() const { return compressed_power(1); }

Superoperator CompressedDynamics::compressed_power(int m) const {
  CMat mat(d_ * d_, d_ * d_);
  for (int j = 0; j < d_; ++j)
    for (int i = 0; i <= j; ++i) {
      CMat x = step_up(i, j);
      for (int s = 1; s < m; ++s) x = step(x);
      const CMat w = down(x);
      mat.col(i + d_ * j) = vec(w);
      // Z commutes with the adjoint, so E_ji maps to the adjoint image.
      if (i != j) mat.col(j + d_ * i) = vec(w.adjoint());
    }
  return {d_, mat};
}

CompressedDynamics compressed_step(const FiniteVolumeModel& fv, const Propagator& prop, const RVec& kappa, double tau) {
  if (fv.lambda == 0.0) fail(ErrorCode::ConfigError, "compressed_step needs lambda != 0; use explicit time");
  return {fv, prop, kappa, tau / (fv.lambda * fv.lambda), tau};
}

double fit_block_decay(const std::vector<double>& norms) {
  const std::size_t first = norms.size() >= 3 ? 1 : 0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double n = 0.0;
  for (std::size_t i = first; i < norms.size(); ++i) {
    const double x = static_cast<double>(i);
    const double y = std::log(std::max(norms[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1.0;
  }
  if (n < 2.0) return 0.0;
  return std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

PolymerBlocks extract_blocks(const CompressedDynamics& cd, int n_max, double recurrence_time) {
  if (n_max < 1) fail(ErrorCode::ConfigError, "n_max must be >= 1");
  if (n_max * cd.t_micro() > recurrence_time)
    fail(ErrorCode::RecurrenceHorizonExceeded, "n_max * t = " + fmt(n_max * cd.t_micro()) +
                                                   " exceeds recurrence time " + fmt(recurrence_time));
  const int d = cd.sys_dim();
  std::vector<CMat> mats(static_cast<std::size_t>(n_max), CMat(d * d, d * d));
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) {
      CMat x = cd.step_up(i, j);
      for (int n = 0; n < n_max; ++n) {
        const CMat w = cd.down(x);
        mats[static_cast<std::size_t>(n)].col(i + d * j) = vec(w);
        if (i != j) mats[static_cast<std::size_t>(n)].col(j + d * i) = vec(w.adjoint());
        if (n + 1 < n_max) x = cd.step(x - cd.up(w));
      }
    }
  PolymerBlocks pb;
  pb.tau = cd.tau();
  pb.t_micro = cd.t_micro();
  for (auto& m : mats) {
    pb.norms.push_back(Eigen::JacobiSVD<CMat>(m).singularValues()(0));
    pb.W.emplace_back(d, std::move(m));
  }
  pb.c_hat = fit_block_decay(pb.norms);
  return pb;
}

CMat TransferOperator::compressed_power(int m, bool use_deformed) const {
  const CMat& t = use_deformed ? deformed : matrix;
  CMat p = CMat::Identity(t.rows(), t.cols());
  for (int i = 0; i < m; ++i) p = t * p;
  return p.topLeftCorner(d2, d2);
}

TransferOperator build_transfer(const PolymerBlocks& blocks, int n_block) {
  if (n_block < 1 || blocks.W.empty()) fail(ErrorCode::ConfigError, "n_block must be >= 1 and blocks nonempty");
  TransferOperator t;
  t.n_block = n_block;
  t.d2 = static_cast<int>(blocks.W.front().matrix().rows());
  t.t_micro = blocks.t_micro;
  const int q = t.d2;
  t.matrix = CMat::Zero(n_block * q, n_block * q);
  // Blocks beyond the extracted ones are taken as zero.
  const int known = std::min(n_block, static_cast<int>(blocks.W.size()));
  for (int n = 0; n < known; ++n) t.matrix.block(n * q, 0, q, q) = blocks.W[static_cast<std::size_t>(n)].matrix();
  for (int n = 1; n < n_block; ++n) t.matrix.block((n - 1) * q, n * q, q, q) = CMat::Identity(q, q);
  t.deformed = t.matrix;
  return t;
}

TransferOperator build_and_deform(const PolymerBlocks& blocks, int n_block, std::optional<double> delta) {
  TransferOperator t = build_transfer(blocks, n_block);
  t.delta = delta.value_or(-0.5 * std::log(blocks.c_hat));
  const int q = t.d2;
  for (int n = 0; n < n_block; ++n)
    for (int m = 0; m < n_block; ++m) t.deformed.block(n * q, m * q, q, q) *= std::exp((n - m) * t.delta);

  Eigen::ComplexEigenSolver<CMat> es(t.deformed, true);
  const CVec ev = es.eigenvalues();
  Eigen::Index lead = 0;
  ev.cwiseAbs().maxCoeff(&lead);
  double second = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (i != lead) second = std::max(second, std::abs(ev(i)));
  t.leading = ev(lead);
  t.gap = std::abs(t.leading) - second;
  if (!(t.gap > 1e-12 * std::abs(t.leading)))
    fail(ErrorCode::DeformationTooWeak, "no isolated leading eigenvalue; gap " + fmt(t.gap));
  t.f_transfer = std::log(std::abs(t.leading)) / t.t_micro;

  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(q))));
  CMat g = unvec(es.eigenvectors().col(lead).head(q), d);
  const cplx tr = g.trace();
  if (std::abs(tr) > 0.0) {
    g /= tr;
    Eigen::SelfAdjointEigenSolver<CMat> pos(0.5 * (g + g.adjoint()));
    t.leading_positive = hermiticity_residual(g) < 1e-8 && pos.eigenvalues().minCoeff() > 0.0 &&
                         std::abs(t.leading.imag()) <= 1e-10 * std::abs(t.leading) && t.leading.real() > 0.0;
  }
  return t;
}

}  // namespace fcs
