#include "fcs/finite_volume.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "fcs/errors.hpp"
#include "fcs/quadrature.hpp"
#include "fcs/scgf.hpp"

namespace fcs {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

using Key = std::vector<long long>;

Key quantize(const RVec& x, double tol) {
  Key k(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) k[static_cast<std::size_t>(i)] = std::llround(x(i) / tol);
  return k;
}

double energy_tol(const FiniteVolumeModel& fv) {
  double scale = 1.0;
  for (const auto& e : fv.reservoir_energy) scale = std::max(scale, e.cwiseAbs().maxCoeff());
  return 1e-9 * scale;
}

}  // namespace

std::vector<Mode> discretize_reservoir(const ReservoirSpec& res, int n_modes, double lo, double hi,
                                       DiscretizationScheme scheme) {
  if (n_modes < 1 || !(hi > lo) || lo < 0.0) fail(ErrorCode::EmptyRange, "mode range must satisfy 0 <= lo < hi");
  std::vector<Mode> out;
  if (scheme == DiscretizationScheme::Midpoint) {
    const double dx = (hi - lo) / n_modes;
    for (int j = 0; j < n_modes; ++j) {
      const double x = lo + (j + 0.5) * dx;
      out.push_back({x, std::sqrt(res.density(x) * dx)});
    }
    return out;
  }
  // Gauss-Legendre nodes on [lo, hi]; zeros come back nonnegative and ascending.
  const auto zeros = boost::math::legendre_p_zeros<double>(n_modes);
  std::vector<std::pair<double, double>> nw;
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n_modes, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nw.push_back({z, w});
    if (z != 0.0) nw.push_back({-z, w});
  }
  std::sort(nw.begin(), nw.end());
  for (const auto& [z, w] : nw) {
    const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * z;
    out.push_back({x, std::sqrt(res.density(x) * 0.5 * (hi - lo) * w)});
  }
  return out;
}

double FiniteVolumeModel::min_spacing() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ms : modes)
    for (std::size_t j = 1; j < ms.size(); ++j) best = std::min(best, std::abs(ms[j].xi - ms[j - 1].xi));
  return best;
}

double FiniteVolumeModel::recurrence_time() const { return 2.0 * std::numbers::pi / min_spacing(); }

RVec FiniteVolumeModel::full_energy(int k) const {
  return reservoir_energy[static_cast<std::size_t>(k)].replicate(sys_dim, 1);
}

FiniteVolumeModel assemble(const SystemSpec& sys, const std::vector<ReservoirSpec>& reservoirs,
                           const std::vector<std::vector<Mode>>& modes, const std::vector<int>& nmax, double lambda,
                           int dim_cap) {
  if (modes.size() != reservoirs.size() || nmax.size() != reservoirs.size())
    fail(ErrorCode::ConfigError, "modes and nmax need one entry per reservoir");
  FiniteVolumeModel fv;
  fv.sys_dim = sys.dim;
  fv.lambda = lambda;
  fv.modes = modes;
  fv.nmax = nmax;

  struct Flat {
    int k;
    Mode m;
    int levels;
  };
  std::vector<Flat> all;
  double dim = 1.0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (nmax[k] < 1) fail(ErrorCode::ConfigError, "nmax must be >= 1");
    for (const auto& m : modes[k]) {
      all.push_back({static_cast<int>(k), m, nmax[k] + 1});
      dim *= nmax[k] + 1;
    }
  }
  if (dim * sys.dim > dim_cap)
    fail(ErrorCode::DimensionCap, "finite-volume dimension " + fmt(dim * sys.dim) + " exceeds cap " + fmt(dim_cap));
  fv.res_dim = static_cast<int>(dim);
  fv.dim = fv.res_dim * sys.dim;
  const int r_dim = fv.res_dim;

  std::vector<int> stride(all.size());
  int s = 1;
  for (std::size_t j = all.size(); j-- > 0;) {
    stride[j] = s;
    s *= all[j].levels;
  }

  fv.reservoir_energy.assign(reservoirs.size(), RVec::Zero(r_dim));
  RVec log_w = RVec::Zero(r_dim);
  for (const auto& r : reservoirs) fv.betas.push_back(r.beta);
  for (int r = 0; r < r_dim; ++r)
    for (std::size_t j = 0; j < all.size(); ++j) {
      const int n = (r / stride[j]) % all[j].levels;
      fv.reservoir_energy[static_cast<std::size_t>(all[j].k)](r) += all[j].m.xi * n;
      log_w(r) -= reservoirs[static_cast<std::size_t>(all[j].k)].beta * all[j].m.xi * n;
    }
  fv.gibbs = (log_w.array() - log_w.maxCoeff()).exp();
  fv.gibbs /= fv.gibbs.sum();
  for (const auto& f : all) {
    const double tail = std::exp(-reservoirs[static_cast<std::size_t>(f.k)].beta * f.m.xi * f.levels);
    if (tail > 1e-6)
      fv.warnings.push_back("TruncationWarning: mode xi=" + fmt(f.m.xi) + " of reservoir '" +
                            reservoirs[static_cast<std::size_t>(f.k)].label + "' has thermal tail mass " + fmt(tail));
  }

  const int n = fv.dim;
  CMat h = CMat::Zero(n, n);
  for (int a = 0; a < sys.dim; ++a)
    for (int b = 0; b < sys.dim; ++b) {
      if (sys.hamiltonian(a, b) == cplx(0.0)) continue;
      for (int r = 0; r < r_dim; ++r) h(a * r_dim + r, b * r_dim + r) += sys.hamiltonian(a, b);
    }
  RVec free_res = RVec::Zero(r_dim);
  for (const auto& e : fv.reservoir_energy) free_res += e;
  for (int a = 0; a < sys.dim; ++a)
    for (int r = 0; r < r_dim; ++r) h(a * r_dim + r, a * r_dim + r) += free_res(r);

  // lambda g (D kron a^dag + D^* kron a)
  for (std::size_t j = 0; j < all.size(); ++j) {
    const CMat& d = reservoirs[static_cast<std::size_t>(all[j].k)].coupling;
    const double lg = lambda * all[j].m.g;
    if (lg == 0.0) continue;
    for (int r = 0; r < r_dim; ++r) {
      const int occ = (r / stride[j]) % all[j].levels;
      if (occ + 1 >= all[j].levels) continue;
      const double amp = lg * std::sqrt(static_cast<double>(occ + 1));
      const int up = r + stride[j];
      for (int a = 0; a < sys.dim; ++a)
        for (int b = 0; b < sys.dim; ++b) {
          if (d(a, b) == cplx(0.0)) continue;
          h(a * r_dim + up, b * r_dim + r) += amp * d(a, b);
          h(b * r_dim + r, a * r_dim + up) += amp * std::conj(d(a, b));
        }
    }
  }
  fv.hamiltonian = std::move(h);
  return fv;
}

Propagator::Propagator(const FiniteVolumeModel& fv) {
  const CMat& h = fv.hamiltonian;
  const auto n = static_cast<lapack_int>(h.rows());
  w_.resize(n);
  real_ = h.imag().cwiseAbs().maxCoeff() == 0.0;
  // Diagonal H (lambda = 0): exact eigenvectors, so degenerate levels are never mixed.
  if (real_ && (h.real() - RMat(h.real().diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0) {
    w_ = h.real().diagonal();
    vr_ = RMat::Identity(n, n);
    return;
  }
  if (real_) {
    vr_ = h.real();
    if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, vr_.data(), n, w_.data()) != 0)
      throw std::runtime_error("dsyevd failed");
  } else {
    vc_ = h;
    if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, reinterpret_cast<lapack_complex_double*>(vc_.data()), n,
                       w_.data()) != 0)
      throw std::runtime_error("zheevd failed");
  }
}

CMat Propagator::unitary(double t) const {
  if (real_) {
    const RVec c = (t * w_).array().cos();
    const RVec s = -(t * w_).array().sin();
    CMat u(vr_.rows(), vr_.cols());
    u.real().noalias() = (vr_ * c.asDiagonal()) * vr_.transpose();
    u.imag().noalias() = (vr_ * s.asDiagonal()) * vr_.transpose();
    return u;
  }
  const CVec phase = (-I * t * w_.cast<cplx>()).array().exp();
  return vc_ * phase.asDiagonal() * vc_.adjoint();
}

RMat transition_weights(const FiniteVolumeModel& fv, const CMat& u, const CMat& rho_e) {
  const int d = fv.sys_dim;
  const int rd = fv.res_dim;
  RMat w = RMat::Zero(fv.dim, rd);
  for (int r = 0; r < rd; ++r)
    for (int s = 0; s < d; ++s)
      for (int sp = 0; sp < d; ++sp) {
        const cplx c = rho_e(s, sp);
        if (c == cplx(0.0)) continue;
        const auto col_s = u.col(s * rd + r);
        const auto col_sp = u.col(sp * rd + r);
        if (s == sp)
          w.col(r) += c.real() * col_s.cwiseAbs2();
        else
          w.col(r) += (c * col_s.array() * col_sp.array().conjugate()).real().matrix();
      }
  return w;
}

TpmDistribution tpm_from_weights(const FiniteVolumeModel& fv, const RMat& weights, double t) {
  const auto nk = static_cast<Eigen::Index>(fv.reservoir_energy.size());
  const double tol = energy_tol(fv);
  std::map<Key, int> ids;
  std::vector<RVec> centers;
  std::vector<int> cls(static_cast<std::size_t>(fv.res_dim));
  for (int r = 0; r < fv.res_dim; ++r) {
    RVec x(nk);
    for (Eigen::Index k = 0; k < nk; ++k) x(k) = fv.reservoir_energy[static_cast<std::size_t>(k)](r);
    const auto [it, fresh] = ids.emplace(quantize(x, tol), static_cast<int>(centers.size()));
    if (fresh) centers.push_back(x);
    cls[static_cast<std::size_t>(r)] = it->second;
  }
  const auto nc = static_cast<Eigen::Index>(centers.size());
  RMat pair = RMat::Zero(nc, nc);  // (class after, class before)
  for (int r = 0; r < fv.res_dim; ++r) {
    const int c0 = cls[static_cast<std::size_t>(r)];
    const double pr = fv.gibbs(r);
    for (int a = 0; a < fv.dim; ++a) pair(cls[static_cast<std::size_t>(a % fv.res_dim)], c0) += weights(a, r) * pr;
  }
  std::map<Key, std::pair<RVec, double>> atoms;
  for (Eigen::Index c1 = 0; c1 < nc; ++c1)
    for (Eigen::Index c0 = 0; c0 < nc; ++c0) {
      const RVec y = centers[static_cast<std::size_t>(c1)] - centers[static_cast<std::size_t>(c0)];
      auto [it, fresh] = atoms.emplace(quantize(y, tol), std::make_pair(y, 0.0));
      it->second.second += pair(c1, c0);
    }
  TpmDistribution out;
  out.t = t;
  for (const auto& [key, v] : atoms) {
    if (v.second == 0.0) continue;
    out.support.push_back(v.first);
    out.probabilities.push_back(v.second);
  }
  return out;
}

TpmDistribution tpm_distribution(const FiniteVolumeModel& fv, const Propagator& prop, const CMat& rho_e, double t) {
  validate_state(rho_e);
  return tpm_from_weights(fv, transition_weights(fv, prop.unitary(t), rho_e), t);
}

cplx characteristic_from_weights(const FiniteVolumeModel& fv, const RMat& weights, const CVec& kappa) {
  CVec x_kappa = CVec::Zero(fv.res_dim);
  double max_re = 0.0;
  for (std::size_t k = 0; k < fv.reservoir_energy.size(); ++k) {
    const auto kk = kappa(static_cast<Eigen::Index>(k));
    x_kappa += kk * fv.reservoir_energy[k].cast<cplx>();
    max_re += std::abs(kk.real()) * fv.reservoir_energy[k].cwiseAbs().maxCoeff();
  }
  if (max_re > 700.0) fail(ErrorCode::OverflowGuard, "kappa times reservoir energy exceeds exp range");
  const CVec after = (-x_kappa.array()).exp().replicate(fv.sys_dim, 1);
  const CVec before = fv.gibbs.cast<cplx>().array() * x_kappa.array().exp();
  return after.transpose() * (weights.cast<cplx>() * before);
}

cplx characteristic_function(const FiniteVolumeModel& fv, const Propagator& prop, const CMat& rho_e, const CVec& kappa,
                             double t) {
  validate_state(rho_e);
  return characteristic_from_weights(fv, transition_weights(fv, prop.unitary(t), rho_e), kappa);
}

CorrelationTable correlation_table(const EffectiveDensity& g, double coupling_norm_sq, double kappa,
                                   const std::vector<double>& t_grid, const QuadratureParams& q) {
  CorrelationTable out;
  for (double t : t_grid) {
    QuadratureParams qt = q;
    // Resolve the oscillation: about one panel per half period.
    qt.base_panels = std::max(q.base_panels, static_cast<int>(std::ceil(std::abs(t) * (g.upper() - g.lower()) / 3.0)));
    const auto integrand = [&](double x) { return g(x) * std::exp(cplx(-kappa * x, -t * x)); };
    out.t.push_back(t);
    out.p.push_back(coupling_norm_sq * std::abs(integrate_complex(integrand, g.lower(), g.upper(), g.breakpoints(), qt)));
  }
  return out;
}

DecayFit fit_exponential_decay(const CorrelationTable& table, double tail_start, double max_residual) {
  std::vector<double> ts;
  std::vector<double> ls;
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    if (table.t[i] < tail_start) continue;
    ts.push_back(table.t[i]);
    ls.push_back(std::log(std::max(table.p[i], 1e-300)));
  }
  if (ts.size() < 3) fail(ErrorCode::NoExponentialDecay, "fewer than 3 points in the fit window");
  const auto n = static_cast<Eigen::Index>(ts.size());
  RMat a(n, 2);
  RVec b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = ts[static_cast<std::size_t>(i)];
    b(i) = ls[static_cast<std::size_t>(i)];
  }
  const RVec coef = a.colPivHouseholderQr().solve(b);
  const double ss_res = (a * coef - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).matrix().squaredNorm();
  DecayFit fit{std::exp(coef(0)), -coef(1), ss_tot > 0.0 ? ss_res / ss_tot : 0.0};
  if (!(fit.alpha > 0.0) || fit.residual > max_residual)
    fail(ErrorCode::NoExponentialDecay,
         "log-linear fit: rate " + fmt(fit.alpha) + ", residual " + fmt(fit.residual) + " (threshold " + fmt(max_residual) + ")");
  return fit;
}

FiniteVolumeModel build_finite_volume(const ModelConfig& model, const FvBuildSpec& spec, double lambda) {
  double lo = 0.0;
  double hi = 0.0;
  if (spec.range) {
    std::tie(lo, hi) = *spec.range;
  } else {
    lo = std::max(spec.band_center - spec.band_scale * lambda * lambda, spec.band_min);
    hi = spec.band_center + spec.band_scale * lambda * lambda;
  }
  if (spec.nmax.size() != model.reservoirs.size()) fail(ErrorCode::ConfigError, "nmax needs one entry per reservoir");
  std::vector<std::vector<Mode>> modes;
  for (const auto& r : model.reservoirs) modes.push_back(discretize_reservoir(r, spec.n_modes, lo, hi, spec.scheme));
  return assemble(model.system, model.reservoirs, modes, spec.nmax, lambda, spec.dim_cap);
}

WeakCouplingTable weak_coupling_compare(const ModelConfig& model, const Scgf& scgf, const std::vector<RVec>& kappas,
                                        const std::vector<double>& lambdas, double c_time, const FvBuildSpec& spec,
                                        InitialState initial) {
  const CMat rho_e =
      initial == InitialState::FgrStationary ? stationary_state(scgf.generator()) : model.initial_state();
  std::vector<double> fgr;
  for (const auto& k : kappas) fgr.push_back(scgf.at(k).eigenvalue.real());

  WeakCouplingTable table;
  for (double lam : lambdas) {
    std::vector<double> devs;
    if (lam == 0.0) {
      for (const auto& k : kappas) table.rows.push_back({0.0, k, 0.0, 0.0, 0.0, 0.0});
      devs.assign(kappas.size(), 0.0);
    } else {
      const double t = c_time / (lam * lam);
      const FiniteVolumeModel fv = build_finite_volume(model, spec, lam);
      if (t > fv.recurrence_time())
        fail(ErrorCode::RecurrenceHorizonExceeded,
             "t = " + fmt(t) + " exceeds recurrence time " + fmt(fv.recurrence_time()));
      const Propagator prop(fv);
      const RMat w = transition_weights(fv, prop.unitary(t), rho_e);
      for (std::size_t i = 0; i < kappas.size(); ++i) {
        const cplx chi = characteristic_from_weights(fv, w, kappas[i].cast<cplx>());
        const double rate = std::log(chi.real()) / t;
        const double pred = lam * lam * fgr[i];
        const double dev = std::abs(rate - pred) / std::abs(pred);
        table.rows.push_back({lam, kappas[i], t, rate, pred, dev});
        devs.push_back(dev);
      }
    }
    std::sort(devs.begin(), devs.end());
    const std::size_t m = devs.size();
    table.lambdas.push_back(lam);
    table.median_deviation.push_back(m == 0 ? 0.0 : (m % 2 ? devs[m / 2] : 0.5 * (devs[m / 2 - 1] + devs[m / 2])));
  }
  return table;
}

}  // namespace fcs
