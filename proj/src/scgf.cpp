#include "fcs/scgf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
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

bool fgr_irreducible(const DeformedLindblad& gen, const SystemSpec& sys) {
  std::vector<CMat> ds;
  std::vector<EffectiveDensity> gs;
  for (const auto& c : gen.couplings()) {
    ds.push_back(c.D);
    gs.push_back(c.G);
  }
  return check_fgr_irreducibility(sys, ds, gs).irreducible;
}

double normwise(const auto& a, const auto& b, double floor = 0.0) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), floor});
  if (scale == 0.0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

ScgfResult leading_eigenvalue(const Superoperator& l, double lambda) {
  const int d = l.dim();
  const CMat& m = l.matrix();
  Eigen::ComplexEigenSolver<CMat> es(m, false);
  const CVec ev = es.eigenvalues();
  Eigen::Index lead = 0;
  ev.real().maxCoeff(&lead);
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (i != lead) second = std::max(second, ev(i).real());

  ScgfResult r;
  const cplx mu = ev(lead);
  const double raw_gap = mu.real() - second;
  if (!(raw_gap > 1e-10))
    fail(ErrorCode::EigenvalueCollision, "leading eigenvalue not isolated, gap " + fmt(raw_gap));
  if (std::abs(mu.imag()) > 1e-10 * std::max(1.0, std::abs(mu)))
    fail(ErrorCode::NonRealLeader, "leading eigenvalue has imaginary part " + fmt(mu.imag()));

  // Right and left null vectors of L - mu from one SVD.
  const CMat shifted = m - mu * CMat::Identity(m.rows(), m.cols());
  Eigen::JacobiSVD<CMat> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto last = m.cols() - 1;
  CVec rv = svd.matrixV().col(last);
  CVec lv = svd.matrixU().col(last);
  CMat rm = unvec(rv, d);
  cplx tr = rm.trace();
  if (std::abs(tr) < 1e-12) tr = rv(0);
  const cplx phase = tr / std::abs(tr);
  rv *= static_cast<double>(d) / std::abs(tr) / phase;
  lv /= std::conj(lv.dot(rv));  // Eigen's dot conjugates the first argument

  r.eigenvalue = cplx(mu.real(), 0.0);
  r.f = lambda * lambda * mu.real();
  r.gap = lambda * lambda * raw_gap;
  r.right_eigvec = unvec(rv, d);
  r.left_eigvec = unvec(lv, d);
  r.converged = true;

  const CMat herm = 0.5 * (r.right_eigvec + r.right_eigvec.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> pos(herm);
  if (hermiticity_residual(r.right_eigvec) > 1e-8 * d || pos.eigenvalues().minCoeff() <= 0.0)
    r.warnings.push_back("right eigenvector not positive definite");
  return r;
}

Scgf::Scgf(const ModelConfig& model)
    : gen_(model), lambda_(model.lambda), domain_(model.domain), irreducible_(fgr_irreducible(gen_, model.system)) {
  if (domain_.size() != model.reservoirs.size()) fail(ErrorCode::ConfigError, "domain box size must match reservoirs");
}

Scgf::Scgf(DeformedLindblad generator, double lambda, DomainBox domain, bool irreducible)
    : gen_(std::move(generator)), lambda_(lambda), domain_(std::move(domain)), irreducible_(irreducible) {}

ScgfResult Scgf::at(const RVec& kappa) const {
  DeformationVector dv(kappa, domain_);
  ScgfResult r = leading_eigenvalue(gen_.generator(kappa), lambda_);
  r.kappa = kappa;
  if (!irreducible_) r.warnings.push_back("SimpleEigenvalueNotGuaranteed");
  return r;
}

RVec Scgf::gradient(const ScgfResult& r) const {
  const CVec lv = vec(r.left_eigvec);
  const CVec rv = vec(r.right_eigvec);
  RVec g(reservoir_count());
  for (int a = 0; a < reservoir_count(); ++a)
    g(a) = lambda_ * lambda_ * lv.dot(gen_.derivative(r.kappa, a).matrix() * rv).real();
  return g;
}

RMat Scgf::hessian(const ScgfResult& r) const {
  const int n = reservoir_count();
  const CVec lv = vec(r.left_eigvec);
  const CVec rv = vec(r.right_eigvec);
  const CMat lm = gen_.generator(r.kappa).matrix();
  const auto m = lm.rows();

  // Bordered system [[L - mu, r], [l^*, 0]] [x; c] = [-(dL - dmu) r; 0] gives dr with <l, dr> = 0.
  CMat border = CMat::Zero(m + 1, m + 1);
  border.topLeftCorner(m, m) = lm - r.eigenvalue * CMat::Identity(m, m);
  border.topRightCorner(m, 1) = rv;
  border.bottomLeftCorner(1, m) = lv.adjoint();
  const Eigen::PartialPivLU<CMat> lu(border);

  std::vector<CMat> dl;
  std::vector<CVec> dr;
  for (int a = 0; a < n; ++a) {
    dl.push_back(gen_.derivative(r.kappa, a).matrix());
    const cplx dmu = lv.dot(dl.back() * rv);
    CVec rhs = CVec::Zero(m + 1);
    rhs.head(m) = -(dl.back() * rv - dmu * rv);
    dr.push_back(lu.solve(rhs).head(m));
  }
  RMat h(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const cplx v = lv.dot(gen_.second_derivative(r.kappa, a, b).matrix() * rv) + lv.dot(dl[a] * dr[b]) +
                     lv.dot(dl[b] * dr[a]);
      h(a, b) = lambda_ * lambda_ * v.real();
    }
  return 0.5 * (h + h.transpose());
}

CMat stationary_state(const DeformedLindblad& gen) {
  const RVec zero = RVec::Zero(gen.reservoir_count());
  const ScgfResult r = leading_eigenvalue(gen.generator(zero).dual(), 1.0);
  CMat rho = 0.5 * (r.right_eigvec + r.right_eigvec.adjoint());
  return rho / rho.trace().real();
}

GcReport gc_symmetry_defect(const Scgf& scgf, const std::vector<double>& betas, const std::vector<double>& nu_grid) {
  const auto n = static_cast<Eigen::Index>(betas.size());
  const RVec b = Eigen::Map<const RVec>(betas.data(), n);
  GcReport rep;
  for (double nu : nu_grid) {
    const double f1 = scgf.f(nu * b);
    const double f2 = scgf.f((1.0 - nu) * b);
    rep.nu.push_back(nu);
    rep.f_nu.push_back(f1);
    rep.f_mirror.push_back(f2);
    rep.defect.push_back(std::abs(f1 - f2));
    rep.max_defect = std::max(rep.max_defect, rep.defect.back());
  }
  return rep;
}

TransportMoments transport_moments(const Scgf& scgf, const std::vector<double>& betas, std::optional<double> fd_step) {
  const int n = scgf.reservoir_count();
  const RVec zero = RVec::Zero(n);
  const ScgfResult r0 = scgf.at(zero);
  TransportMoments tm;
  const RVec g = scgf.gradient(r0);
  tm.covariance = scgf.hessian(r0);
  tm.mean_currents = -g;
  for (int k = 0; k < n; ++k) tm.entropy_production_rate += betas[static_cast<std::size_t>(k)] * tm.mean_currents(k);
  const double scale = tm.mean_currents.cwiseAbs().maxCoeff();
  tm.energy_balance_residual = scale > 0.0 ? std::abs(tm.mean_currents.sum()) / scale : 0.0;

  // Central differences with one Richardson step (h and h/2).
  std::vector<double> step(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    step[static_cast<std::size_t>(k)] = fd_step.value_or(1e-4 * scgf.domain().width(static_cast<std::size_t>(k)));
  const double f0 = r0.f;
  auto f_at = [&](int a, double da, int b, double db) {
    RVec k = zero;
    k(a) += da;
    k(b) += db;
    return scgf.f(k);
  };
  tm.fd_gradient.resize(n);
  tm.fd_hessian.resize(n, n);
  for (int a = 0; a < n; ++a) {
    const double h = step[static_cast<std::size_t>(a)];
    auto d1 = [&](double s) { return (f_at(a, s, a, 0.0) - f_at(a, -s, a, 0.0)) / (2.0 * s); };
    auto d2 = [&](double s) { return (f_at(a, s, a, 0.0) - 2.0 * f0 + f_at(a, -s, a, 0.0)) / (s * s); };
    tm.fd_gradient(a) = (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
    tm.fd_hessian(a, a) = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
    for (int b = 0; b < a; ++b) {
      const double hb = step[static_cast<std::size_t>(b)];
      auto mixed = [&](double s) {
        const double sa = s * h;
        const double sb = s * hb;
        return (f_at(a, sa, b, sb) - f_at(a, sa, b, -sb) - f_at(a, -sa, b, sb) + f_at(a, -sa, b, -sb)) /
               (4.0 * sa * sb);
      };
      tm.fd_hessian(a, b) = tm.fd_hessian(b, a) = (4.0 * mixed(0.5) - mixed(1.0)) / 3.0;
    }
  }
  // A single reservoir carries no current, so both moments can sit at roundoff. Differences are judged against
  // max(|value|, noise / 1e-6), where noise is what rounding in f (~eps lambda^2 |L|) produces at step h.
  const double h_min = *std::min_element(step.begin(), step.end());
  const double lambda2 = scgf.lambda() * scgf.lambda();
  const double f_noise = 64.0 * std::numeric_limits<double>::epsilon() * lambda2 *
                         scgf.generator().generator(zero).matrix().cwiseAbs().maxCoeff();
  tm.gradient_mismatch = normwise(g, tm.fd_gradient, 1e6 * f_noise / h_min);
  tm.hessian_mismatch = normwise(tm.covariance, tm.fd_hessian, 1e6 * f_noise / (h_min * h_min));
  if (tm.gradient_mismatch > 1e-6 || tm.hessian_mismatch > 1e-6)
    fail(ErrorCode::DerivativeMismatch, "analytic vs finite-difference derivatives differ: gradient " +
                                            fmt(tm.gradient_mismatch) + ", hessian " + fmt(tm.hessian_mismatch));
  return tm;
}

RateFunctionPoint legendre_point(const Scgf& scgf, const RVec& alpha, const NewtonParams& p) {
  const auto& box = scgf.domain();
  const int n = scgf.reservoir_count();
  RVec lo(n), hi(n);
  for (int k = 0; k < n; ++k) {
    lo(k) = box.lo[static_cast<std::size_t>(k)];
    hi(k) = box.hi[static_cast<std::size_t>(k)];
  }
  auto project = [&](const RVec& k) { return k.cwiseMax(lo).cwiseMin(hi).eval(); };
  auto objective = [&](const RVec& k) { return k.dot(alpha) + scgf.f(k); };

  RateFunctionPoint pt;
  pt.alpha = alpha;
  RVec kappa = project(RVec::Zero(n));
  double value = objective(kappa);
  for (int it = 0; it < p.max_iter; ++it) {
    pt.iterations = it + 1;
    const ScgfResult r = scgf.at(kappa);
    const RVec grad = alpha + scgf.gradient(r);
    const RMat hess = scgf.hessian(r);
    Eigen::SelfAdjointEigenSolver<RMat> hes(hess);
    const double hnorm = std::max(1e-300, hes.eigenvalues().cwiseAbs().maxCoeff());
    if (hes.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, hnorm))
      fail(ErrorCode::NonConvexObjective, "Hessian of f has eigenvalue " + fmt(hes.eigenvalues().minCoeff()));

    // Active bounds: pinned coordinates and those pressed against a face by the gradient.
    std::vector<int> free;
    RVec pg = grad;
    for (int k = 0; k < n; ++k) {
      const double slack = 1e-14 * std::max(1.0, hi(k) - lo(k));
      const bool at_lo = kappa(k) <= lo(k) + slack && grad(k) > 0.0;
      const bool at_hi = kappa(k) >= hi(k) - slack && grad(k) < 0.0;
      if (hi(k) - lo(k) <= 0.0 || at_lo || at_hi)
        pg(k) = 0.0;
      else
        free.push_back(k);
    }
    if (pg.cwiseAbs().maxCoeff() <= p.grad_tol || free.empty()) break;

    // Newton on the free block via pseudo-inverse; flat directions get a steepest-descent component.
    const auto nf = static_cast<Eigen::Index>(free.size());
    RMat hf(nf, nf);
    RVec gf(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      gf(i) = grad(free[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < nf; ++j) hf(i, j) = hess(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    }
    Eigen::SelfAdjointEigenSolver<RMat> fes(hf);
    const double top = std::max(1e-300, fes.eigenvalues().cwiseAbs().maxCoeff());
    RVec stepf = RVec::Zero(nf);
    RVec flat = RVec::Zero(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      const RVec v = fes.eigenvectors().col(i);
      const double c = v.dot(gf);
      if (fes.eigenvalues()(i) > 1e-10 * top)
        stepf -= (c / fes.eigenvalues()(i)) * v;
      else
        flat -= c * v;
    }
    if (flat.norm() > 0.0) {
      double width = 0.0;
      for (int k : free) width = std::max(width, hi(k) - lo(k));
      stepf += flat * (width / flat.norm());
    }
    RVec step = RVec::Zero(n);
    for (Eigen::Index i = 0; i < nf; ++i) step(free[static_cast<std::size_t>(i)]) = stepf(i);

    double t = 1.0;
    RVec next = kappa;
    double next_value = value;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      next = project(kappa + t * step);
      next_value = objective(next);
      if (next_value <= value + 1e-4 * grad.dot(next - kappa)) {
        accepted = true;
        break;
      }
    }
    if (!accepted || (next - kappa).cwiseAbs().maxCoeff() == 0.0) break;
    kappa = next;
    value = next_value;
  }
  pt.kappa_star = kappa;
  pt.I = -value;
  for (int k = 0; k < n; ++k) {
    if (hi(k) - lo(k) <= 0.0) continue;
    const double slack = 1e-9 * (hi(k) - lo(k));
    if (kappa(k) <= lo(k) + slack || kappa(k) >= hi(k) - slack) pt.boundary = true;
  }
  return pt;
}

RateFunctionTable rate_function(const Scgf& scgf, const std::vector<RVec>& alphas, const NewtonParams& p) {
  RateFunctionTable t;
  for (const auto& a : alphas) t.points.push_back(legendre_point(scgf, a, p));
  return t;
}

double CltParameters::characteristic(const RVec& gamma) const { return std::exp(-0.5 * gamma.dot(covariance * gamma)); }

CltParameters clt_normalization(const TransportMoments& m) {
  return {m.mean_currents, RVec::Zero(m.mean_currents.size()), m.covariance};
}

}  // namespace fcs
