#include "fcs/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fcs/errors.hpp"

namespace fcs {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_density(const DensityForm& form) {
  std::visit(overloaded{
                 [](const OhmicDensity& o) {
                   if (!(o.gamma >= 0.0) || !(o.s > 0.0) || !(o.cutoff > 0.0) || !std::isfinite(o.gamma) ||
                       !std::isfinite(o.s) || !std::isfinite(o.cutoff))
                     fail(ErrorCode::DensityEvaluationFailure, "ohmic density needs gamma >= 0, s > 0, cutoff > 0");
                 },
                 [](const FlatDensity& f) {
                   if (!(f.gamma >= 0.0) || !(f.lo > 0.0) || !(f.hi > f.lo) || !std::isfinite(f.hi))
                     fail(ErrorCode::DensityEvaluationFailure, "flat density needs gamma >= 0 and 0 < lo < hi");
                 },
                 [](const TabulatedDensity& t) {
                   if (t.omega.size() < 2 || t.omega.size() != t.value.size())
                     fail(ErrorCode::DensityEvaluationFailure, "tabulated density needs >= 2 matching nodes");
                   for (std::size_t i = 0; i < t.omega.size(); ++i) {
                     if (!(t.omega[i] >= 0.0) || !(t.value[i] >= 0.0) || !std::isfinite(t.value[i]))
                       fail(ErrorCode::DensityEvaluationFailure, "tabulated density needs nonnegative nodes and values");
                     if (i > 0 && !(t.omega[i] > t.omega[i - 1]))
                       fail(ErrorCode::DensityEvaluationFailure, "tabulated frequencies must increase strictly");
                   }
                   // G ~ J(0)/(beta w) would not be integrable.
                   if (t.omega.front() == 0.0 && t.value.front() != 0.0)
                     fail(ErrorCode::DensityEvaluationFailure, "tabulated density must vanish at w = 0");
                 },
             },
             form);
}

}  // namespace

SystemSpec build_system(const CMat& h, std::optional<double> degeneracy_tol) {
  const auto d = static_cast<int>(h.rows());
  if (d < 2 || h.cols() != h.rows()) fail(ErrorCode::ConfigError, "system Hamiltonian must be square with d >= 2");
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_residual(h) > 1e-12 * scale)
    fail(ErrorCode::NonHermitianInput, "Hamiltonian not Hermitian, residual " + fmt(hermiticity_residual(h)));

  const CMat hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(hs);
  const RVec w = es.eigenvalues();
  const double norm = w.cwiseAbs().maxCoeff();
  const double tol = degeneracy_tol.value_or(1e-9 * (norm > 0.0 ? norm : 1.0));
  if (!(tol >= 0.0)) fail(ErrorCode::ConfigError, "degeneracy_tol must be >= 0");

  SystemSpec sys;
  sys.dim = d;
  sys.hamiltonian = hs;
  sys.degeneracy_tol = tol;
  int start = 0;
  for (int i = 1; i <= d; ++i) {
    if (i < d && w(i) - w(i - 1) <= tol) continue;
    const int m = i - start;
    const CMat v = es.eigenvectors().middleCols(start, m);
    sys.eigenvalues.push_back(w.segment(start, m).mean());
    sys.multiplicities.push_back(m);
    sys.projections.push_back(v * v.adjoint());
    start = i;
  }

  // Differences equal up to roundoff are one frequency; anything else closer than tol is ambiguous.
  const int n = sys.level_count();
  const double same = 1e-12 * std::max(1.0, norm);
  std::vector<double> pos;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) pos.push_back(sys.eigenvalues[i] - sys.eigenvalues[j]);
  std::sort(pos.begin(), pos.end());
  std::vector<double> distinct{0.0};
  for (double x : pos) {
    const double gap = x - distinct.back();
    if (gap <= same) continue;
    if (gap < tol)
      fail(ErrorCode::DegenerateBohrCollision,
           "Bohr frequencies " + fmt(distinct.back()) + " and " + fmt(x) + " closer than degeneracy_tol");
    distinct.push_back(x);
  }
  for (auto it = distinct.rbegin(); it != distinct.rend(); ++it)
    if (*it > 0.0) sys.bohr_set.push_back(-*it);
  sys.bohr_set.insert(sys.bohr_set.end(), distinct.begin(), distinct.end());

  sys.bohr_of_pair_.resize(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = sys.eigenvalues[i] - sys.eigenvalues[j];
      const auto it = std::min_element(sys.bohr_set.begin(), sys.bohr_set.end(),
                                       [x](double a, double b) { return std::abs(a - x) < std::abs(b - x); });
      sys.bohr_of_pair_[static_cast<std::size_t>(i * n + j)] = static_cast<int>(it - sys.bohr_set.begin());
    }
  return sys;
}

SpectralDensity::SpectralDensity(DensityForm form) : form_(std::move(form)) { check_density(form_); }

double SpectralDensity::operator()(double w) const {
  return std::visit(overloaded{
                        [w](const OhmicDensity& o) { return o.gamma * std::pow(w, o.s) * std::exp(-w / o.cutoff); },
                        [w](const FlatDensity& f) { return (w >= f.lo && w <= f.hi) ? f.gamma : 0.0; },
                        [w](const TabulatedDensity& t) {
                          if (w < t.omega.front() || w > t.omega.back()) return 0.0;
                          const auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
                          if (it == t.omega.end()) return t.value.back();
                          const auto i = static_cast<std::size_t>(it - t.omega.begin());
                          const double a = (w - t.omega[i - 1]) / (t.omega[i] - t.omega[i - 1]);
                          return (1.0 - a) * t.value[i - 1] + a * t.value[i];
                        },
                    },
                    form_);
}

std::string SpectralDensity::name() const {
  return std::visit(overloaded{[](const OhmicDensity&) { return std::string("ohmic"); },
                               [](const FlatDensity&) { return std::string("flat"); },
                               [](const TabulatedDensity&) { return std::string("tabulated"); }},
                    form_);
}

double SpectralDensity::upper_edge() const {
  return std::visit(overloaded{
                        [](const OhmicDensity& o) {
                          // log of w^s e^{-w/wc} relative to its peak at s*wc drops below log(1e-18).
                          const double peak = o.s * std::log(o.s * o.cutoff) - o.s;
                          double w = o.s * o.cutoff;
                          while (o.s * std::log(w) - w / o.cutoff - peak > std::log(1e-18)) w += 0.25 * o.cutoff;
                          return w;
                        },
                        [](const FlatDensity& f) { return f.hi; },
                        [](const TabulatedDensity& t) { return t.omega.back(); },
                    },
                    form_);
}

std::vector<double> SpectralDensity::kinks() const {
  return std::visit(overloaded{
                        [](const OhmicDensity&) { return std::vector<double>{}; },
                        [](const FlatDensity& f) { return std::vector<double>{f.lo, f.hi}; },
                        [](const TabulatedDensity& t) {
                          std::vector<double> k;
                          for (double x : t.omega)
                            if (x > 0.0) k.push_back(x);
                          return k;
                        },
                    },
                    form_);
}

EffectiveDensity EffectiveDensity::custom(Fn g, double lower, double upper, std::vector<double> breakpoints,
                                          std::string label) {
  if (!(upper > lower)) fail(ErrorCode::EmptyRange, "custom density needs lower < upper");
  EffectiveDensity out;
  out.g_ = std::move(g);
  out.lower_ = lower;
  out.upper_ = upper;
  std::sort(breakpoints.begin(), breakpoints.end());
  out.breakpoints_ = std::move(breakpoints);
  out.label_ = std::move(label);
  return out;
}

EffectiveDensity effective_density(const ReservoirSpec& res) {
  if (!(res.beta > 0.0) || !std::isfinite(res.beta))
    fail(ErrorCode::NonPositiveTemperature, "reservoir '" + res.label + "' needs finite beta > 0");
  const SpectralDensity j = res.density;
  const double beta = res.beta;
  const double edge = j.upper_edge();
  for (int i = 1; i <= 64; ++i) {
    const double v = j(edge * i / 64.0);
    if (!std::isfinite(v) || v < 0.0)
      fail(ErrorCode::DensityEvaluationFailure, "density of reservoir '" + res.label + "' is negative or not finite");
  }
  const double g0 = res.g_zero;
  if (!(g0 >= 0.0) || !std::isfinite(g0)) fail(ErrorCode::DensityEvaluationFailure, "g_zero must be finite and >= 0");

  EffectiveDensity out;
  // Both branches share zeta(|w|), so G(-w) = e^{-beta w} G(w) up to one rounding.
  out.g_ = [j, beta, g0](double w) {
    if (w > 0.0) return j(w) * (1.0 + 1.0 / std::expm1(beta * w));
    if (w < 0.0) return j(-w) / std::expm1(-beta * w);
    return g0;
  };
  out.odd_ = [j](double u) { return j(u); };
  out.lower_ = -edge;
  out.upper_ = edge;
  out.breakpoints_.push_back(0.0);
  for (double k : j.kinks()) {
    if (k >= edge) continue;
    out.breakpoints_.push_back(k);
    out.breakpoints_.push_back(-k);
  }
  // G ~ |w|^{s-1} near 0 for a non-integer ohmic exponent; grade panels geometrically until the uncovered
  // piece [0, c 2^{-n}] carries less than 1e-16 of the weight.
  if (const auto* o = std::get_if<OhmicDensity>(&j.form()); o && o->s != std::round(o->s)) {
    const int levels = std::min(1000, static_cast<int>(std::ceil(53.0 / o->s)));
    double x = std::min(o->cutoff, edge);
    for (int n = 0; n < levels; ++n, x *= 0.5) {
      out.breakpoints_.push_back(x);
      out.breakpoints_.push_back(-x);
    }
  }
  std::sort(out.breakpoints_.begin(), out.breakpoints_.end());
  out.breakpoints_.erase(std::unique(out.breakpoints_.begin(), out.breakpoints_.end()), out.breakpoints_.end());
  out.label_ = res.label;
  out.beta_ = beta;
  return out;
}

std::pair<double, double> admissible_kappa(const ReservoirSpec& res) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (const auto* o = std::get_if<OhmicDensity>(&res.density.form()))
    return {-1.0 / o->cutoff, res.beta + 1.0 / o->cutoff};
  return {-inf, inf};
}

DomainBox DomainBox::symmetric(int n, double half_width) {
  return {std::vector<double>(static_cast<std::size_t>(n), -half_width),
          std::vector<double>(static_cast<std::size_t>(n), half_width)};
}

bool DomainBox::contains(const RVec& kappa) const {
  if (static_cast<std::size_t>(kappa.size()) != lo.size()) return false;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const double slack = 1e-12 * std::max(1.0, width(k));
    if (kappa(static_cast<Eigen::Index>(k)) < lo[k] - slack || kappa(static_cast<Eigen::Index>(k)) > hi[k] + slack)
      return false;
  }
  return true;
}

DeformationVector::DeformationVector(RVec kappa, DomainBox box) : kappa_(std::move(kappa)), box_(std::move(box)) {
  if (!box_.contains(kappa_)) {
    std::ostringstream os;
    os.precision(17);
    os << "kappa (" << kappa_.transpose() << ") outside domain box";
    fail(ErrorCode::KappaOutsideDomain, os.str());
  }
}

void validate_state(const CMat& rho) {
  if (rho.rows() != rho.cols()) fail(ErrorCode::ConfigError, "rho_E must be square");
  if (hermiticity_residual(rho) > 1e-12) fail(ErrorCode::ConfigError, "rho_E not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > 1e-12) fail(ErrorCode::ConfigError, "rho_E must have unit trace");
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (rho + rho.adjoint()));
  if (es.eigenvalues().minCoeff() < -1e-12) fail(ErrorCode::ConfigError, "rho_E not positive semidefinite");
}

CMat ModelConfig::initial_state() const {
  if (rho_E.size() == 0) return CMat::Identity(system.dim, system.dim) / static_cast<double>(system.dim);
  return rho_E;
}

std::vector<double> ModelConfig::betas() const {
  std::vector<double> b;
  for (const auto& r : reservoirs) b.push_back(r.beta);
  return b;
}

IrreducibilityReport check_fgr_irreducibility(const SystemSpec& sys, const std::vector<CMat>& couplings,
                                              const std::vector<EffectiveDensity>& densities) {
  const int d = sys.dim;
  const int n = sys.level_count();
  const CMat id = CMat::Identity(d, d);
  std::vector<CMat> blocks;
  for (std::size_t k = 0; k < couplings.size(); ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (!(densities[k](sys.eigenvalues[i] - sys.eigenvalues[j]) > 0.0)) continue;
        const CMat a = sys.projections[i] * couplings[k] * sys.projections[j];
        if (max_abs(a) == 0.0) continue;
        // vec([S, A]) = (A^T kron 1 - 1 kron A) vec(S)
        blocks.push_back(kron(a.transpose(), id) - kron(id, a));
      }

  IrreducibilityReport rep;
  const int n2 = d * d;
  CMat stacked(static_cast<Eigen::Index>(blocks.size()) * n2, n2);
  for (std::size_t b = 0; b < blocks.size(); ++b) stacked.middleRows(static_cast<Eigen::Index>(b) * n2, n2) = blocks[b];

  CMat null_basis;
  if (blocks.empty()) {
    null_basis = CMat::Identity(n2, n2);
  } else {
    Eigen::JacobiSVD<CMat> svd(stacked, Eigen::ComputeFullV);
    const RVec s = svd.singularValues();
    const double thresh = 1e-10 * std::max(s(0), 1e-300);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > thresh) ++rank;
    null_basis = svd.matrixV().rightCols(n2 - rank);
  }
  rep.commutant_dimension = static_cast<int>(null_basis.cols());
  rep.irreducible = rep.commutant_dimension == 1;
  if (!rep.irreducible) {
    const CVec e = vec(id) / std::sqrt(static_cast<double>(d));
    const CMat perp = null_basis - e * (e.adjoint() * null_basis);
    Eigen::Index best = 0;
    perp.colwise().norm().maxCoeff(&best);
    const CVec w = perp.col(best).normalized();
    rep.witness = unvec(w, d);
  }
  return rep;
}

ModelConfig canonical_qubit() {
  ModelConfig m;
  CMat e(2, 2);
  e << 0.5, 0.0, 0.0, -0.5;
  m.system = build_system(e);
  CMat sx(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  const SpectralDensity j{OhmicDensity{0.5, 1.0, 5.0}};
  m.reservoirs = {ReservoirSpec{"hot", 1.0, sx, j, 0.0}, ReservoirSpec{"cold", 2.0, sx, j, 0.0}};
  m.lambda = 0.1;
  m.domain = DomainBox{{-1.0, -1.0}, {2.5, 2.5}};
  return m;
}

}  // namespace fcs
