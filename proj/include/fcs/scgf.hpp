#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fcs/lindblad.hpp"

namespace fcs {

struct ScgfResult {
  RVec kappa;
  double f = 0.0;       // lambda^2 * max Re sp(L_kappa)
  double gap = 0.0;     // lambda^2 * distance to the next real part
  cplx eigenvalue;      // unscaled leading eigenvalue of L_kappa
  CMat right_eigvec;    // Hermitian positive, trace = d
  CMat left_eigvec;     // <left, right> = 1
  bool converged = false;
  std::vector<std::string> warnings;
};

// Leading eigenvalue of a Heisenberg-picture generator.
ScgfResult leading_eigenvalue(const Superoperator& l, double lambda);

class Scgf {
 public:
  explicit Scgf(const ModelConfig& model);
  Scgf(DeformedLindblad generator, double lambda, DomainBox domain, bool irreducible = true);

  const DeformedLindblad& generator() const { return gen_; }
  double lambda() const { return lambda_; }
  const DomainBox& domain() const { return domain_; }
  int reservoir_count() const { return gen_.reservoir_count(); }

  ScgfResult at(const RVec& kappa) const;  // KappaOutsideDomain
  double f(const RVec& kappa) const { return at(kappa).f; }
  // Eigenvalue perturbation; scaled by lambda^2.
  RVec gradient(const ScgfResult& r) const;
  RMat hessian(const ScgfResult& r) const;

 private:
  DeformedLindblad gen_;
  double lambda_;
  DomainBox domain_;
  bool irreducible_;
};

// Stationary density matrix of the kappa = 0 state-picture generator.
CMat stationary_state(const DeformedLindblad& gen);

struct GcReport {
  std::vector<double> nu;
  std::vector<double> f_nu;
  std::vector<double> f_mirror;
  std::vector<double> defect;
  double max_defect = 0.0;
};

// max over nu of |f(nu beta) - f((1 - nu) beta)|
GcReport gc_symmetry_defect(const Scgf& scgf, const std::vector<double>& betas, const std::vector<double>& nu_grid);

struct TransportMoments {
  RVec mean_currents;   // -grad f(0)
  RMat covariance;      // hess f(0), symmetrized
  double entropy_production_rate = 0.0;
  RVec fd_gradient;
  RMat fd_hessian;
  double gradient_mismatch = 0.0;  // normwise relative
  double hessian_mismatch = 0.0;
  double energy_balance_residual = 0.0;
};

// Default step is 1e-4 * (domain width) per coordinate; DerivativeMismatch above 1e-6.
TransportMoments transport_moments(const Scgf& scgf, const std::vector<double>& betas,
                                   std::optional<double> fd_step = std::nullopt);

struct NewtonParams {
  double grad_tol = 1e-12;
  int max_iter = 200;
};

struct RateFunctionPoint {
  RVec alpha;
  double I = 0.0;
  RVec kappa_star;
  bool boundary = false;
  int iterations = 0;
};

struct RateFunctionTable {
  std::vector<RateFunctionPoint> points;
};

// I(alpha) = -min_{kappa in box} (kappa . alpha + f(kappa)); NonConvexObjective if the Hessian is indefinite.
RateFunctionPoint legendre_point(const Scgf& scgf, const RVec& alpha, const NewtonParams& p = {});
RateFunctionTable rate_function(const Scgf& scgf, const std::vector<RVec>& alphas, const NewtonParams& p = {});

struct CltParameters {
  RVec drift;       // mean currents; b_t = (y - t drift) / sqrt(t)
  RVec b_mean;      // zero
  RMat covariance;
  // E exp(i gamma . b) -> exp(-gamma . sigma gamma / 2)
  double characteristic(const RVec& gamma) const;
};

CltParameters clt_normalization(const TransportMoments& m);

}  // namespace fcs
