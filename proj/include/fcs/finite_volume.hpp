#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fcs/model.hpp"

namespace fcs {

class Scgf;

struct Mode {
  double xi = 0.0;
  double g = 0.0;
};

enum class DiscretizationScheme { Midpoint, GaussLegendre };

// g_j = sqrt(J(xi_j) dxi_j), so sum_j g_j^2 f(xi_j) approximates int J f over [lo, hi].
std::vector<Mode> discretize_reservoir(const ReservoirSpec& res, int n_modes, double lo, double hi,
                                       DiscretizationScheme scheme = DiscretizationScheme::Midpoint);

// Basis |s> kron |n_1 ... n_M>, system index outermost, last mode fastest.
struct FiniteVolumeModel {
  int sys_dim = 0;
  int res_dim = 0;
  int dim = 0;
  double lambda = 0.0;
  std::vector<double> betas;
  std::vector<std::vector<Mode>> modes;
  std::vector<int> nmax;
  CMat hamiltonian;
  std::vector<RVec> reservoir_energy;  // diagonal of dGamma(h_k) over the reservoir factor
  RVec gibbs;                          // truncated, renormalized
  std::vector<std::string> warnings;

  double min_spacing() const;
  double recurrence_time() const;  // 2 pi / min spacing
  // dGamma(h_k) over the full space
  RVec full_energy(int k) const;
};

FiniteVolumeModel assemble(const SystemSpec& sys, const std::vector<ReservoirSpec>& reservoirs,
                           const std::vector<std::vector<Mode>>& modes, const std::vector<int>& nmax, double lambda,
                           int dim_cap = 8192);

// One eigendecomposition of H reused for every t.
class Propagator {
 public:
  explicit Propagator(const FiniteVolumeModel& fv);
  CMat unitary(double t) const;  // e^{-itH}
  const RVec& energies() const { return w_; }

 private:
  RVec w_;
  bool real_ = false;
  RMat vr_;
  CMat vc_;
};

// W(a, r) = sum_{s,s'} U_{a,(s,r)} rho_E(s,s') conj(U_{a,(s',r)}): weight of landing in a from reservoir state r.
RMat transition_weights(const FiniteVolumeModel& fv, const CMat& u, const CMat& rho_e);

struct TpmDistribution {
  std::vector<RVec> support;
  std::vector<double> probabilities;
  double t = 0.0;
};

// P(y) = sum_{x' - x = y} Tr[rho P_x e^{itH} P_x' e^{-itH} P_x]
TpmDistribution tpm_distribution(const FiniteVolumeModel& fv, const Propagator& prop, const CMat& rho_e, double t);
TpmDistribution tpm_from_weights(const FiniteVolumeModel& fv, const RMat& weights, double t);

// chi = rho[Gamma(w_{-kappa}) e^{itH} Gamma(w_kappa) e^{-itH}]; kappa may be complex.
cplx characteristic_function(const FiniteVolumeModel& fv, const Propagator& prop, const CMat& rho_e, const CVec& kappa,
                             double t);
cplx characteristic_from_weights(const FiniteVolumeModel& fv, const RMat& weights, const CVec& kappa);

struct CorrelationTable {
  std::vector<double> t;
  std::vector<double> p;
};

struct DecayFit {
  double C = 0.0;
  double alpha = 0.0;
  double residual = 0.0;  // 1 - R^2 of the log-linear fit
};

// p_kappa(t) = ||D||^2 |int G(x) e^{-itx} e^{-kappa x} dx|
CorrelationTable correlation_table(const EffectiveDensity& g, double coupling_norm_sq, double kappa,
                                   const std::vector<double>& t_grid, const QuadratureParams& q = {});

// Fit over t >= tail_start; NoExponentialDecay if alpha <= 0 or residual > max_residual.
DecayFit fit_exponential_decay(const CorrelationTable& table, double tail_start, double max_residual = 0.05);

struct FvBuildSpec {
  int n_modes = 3;
  std::vector<int> nmax{2, 2};
  // Band [center - scale lambda^2, center + scale lambda^2] clipped below at band_min, unless range is set.
  double band_center = 1.0;
  double band_scale = 9.0;
  double band_min = 0.05;
  std::optional<std::pair<double, double>> range;
  DiscretizationScheme scheme = DiscretizationScheme::Midpoint;
  int dim_cap = 8192;
};

FiniteVolumeModel build_finite_volume(const ModelConfig& model, const FvBuildSpec& spec, double lambda);

enum class InitialState { Configured, FgrStationary };

struct WeakCouplingRow {
  double lambda = 0.0;
  RVec kappa;
  double t = 0.0;
  double log_chi_rate = 0.0;  // (1/t) log chi
  double prediction = 0.0;    // lambda^2 f_FGR
  double deviation = 0.0;
};

struct WeakCouplingTable {
  std::vector<WeakCouplingRow> rows;
  std::vector<double> lambdas;
  std::vector<double> median_deviation;
};

// t = c_time / lambda^2; RecurrenceHorizonExceeded if t exceeds 2 pi / dxi.
WeakCouplingTable weak_coupling_compare(const ModelConfig& model, const Scgf& scgf, const std::vector<RVec>& kappas,
                                        const std::vector<double>& lambdas, double c_time, const FvBuildSpec& spec,
                                        InitialState initial = InitialState::FgrStationary);

}  // namespace fcs
