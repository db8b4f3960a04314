#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fcs/linalg.hpp"

namespace fcs {

struct SystemSpec {
  int dim = 0;
  CMat hamiltonian;
  std::vector<double> eigenvalues;  // distinct, ascending
  std::vector<int> multiplicities;
  std::vector<CMat> projections;    // projections[i] onto eigenvalues[i]
  std::vector<double> bohr_set;     // ascending, symmetric, contains 0
  double degeneracy_tol = 0.0;

  int level_count() const { return static_cast<int>(eigenvalues.size()); }
  bool nondegenerate() const { return level_count() == dim; }
  // Index into bohr_set of eigenvalues[i] - eigenvalues[j].
  int bohr_index(int i, int j) const { return bohr_of_pair_[static_cast<std::size_t>(i * level_count() + j)]; }

 private:
  std::vector<int> bohr_of_pair_;
  friend SystemSpec build_system(const CMat&, std::optional<double>);
};

// Default tolerance is 1e-9 * ||H||.
SystemSpec build_system(const CMat& hamiltonian, std::optional<double> degeneracy_tol = std::nullopt);

struct OhmicDensity {
  double gamma = 1.0;
  double s = 1.0;
  double cutoff = 1.0;
};

// J = gamma on [lo, hi], zero elsewhere; lo > 0.
struct FlatDensity {
  double gamma = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};

// Linear interpolation, zero outside the table.
struct TabulatedDensity {
  std::vector<double> omega;
  std::vector<double> value;
};

using DensityForm = std::variant<OhmicDensity, FlatDensity, TabulatedDensity>;

class SpectralDensity {
 public:
  explicit SpectralDensity(DensityForm form);

  double operator()(double omega) const;  // omega > 0
  const DensityForm& form() const { return form_; }
  std::string name() const;
  // J is negligible (or zero) above this frequency.
  double upper_edge() const;
  // Points in (0, upper_edge) where J is not smooth.
  std::vector<double> kinks() const;

 private:
  DensityForm form_;
};

struct ReservoirSpec {
  std::string label;
  double beta = 1.0;
  CMat coupling;
  SpectralDensity density{OhmicDensity{}};
  double g_zero = 0.0;  // value used for the omega = 0 channel
};

// G(w) = (1 + zeta(w)) J(w) for w > 0, zeta(-w) J(-w) for w < 0, with zeta = 1/(e^{beta w} - 1).
class EffectiveDensity {
 public:
  using Fn = std::function<double(double)>;

  // Arbitrary callable on [lower, upper]; no detailed-balance guarantee.
  static EffectiveDensity custom(Fn g, double lower, double upper, std::vector<double> breakpoints = {},
                                 std::string label = "custom");

  double operator()(double omega) const { return g_(omega); }
  // G(u) - G(-u) for u > 0. The thermal form returns J(u) directly, avoiding the cancellation of two 1/u poles.
  double odd(double u) const { return odd_ ? odd_(u) : g_(u) - g_(-u); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::string& label() const { return label_; }
  std::optional<double> beta() const { return beta_; }

 private:
  EffectiveDensity() = default;
  Fn g_;
  Fn odd_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  std::vector<double> breakpoints_;
  std::string label_;
  std::optional<double> beta_;
  friend EffectiveDensity effective_density(const ReservoirSpec&);
};

EffectiveDensity effective_density(const ReservoirSpec& res);

// Interval of kappa where e^{-kappa w} G(w) stays integrable over the untruncated density.
std::pair<double, double> admissible_kappa(const ReservoirSpec& res);

struct DomainBox {
  std::vector<double> lo;
  std::vector<double> hi;

  static DomainBox symmetric(int n, double half_width);
  std::size_t size() const { return lo.size(); }
  bool contains(const RVec& kappa) const;
  double width(std::size_t k) const { return hi[k] - lo[k]; }
};

class DeformationVector {
 public:
  DeformationVector(RVec kappa, DomainBox box);  // KappaOutsideDomain
  const RVec& kappa() const { return kappa_; }
  const DomainBox& box() const { return box_; }

 private:
  RVec kappa_;
  DomainBox box_;
};

enum class GeneratorVariant { FullSecular, PairDiagonal };

struct QuadratureParams {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int base_panels = 8;
  int max_level = 12;
};

struct ModelConfig {
  SystemSpec system;
  std::vector<ReservoirSpec> reservoirs;
  double lambda = 0.1;
  CMat rho_E;  // empty means maximally mixed
  DomainBox domain;
  GeneratorVariant variant = GeneratorVariant::FullSecular;
  bool lamb_shift = true;
  QuadratureParams quadrature;

  CMat initial_state() const;
  std::vector<double> betas() const;
};

void validate_state(const CMat& rho);

struct IrreducibilityReport {
  bool irreducible = false;
  int commutant_dimension = 0;
  CMat witness;  // non-scalar commuting operator when reducible
};

IrreducibilityReport check_fgr_irreducibility(const SystemSpec& sys, const std::vector<CMat>& couplings,
                                              const std::vector<EffectiveDensity>& densities);

// Qubit E = diag(1/2, -1/2), D1 = D2 = sigma_x, beta = (1, 2), J = w e^{-w/5} / 2, lambda = 0.1.
ModelConfig canonical_qubit();

}  // namespace fcs
