#pragma once

#include <optional>
#include <vector>

#include "fcs/finite_volume.hpp"
#include "fcs/superop.hpp"

namespace fcs {

// Z(A) = B A B^* with B = Gamma(w_{kappa/2}) U_t Gamma(w_{-kappa/2}); I_up(S) = S kron rho_ref; I_down = partial trace.
class CompressedDynamics {
 public:
  // t_micro is the propagation time of one block; tau is its macroscopic label t_micro * lambda^2.
  CompressedDynamics(const FiniteVolumeModel& fv, const Propagator& prop, const RVec& kappa, double t_micro,
                     double tau);

  int sys_dim() const { return d_; }
  double tau() const { return tau_; }
  double t_micro() const { return t_; }

  CMat up(const CMat& s) const;
  CMat down(const CMat& a) const;
  CMat step(const CMat& a) const;
  // Z(I_up(E_ij)) without forming S kron rho_ref.
  CMat step_up(int i, int j) const;
  Superoperator compressed() const;
  // I_down Z^m I_up by repeated propagation.
  Superoperator compressed_power(int m) const;

 private:
  int d_;
  int rd_;
  double t_;
  double tau_;
  RVec rho_ref_;
  CMat b_;
};

// Uses t_micro = tau / lambda^2; lambda must be nonzero.
CompressedDynamics compressed_step(const FiniteVolumeModel& fv, const Propagator& prop, const RVec& kappa, double tau);

struct PolymerBlocks {
  std::vector<Superoperator> W;  // W[0] = W_1
  std::vector<double> norms;     // spectral norms
  double c_hat = 0.0;
  double tau = 0.0;
  double t_micro = 0.0;
};

// W_n = I_down Z (1 - I_up I_down) Z ... (1 - I_up I_down) Z I_up with n - 1 insertions.
PolymerBlocks extract_blocks(const CompressedDynamics& cd, int n_max, double recurrence_time);

// Least squares slope of log ||W_n|| against n - 1 over n >= 2.
double fit_block_decay(const std::vector<double>& norms);

struct TransferOperator {
  int n_block = 0;
  int d2 = 0;
  double t_micro = 0.0;
  CMat matrix;    // block (n, 1) = W_n, block (n - 1, n) = identity
  double delta = 0.0;
  CMat deformed;  // e^{delta R} T e^{-delta R}
  cplx leading;
  double gap = 0.0;  // |mu_1| - |mu_2|
  double f_transfer = 0.0;  // log(mu_1) / t_micro = (lambda^2 / tau) log mu_1
  bool leading_positive = false;

  // P_1^* T^m P_1 on the undeformed (or deformed) matrix
  CMat compressed_power(int m, bool use_deformed = false) const;
};

// W_n for n beyond the extracted blocks is zero.
TransferOperator build_transfer(const PolymerBlocks& blocks, int n_block);
// delta defaults to -ln(c_hat) / 2; DeformationTooWeak when no isolated leader exists.
TransferOperator build_and_deform(const PolymerBlocks& blocks, int n_block, std::optional<double> delta = std::nullopt);

}  // namespace fcs
