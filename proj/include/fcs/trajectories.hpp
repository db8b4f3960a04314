#pragma once

#include <cstdint>
#include <vector>

#include "fcs/lindblad.hpp"
#include "fcs/scgf.hpp"

namespace fcs {

// Jump from level `from` to level `to` through reservoir k deposits omega = e_from - e_to into k.
struct Transition {
  int from = 0;
  int to = 0;
  int reservoir = 0;
  double omega = 0.0;
  double rate = 0.0;  // includes lambda^2
};

struct RateProcess {
  std::vector<double> energies;
  std::vector<double> betas;
  double lambda = 0.0;
  int reservoir_count = 0;
  std::vector<Transition> transitions;
  RVec exit_rates;

  int state_count() const { return static_cast<int>(energies.size()); }
  // Q(kappa)_{e e'} acting on functions of the level; rows of Q(0) sum to zero.
  RMat tilted_generator(const RVec& kappa) const;
  RVec stationary() const;
  // Perron eigenvalue of Q(kappa); equals lambda^2 times the leading eigenvalue of L_kappa.
  double perron(const RVec& kappa) const;
  // (1/T) log p_stat . exp(T Q(kappa)) 1, the exact value for a stationary start.
  double finite_time_scgf(const RVec& kappa, double horizon) const;
};

// PopulationReductionInvalid unless the spectrum is nondegenerate.
RateProcess build_rate_process(const SystemSpec& sys, const std::vector<Coupling>& cs, double lambda,
                               const std::vector<double>& betas);
RateProcess build_rate_process(const ModelConfig& model);

// Largest h with every Bohr frequency an integer multiple of h; 0 when they are incommensurate.
double lattice_step(const std::vector<double>& bohr_set);

struct TrajectoryEnsemble {
  int n_samples = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> betas;
  RMat y;     // n_samples x K
  RVec entropy;  // sum_k beta_k y_k
};

// Each sample starts from the stationary law and draws from its own stream keyed by (seed, index).
TrajectoryEnsemble sample(const RateProcess& rp, double horizon, int n_samples, std::uint64_t seed, int jobs = 0);

struct MeanCurrentEstimate {
  RVec estimate;   // y / T averaged
  RVec std_error;  // bootstrap
  RVec prediction;
};

MeanCurrentEstimate empirical_mean_currents(const TrajectoryEnsemble& ens, const RVec& prediction,
                                            int replicates = 200, std::uint64_t seed = 1);

struct ScgfEstimate {
  RVec kappa;
  double estimate = 0.0;
  double std_error = 0.0;
  double effective_samples = 0.0;
  double prediction = 0.0;             // finite-horizon tilted-matrix value
  double asymptotic_prediction = 0.0;  // Perron eigenvalue
};

// (1/T) log mean exp(-kappa . y); EffectiveSampleCollapse when the weight ESS drops below min_ess_fraction * N.
ScgfEstimate empirical_scgf(const TrajectoryEnsemble& ens, const RateProcess& rp, const RVec& kappa,
                            int replicates = 200, std::uint64_t seed = 1, double min_ess_fraction = 0.01);

struct CltReport {
  int rank = 0;                    // dimension of the range of sigma that is tested
  std::vector<double> ks;          // per whitened component
  std::vector<double> p_values;
  double mahalanobis_ks = 0.0;
  double mahalanobis_p = 0.0;
  double min_p = 0.0;
  double alpha = 0.0;
  double null_leak = 0.0;  // rms of b_T on the kernel of sigma; vanishes like 1/sqrt(T)
  bool pass = false;
};

// b_T = (y - T J) / sqrt(T) tested against N(0, sigma + h^2 / (12 T)) on the range of sigma, after spreading each
// lattice-valued y_k uniformly over its cell of width h. Bonferroni over the rank + 1 tests.
CltReport clt_test(const TrajectoryEnsemble& ens, const CltParameters& clt, double lattice_step,
                   double alpha = 0.01, std::uint64_t seed = 7);
// Same test on explicit b samples with target covariance; used for calibration.
CltReport clt_test_samples(const RMat& b, const RMat& covariance, double alpha = 0.01);

struct EntropyHistogramRow {
  double s = 0.0;         // entropy per unit time, bin centre
  double log_ratio = 0.0; // (1/T) log P(S ~ -sT) / P(S ~ sT)
  long count_pos = 0;
  long count_neg = 0;
};

// Bins of S/T symmetric around zero, kept only when both mirrored counts reach min_count.
std::vector<EntropyHistogramRow> entropy_histogram(const TrajectoryEnsemble& ens, int bins, long min_count = 30);

}  // namespace fcs
