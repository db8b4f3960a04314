#pragma once

#include <string>
#include <vector>

#include "fcs/model.hpp"
#include "fcs/superop.hpp"

namespace fcs {

struct Coupling {
  std::string label;
  CMat D;
  EffectiveDensity G;
};

std::vector<Coupling> couplings(const ModelConfig& model);

struct LambShift {
  int reservoir = 0;
  double omega = 0.0;
  double value = 0.0;  // H_k(omega)
};

// Channel e -> e' through reservoir k, omega = e - e'; rate = 2 pi e^{-kappa_k omega} G_k(omega).
struct JumpRate {
  int reservoir = 0;
  double omega = 0.0;
  int from_level = 0;
  int to_level = 0;
  double rate = 0.0;
};

struct GeneratorParts {
  CMat upsilon;
  std::vector<LambShift> lamb_shift;
  std::vector<JumpRate> jump_rates;
  GeneratorVariant variant = GeneratorVariant::FullSecular;
  Superoperator assembled;  // Heisenberg picture; the state picture is assembled.dual()
};

// Sum_k Sum_{e - e' = w} 1_e D* 1_e' D 1_e (-i pi G_k(w) - H_k(w)).
CMat compute_upsilon(const SystemSpec& sys, const std::vector<Coupling>& cs, const QuadratureParams& q,
                     bool lamb_shift = true, std::vector<LambShift>* shifts = nullptr);

// Caches Upsilon and the kappa-independent jump pieces; L_kappa is a weighted sum of them.
class DeformedLindblad {
 public:
  DeformedLindblad(const SystemSpec& sys, std::vector<Coupling> cs, GeneratorVariant variant, bool lamb_shift,
                   const QuadratureParams& q);
  explicit DeformedLindblad(const ModelConfig& model);

  int dim() const { return dim_; }
  int reservoir_count() const { return static_cast<int>(couplings_.size()); }
  GeneratorVariant variant() const { return variant_; }
  const CMat& upsilon() const { return upsilon_; }
  const std::vector<LambShift>& lamb_shift() const { return shifts_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }

  Superoperator generator(const RVec& kappa) const;
  Superoperator derivative(const RVec& kappa, int a) const;
  Superoperator second_derivative(const RVec& kappa, int a, int b) const;
  // The jump part alone; completely positive for real kappa.
  Superoperator jump_part(const RVec& kappa) const;
  GeneratorParts parts(const RVec& kappa) const;

 private:
  struct Channel {
    int reservoir;
    double omega;
    double rate0;  // 2 pi G_k(omega)
    Superoperator jump;
    std::vector<std::pair<int, int>> pairs;
  };
  Superoperator weighted(const RVec& kappa, int power, int only) const;

  int dim_ = 0;
  GeneratorVariant variant_;
  std::vector<Coupling> couplings_;
  CMat upsilon_;
  std::vector<LambShift> shifts_;
  Superoperator coherent_;
  std::vector<Channel> channels_;
};

// Checks kappa against the model's domain box (KappaOutsideDomain).
GeneratorParts build_deformed_lindblad(const ModelConfig& model, const DeformationVector& kappa);

}  // namespace fcs
