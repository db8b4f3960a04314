#include "fcs/lindblad.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "fcs/errors.hpp"
#include "fcs/quadrature.hpp"

namespace fcs {

std::vector<Coupling> couplings(const ModelConfig& model) {
  std::vector<Coupling> cs;
  for (const auto& r : model.reservoirs) {
    if (r.coupling.rows() != model.system.dim || r.coupling.cols() != model.system.dim)
      fail(ErrorCode::ConfigError, "coupling of reservoir '" + r.label + "' has wrong dimension");
    cs.push_back({r.label, r.coupling, effective_density(r)});
  }
  return cs;
}

CMat compute_upsilon(const SystemSpec& sys, const std::vector<Coupling>& cs, const QuadratureParams& q,
                     bool lamb_shift, std::vector<LambShift>* shifts) {
  constexpr double pi = std::numbers::pi;
  const int n = sys.level_count();
  CMat ups = CMat::Zero(sys.dim, sys.dim);
  for (std::size_t k = 0; k < cs.size(); ++k) {
    std::map<int, double> pv;  // Bohr index -> H_k
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const CMat m = sys.projections[i] * cs[k].D.adjoint() * sys.projections[j] * cs[k].D * sys.projections[i];
        if (max_abs(m) == 0.0) continue;
        const int b = sys.bohr_index(i, j);
        const double w = sys.bohr_set[static_cast<std::size_t>(b)];
        double h = 0.0;
        if (lamb_shift) {
          auto it = pv.find(b);
          if (it == pv.end()) {
            it = pv.emplace(b, principal_value(cs[k].G, w, q)).first;
            if (shifts) shifts->push_back({static_cast<int>(k), w, it->second});
          }
          h = it->second;
        }
        ups += m * cplx(-h, -pi * cs[k].G(w));
      }
  }
  return ups;
}

DeformedLindblad::DeformedLindblad(const ModelConfig& model)
    : DeformedLindblad(model.system, fcs::couplings(model), model.variant, model.lamb_shift, model.quadrature) {}

DeformedLindblad::DeformedLindblad(const SystemSpec& sys, std::vector<Coupling> cs, GeneratorVariant variant,
                                   bool lamb_shift, const QuadratureParams& q)
    : dim_(sys.dim), variant_(variant), couplings_(std::move(cs)) {
  constexpr double pi = std::numbers::pi;
  upsilon_ = compute_upsilon(sys, couplings_, q, lamb_shift, &shifts_);
  const CMat id = CMat::Identity(dim_, dim_);
  coherent_ = cplx(0.0, -1.0) * (Superoperator::sandwich(upsilon_, id) + cplx(-1.0) *
                                                                             Superoperator::sandwich(id, upsilon_.adjoint()));

  const int n = sys.level_count();
  for (std::size_t k = 0; k < couplings_.size(); ++k) {
    const CMat& d = couplings_[k].D;
    std::map<int, std::vector<std::pair<int, int>>> by_bohr;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (max_abs(sys.projections[j] * d * sys.projections[i]) == 0.0) continue;
        by_bohr[sys.bohr_index(i, j)].push_back({i, j});
      }
    for (const auto& [b, pairs] : by_bohr) {
      const double w = sys.bohr_set[static_cast<std::size_t>(b)];
      const double rate0 = 2.0 * pi * couplings_[k].G(w);
      if (rate0 == 0.0) continue;
      if (variant_ == GeneratorVariant::FullSecular) {
        CMat a = CMat::Zero(dim_, dim_);
        for (const auto& [i, j] : pairs) a += sys.projections[j] * d * sys.projections[i];
        channels_.push_back({static_cast<int>(k), w, rate0, Superoperator::sandwich(a.adjoint(), a), pairs});
      } else {
        for (const auto& [i, j] : pairs) {
          const CMat a = sys.projections[j] * d * sys.projections[i];
          channels_.push_back({static_cast<int>(k), w, rate0, Superoperator::sandwich(a.adjoint(), a), {{i, j}}});
        }
      }
    }
  }
}

Superoperator DeformedLindblad::weighted(const RVec& kappa, int power, int only) const {
  if (kappa.size() != reservoir_count()) fail(ErrorCode::ConfigError, "kappa length must equal reservoir count");
  CMat m = CMat::Zero(dim_ * dim_, dim_ * dim_);
  for (const auto& c : channels_) {
    if (only >= 0 && c.reservoir != only) continue;
    const double weight = std::pow(-c.omega, power) * std::exp(-kappa(c.reservoir) * c.omega) * c.rate0;
    m += weight * c.jump.matrix();
  }
  return {dim_, m};
}

Superoperator DeformedLindblad::jump_part(const RVec& kappa) const { return weighted(kappa, 0, -1); }

Superoperator DeformedLindblad::generator(const RVec& kappa) const { return coherent_ + jump_part(kappa); }

Superoperator DeformedLindblad::derivative(const RVec& kappa, int a) const { return weighted(kappa, 1, a); }

Superoperator DeformedLindblad::second_derivative(const RVec& kappa, int a, int b) const {
  if (a != b) return Superoperator::zero(dim_);
  return weighted(kappa, 2, a);
}

GeneratorParts DeformedLindblad::parts(const RVec& kappa) const {
  GeneratorParts p;
  p.upsilon = upsilon_;
  p.lamb_shift = shifts_;
  p.variant = variant_;
  p.assembled = generator(kappa);
  for (const auto& c : channels_)
    for (const auto& [i, j] : c.pairs)
      p.jump_rates.push_back({c.reservoir, c.omega, i, j, c.rate0 * std::exp(-kappa(c.reservoir) * c.omega)});
  return p;
}

GeneratorParts build_deformed_lindblad(const ModelConfig& model, const DeformationVector& kappa) {
  if (!model.domain.contains(kappa.kappa())) fail(ErrorCode::KappaOutsideDomain, "kappa outside model domain box");
  return DeformedLindblad(model).parts(kappa.kappa());
}

}  // namespace fcs
