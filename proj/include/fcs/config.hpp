#pragma once

#include <json.hpp>
#include <string>

#include "fcs/finite_volume.hpp"
#include "fcs/model.hpp"

namespace fcs {

// File layout (all keys optional unless noted; unknown keys are a ConfigError naming their JSON path):
//   system:     {hamiltonian (required), degeneracy_tol}
//   reservoirs: [{label, beta (required), coupling (required), density (required), g_zero}]
//     density:  {form: "ohmic", gamma, s, cutoff} | {form: "flat", gamma, lo, hi} | {form: "tabulated", omega, value}
//   run:        {lambda, rho_E, domain_box: {lo, hi}, variant: "full_secular" | "pair_diagonal",
//                lamb_shift, quadrature: {abs_tol, rel_tol, base_panels, max_level}}
//   modes:      {n_modes, nmax, band_center, band_scale, band_min, range, scheme: "midpoint" | "gauss_legendre", dim_cap}
// Matrices are row-major lists of [re, im] pairs of length d^2.
struct RunConfig {
  ModelConfig model;
  FvBuildSpec modes;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json matrix_to_json(const CMat& m);
CMat matrix_from_json(const nlohmann::json& j, int dim, const std::string& path);

}  // namespace fcs
