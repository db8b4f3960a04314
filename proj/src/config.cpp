#include "fcs/config.hpp"

#include <fstream>
#include <set>

#include "fcs/errors.hpp"

namespace fcs {

using nlohmann::json;

namespace {

void allow_only(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, path + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.contains(k)) fail(ErrorCode::ConfigError, "unknown key " + path + "/" + k);
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(ErrorCode::ConfigError, "missing key " + path + "/" + key);
  return j.at(key);
}

template <class T>
T get(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::ConfigError, "wrong type at " + path);
  }
}

template <class T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j.at(key), path + "/" + key) : fallback;
}

SpectralDensity parse_density(const json& j, const std::string& path) {
  const auto form = get<std::string>(require(j, path, "form"), path + "/form");
  if (form == "ohmic") {
    allow_only(j, path, {"form", "gamma", "s", "cutoff"});
    return SpectralDensity{OhmicDensity{get_or(j, path, "gamma", 1.0), get_or(j, path, "s", 1.0),
                                        get_or(j, path, "cutoff", 1.0)}};
  }
  if (form == "flat") {
    allow_only(j, path, {"form", "gamma", "lo", "hi"});
    return SpectralDensity{FlatDensity{get_or(j, path, "gamma", 1.0), get<double>(require(j, path, "lo"), path + "/lo"),
                                       get<double>(require(j, path, "hi"), path + "/hi")}};
  }
  if (form == "tabulated") {
    allow_only(j, path, {"form", "omega", "value"});
    return SpectralDensity{TabulatedDensity{get<std::vector<double>>(require(j, path, "omega"), path + "/omega"),
                                            get<std::vector<double>>(require(j, path, "value"), path + "/value")}};
  }
  fail(ErrorCode::ConfigError, "unknown density form '" + form + "' at " + path + "/form");
}

json density_to_json(const SpectralDensity& d) {
  if (const auto* o = std::get_if<OhmicDensity>(&d.form()))
    return {{"form", "ohmic"}, {"gamma", o->gamma}, {"s", o->s}, {"cutoff", o->cutoff}};
  if (const auto* f = std::get_if<FlatDensity>(&d.form()))
    return {{"form", "flat"}, {"gamma", f->gamma}, {"lo", f->lo}, {"hi", f->hi}};
  const auto& t = std::get<TabulatedDensity>(d.form());
  return {{"form", "tabulated"}, {"omega", t.omega}, {"value", t.value}};
}

}  // namespace

CMat matrix_from_json(const json& j, int dim, const std::string& path) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
    fail(ErrorCode::ConfigError, path + " must list " + std::to_string(dim * dim) + " [re, im] pairs");
  CMat m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      const auto idx = static_cast<std::size_t>(r * dim + c);
      const auto p = get<std::vector<double>>(j[idx], path + "/" + std::to_string(idx));
      if (p.size() != 2) fail(ErrorCode::ConfigError, path + "/" + std::to_string(idx) + " must be [re, im]");
      m(r, c) = cplx(p[0], p[1]);
    }
  return m;
}

json matrix_to_json(const CMat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back({m(r, c).real(), m(r, c).imag()});
  return out;
}

RunConfig parse_config(const json& j) {
  allow_only(j, "", {"system", "reservoirs", "run", "modes"});
  RunConfig cfg;
  ModelConfig& m = cfg.model;

  const json& sys = require(j, "", "system");
  allow_only(sys, "/system", {"hamiltonian", "degeneracy_tol"});
  const json& hj = require(sys, "/system", "hamiltonian");
  if (!hj.is_array()) fail(ErrorCode::ConfigError, "/system/hamiltonian must be an array");
  const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(hj.size()))));
  const CMat h = matrix_from_json(hj, dim, "/system/hamiltonian");
  std::optional<double> tol;
  if (sys.contains("degeneracy_tol")) tol = get<double>(sys.at("degeneracy_tol"), "/system/degeneracy_tol");
  m.system = build_system(h, tol);

  const json& rs = require(j, "", "reservoirs");
  if (!rs.is_array() || rs.empty()) fail(ErrorCode::ConfigError, "/reservoirs must be a nonempty array");
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const std::string p = "/reservoirs/" + std::to_string(k);
    allow_only(rs[k], p, {"label", "beta", "coupling", "density", "g_zero"});
    ReservoirSpec r;
    r.label = get_or<std::string>(rs[k], p, "label", "r" + std::to_string(k));
    r.beta = get<double>(require(rs[k], p, "beta"), p + "/beta");
    if (!(r.beta > 0.0)) fail(ErrorCode::NonPositiveTemperature, p + "/beta must be > 0");
    r.coupling = matrix_from_json(require(rs[k], p, "coupling"), dim, p + "/coupling");
    r.density = parse_density(require(rs[k], p, "density"), p + "/density");
    r.g_zero = get_or(rs[k], p, "g_zero", 0.0);
    m.reservoirs.push_back(std::move(r));
  }
  const std::size_t nk = m.reservoirs.size();

  // Default box [-beta_k, 2 beta_k] contains the whole entropy direction nu in [0, 1].
  for (const auto& r : m.reservoirs) {
    m.domain.lo.push_back(-r.beta);
    m.domain.hi.push_back(2.0 * r.beta);
  }
  if (j.contains("run")) {
    const json& run = j.at("run");
    allow_only(run, "/run", {"lambda", "rho_E", "domain_box", "variant", "lamb_shift", "quadrature"});
    m.lambda = get_or(run, "/run", "lambda", m.lambda);
    if (run.contains("rho_E")) {
      m.rho_E = matrix_from_json(run.at("rho_E"), dim, "/run/rho_E");
      validate_state(m.rho_E);
    }
    if (run.contains("domain_box")) {
      const json& b = run.at("domain_box");
      allow_only(b, "/run/domain_box", {"lo", "hi"});
      m.domain.lo = get<std::vector<double>>(require(b, "/run/domain_box", "lo"), "/run/domain_box/lo");
      m.domain.hi = get<std::vector<double>>(require(b, "/run/domain_box", "hi"), "/run/domain_box/hi");
      if (m.domain.lo.size() != nk || m.domain.hi.size() != nk)
        fail(ErrorCode::ConfigError, "/run/domain_box needs one entry per reservoir");
      for (std::size_t k = 0; k < nk; ++k)
        if (!(m.domain.lo[k] <= m.domain.hi[k])) fail(ErrorCode::EmptyRange, "/run/domain_box has lo > hi");
    }
    const auto variant = get_or<std::string>(run, "/run", "variant", "full_secular");
    if (variant == "full_secular")
      m.variant = GeneratorVariant::FullSecular;
    else if (variant == "pair_diagonal")
      m.variant = GeneratorVariant::PairDiagonal;
    else
      fail(ErrorCode::ConfigError, "unknown variant '" + variant + "' at /run/variant");
    m.lamb_shift = get_or(run, "/run", "lamb_shift", true);
    if (run.contains("quadrature")) {
      const json& q = run.at("quadrature");
      const std::string p = "/run/quadrature";
      allow_only(q, p, {"abs_tol", "rel_tol", "base_panels", "max_level"});
      m.quadrature.abs_tol = get_or(q, p, "abs_tol", m.quadrature.abs_tol);
      m.quadrature.rel_tol = get_or(q, p, "rel_tol", m.quadrature.rel_tol);
      m.quadrature.base_panels = get_or(q, p, "base_panels", m.quadrature.base_panels);
      m.quadrature.max_level = get_or(q, p, "max_level", m.quadrature.max_level);
    }
  }
  if (!(m.lambda >= 0.0)) fail(ErrorCode::ConfigError, "/run/lambda must be >= 0");

  cfg.modes.nmax.assign(nk, 2);
  if (j.contains("modes")) {
    const json& md = j.at("modes");
    const std::string p = "/modes";
    allow_only(md, p, {"n_modes", "nmax", "band_center", "band_scale", "band_min", "range", "scheme", "dim_cap"});
    FvBuildSpec& s = cfg.modes;
    s.n_modes = get_or(md, p, "n_modes", s.n_modes);
    s.nmax = get_or(md, p, "nmax", s.nmax);
    s.band_center = get_or(md, p, "band_center", s.band_center);
    s.band_scale = get_or(md, p, "band_scale", s.band_scale);
    s.band_min = get_or(md, p, "band_min", s.band_min);
    if (md.contains("range")) {
      const auto r = get<std::vector<double>>(md.at("range"), p + "/range");
      if (r.size() != 2) fail(ErrorCode::ConfigError, p + "/range must be [lo, hi]");
      s.range = std::make_pair(r[0], r[1]);
    }
    const auto scheme = get_or<std::string>(md, p, "scheme", "midpoint");
    if (scheme == "midpoint")
      s.scheme = DiscretizationScheme::Midpoint;
    else if (scheme == "gauss_legendre")
      s.scheme = DiscretizationScheme::GaussLegendre;
    else
      fail(ErrorCode::ConfigError, "unknown scheme '" + scheme + "' at /modes/scheme");
    s.dim_cap = get_or(md, p, "dim_cap", s.dim_cap);
    if (s.nmax.size() != nk) fail(ErrorCode::ConfigError, "/modes/nmax needs one entry per reservoir");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, "config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  json j;
  j["system"] = {{"hamiltonian", matrix_to_json(m.system.hamiltonian)}, {"degeneracy_tol", m.system.degeneracy_tol}};
  j["reservoirs"] = json::array();
  for (const auto& r : m.reservoirs)
    j["reservoirs"].push_back({{"label", r.label},
                               {"beta", r.beta},
                               {"coupling", matrix_to_json(r.coupling)},
                               {"density", density_to_json(r.density)},
                               {"g_zero", r.g_zero}});
  json run = {{"lambda", m.lambda},
              {"domain_box", {{"lo", m.domain.lo}, {"hi", m.domain.hi}}},
              {"variant", m.variant == GeneratorVariant::FullSecular ? "full_secular" : "pair_diagonal"},
              {"lamb_shift", m.lamb_shift},
              {"quadrature",
               {{"abs_tol", m.quadrature.abs_tol},
                {"rel_tol", m.quadrature.rel_tol},
                {"base_panels", m.quadrature.base_panels},
                {"max_level", m.quadrature.max_level}}}};
  if (m.rho_E.size() > 0) run["rho_E"] = matrix_to_json(m.rho_E);
  j["run"] = run;
  const FvBuildSpec& s = cfg.modes;
  json md = {{"n_modes", s.n_modes},         {"nmax", s.nmax},
             {"band_center", s.band_center}, {"band_scale", s.band_scale},
             {"band_min", s.band_min},       {"scheme", s.scheme == DiscretizationScheme::Midpoint ? "midpoint" : "gauss_legendre"},
             {"dim_cap", s.dim_cap}};
  if (s.range) md["range"] = {s.range->first, s.range->second};
  j["modes"] = md;
  return j;
}

}  // namespace fcs
