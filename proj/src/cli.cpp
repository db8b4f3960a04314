#include "fcs/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "fcs/config.hpp"
#include "fcs/errors.hpp"
#include "fcs/finite_volume.hpp"
#include "fcs/io.hpp"
#include "fcs/scgf.hpp"
#include "fcs/trajectories.hpp"
#include "fcs/transfer.hpp"

namespace fcs::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out = "fcs-out";
  int jobs = 0;
  std::uint64_t seed = 1;
  std::vector<std::string> kappa;
  std::string nu;
  std::vector<double> lambda;
  double tmax = 0.0;
  int modes = 0;
  std::vector<int> nmax;
  int nblock = 6;
  double tau = 0.08;
  std::vector<std::string> alpha;
  int samples = 10000;
  std::string initial = "stationary";
};

json to_json(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const RMat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(RVec(m.row(r).transpose())));
  return rows;
}

std::vector<double> to_std(const RVec& v) { return {v.data(), v.data() + v.size()}; }

RVec parse_vector(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  ss.imbue(std::locale::classic());
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, flag + " expects comma-separated numbers, got '" + text + "'");
    }
  }
  if (vals.size() != expected)
    fail(ErrorCode::ConfigError, flag + " needs " + std::to_string(expected) + " entries, got '" + text + "'");
  return Eigen::Map<RVec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::vector<RVec> parse_vectors(const std::vector<std::string>& texts, std::size_t k, const std::string& flag) {
  std::vector<RVec> out;
  for (const auto& t : texts) out.push_back(parse_vector(t, k, flag));
  return out;
}

std::vector<double> parse_range(const std::string& text) {
  std::vector<double> p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      p.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "--nu expects start:stop:step, got '" + text + "'");
    }
  }
  if (p.size() != 3 || !(p[2] > 0.0)) fail(ErrorCode::ConfigError, "--nu expects start:stop:step with step > 0");
  if (p[1] < p[0]) fail(ErrorCode::EmptyRange, "--nu range is empty");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((p[1] - p[0]) / p[2] + 1e-9));
  for (long i = 0; i <= n; ++i) grid.push_back(p[0] + static_cast<double>(i) * p[2]);
  return grid;
}

RVec betas_of(const ModelConfig& m) {
  const auto b = m.betas();
  return Eigen::Map<const RVec>(b.data(), static_cast<Eigen::Index>(b.size()));
}

std::vector<RVec> unit_kappas(std::size_t k, double scale) {
  std::vector<RVec> out;
  for (std::size_t i = 0; i < k; ++i) {
    RVec v = RVec::Zero(static_cast<Eigen::Index>(k));
    v(static_cast<Eigen::Index>(i)) = scale;
    out.push_back(v);
  }
  return out;
}

class Session {
 public:
  Session(const Options& opt, std::string subcommand, RunConfig cfg)
      : out_(opt.out), cfg_(std::move(cfg)), start_(std::chrono::steady_clock::now()) {
    manifest_.config_hash = io::hex(io::fnv1a(fcs::to_json(cfg_).dump()));
    manifest_.subcommand = std::move(subcommand);
  }

  RunConfig& config() { return cfg_; }
  void set_parameters(json p) { manifest_.parameters = std::move(p); }
  std::string hash() const { return manifest_.hash(); }

  void csv(const std::string& name, const io::CsvWriter& w) { write(name, w.str()); }
  void json_file(const std::string& name, json j) {
    j["manifest_hash"] = hash();
    write(name, j.dump(2) + "\n");
  }

  void finish(json summary) {
    manifest_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    io::write_file(out_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
    summary["manifest_hash"] = hash();
    std::cout << summary.dump(2) << "\n";
  }

 private:
  void write(const std::string& name, const std::string& text) {
    io::write_file(out_ / name, text);
    manifest_.outputs.push_back(name);
  }

  std::filesystem::path out_;
  RunConfig cfg_;
  io::RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> kappa_header(std::size_t k, const std::string& prefix) {
  std::vector<std::string> h;
  for (std::size_t i = 0; i < k; ++i) h.push_back(prefix + std::to_string(i + 1));
  return h;
}

void cmd_validate(Session& s) {
  const ModelConfig& m = s.config().model;
  const auto cs = couplings(m);
  std::vector<CMat> ds;
  std::vector<EffectiveDensity> gs;
  bool hermitian = true;
  for (const auto& c : cs) {
    ds.push_back(c.D);
    gs.push_back(c.G);
    hermitian = hermitian && hermiticity_residual(c.D) <= 1e-12 * std::max(1.0, max_abs(c.D));
  }
  const auto irr = check_fgr_irreducibility(m.system, ds, gs);
  json adm = json::array();
  for (const auto& r : m.reservoirs) {
    const auto [lo, hi] = admissible_kappa(r);
    adm.push_back({std::isfinite(lo) ? json(lo) : json(nullptr), std::isfinite(hi) ? json(hi) : json(nullptr)});
  }
  s.set_parameters(json::object());
  const json report = {{"dim", m.system.dim},
                       {"eigenvalues", m.system.eigenvalues},
                       {"multiplicities", m.system.multiplicities},
                       {"bohr_set", m.system.bohr_set},
                       {"fgr_irreducible", irr.irreducible},
                       {"commutant_dimension", irr.commutant_dimension},
                       {"gc_applicable", hermitian},
                       {"betas", m.betas()},
                       {"admissible_kappa", adm},
                       {"domain_box", {{"lo", m.domain.lo}, {"hi", m.domain.hi}}}};
  s.json_file("validate.json", report);
  s.finish(report);
}

void cmd_generator(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const std::size_t k = m.reservoirs.size();
  const RVec kappa = o.kappa.empty() ? RVec::Zero(static_cast<Eigen::Index>(k)) : parse_vector(o.kappa.front(), k, "--kappa");
  s.set_parameters({{"kappa", to_json(kappa)}});
  const GeneratorParts p = build_deformed_lindblad(m, DeformationVector(kappa, m.domain));
  json shifts = json::array();
  for (const auto& l : p.lamb_shift) shifts.push_back({{"reservoir", l.reservoir}, {"omega", l.omega}, {"H", l.value}});
  json rates = json::array();
  for (const auto& r : p.jump_rates)
    rates.push_back({{"reservoir", r.reservoir}, {"omega", r.omega}, {"from", r.from_level}, {"to", r.to_level}, {"rate", r.rate}});
  const json out = {{"kappa", to_json(kappa)},
                    {"variant", p.variant == GeneratorVariant::FullSecular ? "full_secular" : "pair_diagonal"},
                    {"picture", "heisenberg"},
                    {"upsilon", matrix_to_json(p.upsilon)},
                    {"lamb_shift", shifts},
                    {"jump_rates", rates},
                    {"generator", matrix_to_json(p.assembled.matrix())}};
  s.json_file("generator.json", out);
  s.finish({{"kappa", to_json(kappa)}, {"superoperator_dim", p.assembled.matrix().rows()}, {"jump_rates", rates}});
}

void cmd_scgf_scan(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const std::size_t k = m.reservoirs.size();
  const Scgf scgf(m);
  std::vector<RVec> kappas;
  std::vector<double> nus;
  if (!o.kappa.empty()) {
    kappas = parse_vectors(o.kappa, k, "--kappa");
  } else {
    nus = parse_range(o.nu.empty() ? "0:1:0.05" : o.nu);
    for (double nu : nus) kappas.push_back(nu * betas_of(m));
  }
  s.set_parameters({{"kappa", o.kappa}, {"nu", nus}});
  auto header = kappa_header(k, "kappa_");
  if (!nus.empty()) header.insert(header.begin(), "nu");
  header.push_back("f");
  header.push_back("gap");
  io::CsvWriter csv(header, s.hash());
  json rows = json::array();
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const ScgfResult r = scgf.at(kappas[i]);
    std::vector<double> row;
    if (!nus.empty()) row.push_back(nus[i]);
    for (double v : to_std(kappas[i])) row.push_back(v);
    row.push_back(r.f);
    row.push_back(r.gap);
    csv.row(row);
    rows.push_back({{"kappa", to_json(kappas[i])}, {"f", r.f}, {"gap", r.gap}, {"warnings", r.warnings}});
  }
  s.csv("scgf_scan.csv", csv);
  s.finish({{"points", rows.size()}, {"results", rows}});
}

void cmd_gc_check(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const Scgf scgf(m);
  const auto nus = parse_range(o.nu.empty() ? "0:1:0.05" : o.nu);
  s.set_parameters({{"nu", nus}});
  const GcReport r = gc_symmetry_defect(scgf, m.betas(), nus);
  io::CsvWriter csv({"nu", "f_nu", "f_mirror", "defect"}, s.hash());
  for (std::size_t i = 0; i < r.nu.size(); ++i) csv.row({r.nu[i], r.f_nu[i], r.f_mirror[i], r.defect[i]});
  s.csv("gc_check.csv", csv);
  const json summary = {{"max_defect", r.max_defect}, {"points", r.nu.size()}};
  s.json_file("gc_check.json", summary);
  s.finish(summary);
}

json moments_json(const TransportMoments& t) {
  return {{"mean_currents", to_json(t.mean_currents)},
          {"covariance", to_json(t.covariance)},
          {"entropy_production_rate", t.entropy_production_rate},
          {"fd_gradient", to_json(t.fd_gradient)},
          {"fd_hessian", to_json(t.fd_hessian)},
          {"gradient_mismatch", t.gradient_mismatch},
          {"hessian_mismatch", t.hessian_mismatch},
          {"energy_balance_residual", t.energy_balance_residual}};
}

void cmd_moments(Session& s) {
  const ModelConfig& m = s.config().model;
  const Scgf scgf(m);
  s.set_parameters(json::object());
  const json out = moments_json(transport_moments(scgf, m.betas()));
  s.json_file("moments.json", out);
  s.finish(out);
}

void cmd_rate_function(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const std::size_t k = m.reservoirs.size();
  const Scgf scgf(m);
  std::vector<RVec> alphas;
  if (!o.alpha.empty()) {
    alphas = parse_vectors(o.alpha, k, "--alpha");
  } else {
    // Mean currents shifted by 0, +-1, +-2 standard deviations along each coordinate.
    const TransportMoments t = transport_moments(scgf, m.betas());
    alphas.push_back(t.mean_currents);
    for (std::size_t i = 0; i < k; ++i) {
      const auto a = static_cast<Eigen::Index>(i);
      const double sd = std::sqrt(std::max(t.covariance(a, a), 0.0));
      for (double c : {-2.0, -1.0, 1.0, 2.0}) {
        RVec v = t.mean_currents;
        v(a) += c * sd;
        alphas.push_back(v);
      }
    }
  }
  json ap = json::array();
  for (const auto& a : alphas) ap.push_back(to_json(a));
  s.set_parameters({{"alpha", ap}});
  const RateFunctionTable table = rate_function(scgf, alphas);
  auto header = kappa_header(k, "alpha_");
  header.push_back("I");
  for (auto& h : kappa_header(k, "kappa_star_")) header.push_back(h);
  header.push_back("boundary");
  io::CsvWriter csv(header, s.hash());
  for (const auto& p : table.points) {
    auto row = to_std(p.alpha);
    row.push_back(p.I);
    for (double v : to_std(p.kappa_star)) row.push_back(v);
    row.push_back(p.boundary ? 1.0 : 0.0);
    csv.row(row);
  }
  s.csv("rate_function.csv", csv);
  s.finish({{"points", table.points.size()}});
}

FvBuildSpec fv_spec(const RunConfig& cfg, const Options& o) {
  FvBuildSpec spec = cfg.modes;
  if (o.modes > 0) spec.n_modes = o.modes;
  if (!o.nmax.empty()) spec.nmax = o.nmax;
  return spec;
}

json fv_spec_json(const FvBuildSpec& spec) {
  return {{"n_modes", spec.n_modes}, {"nmax", spec.nmax}, {"band_center", spec.band_center}, {"band_scale", spec.band_scale}};
}

void cmd_fv_compare(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const std::size_t k = m.reservoirs.size();
  const Scgf scgf(m);
  const FvBuildSpec spec = fv_spec(s.config(), o);
  const std::vector<double> lambdas = o.lambda.empty() ? std::vector<double>{0.4, 0.2, 0.1} : o.lambda;
  std::vector<RVec> kappas = o.kappa.empty() ? unit_kappas(k, 0.5) : parse_vectors(o.kappa, k, "--kappa");
  const double c = o.tmax > 0.0 ? o.tmax : 1.0;
  InitialState init = InitialState::FgrStationary;
  if (o.initial == "configured")
    init = InitialState::Configured;
  else if (o.initial != "stationary")
    fail(ErrorCode::ConfigError, "--initial must be 'stationary' or 'configured'");
  json kp = json::array();
  for (const auto& v : kappas) kp.push_back(to_json(v));
  s.set_parameters({{"lambda", lambdas}, {"kappa", kp}, {"c_time", c}, {"modes", fv_spec_json(spec)}, {"initial", o.initial}});
  const WeakCouplingTable table = weak_coupling_compare(m, scgf, kappas, lambdas, c, spec, init);
  auto header = kappa_header(k, "kappa_");
  header.insert(header.begin(), "lambda");
  for (const char* h : {"t", "log_chi_rate", "prediction", "deviation"}) header.emplace_back(h);
  io::CsvWriter csv(header, s.hash());
  for (const auto& r : table.rows) {
    std::vector<double> row{r.lambda};
    for (double v : to_std(r.kappa)) row.push_back(v);
    for (double v : {r.t, r.log_chi_rate, r.prediction, r.deviation}) row.push_back(v);
    csv.row(row);
  }
  s.csv("fv_compare.csv", csv);
  const json summary = {{"lambda", table.lambdas}, {"median_deviation", table.median_deviation}};
  s.json_file("fv_compare.json", summary);
  s.finish(summary);
}

void cmd_fv_tpm(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const std::size_t k = m.reservoirs.size();
  const FvBuildSpec spec = fv_spec(s.config(), o);
  const double lam = o.lambda.empty() ? m.lambda : o.lambda.front();
  const FiniteVolumeModel fv = build_finite_volume(m, spec, lam);
  const double t = o.tmax > 0.0 ? o.tmax : 0.5 * fv.recurrence_time();
  const std::vector<RVec> kappas = parse_vectors(o.kappa, k, "--kappa");
  json kp = json::array();
  for (const auto& v : kappas) kp.push_back(to_json(v));
  s.set_parameters({{"lambda", lam}, {"t", t}, {"kappa", kp}, {"modes", fv_spec_json(spec)}});
  const Propagator prop(fv);
  const CMat rho = m.initial_state();
  const RMat w = transition_weights(fv, prop.unitary(t), rho);
  const TpmDistribution d = tpm_from_weights(fv, w, t);
  auto header = kappa_header(k, "y_");
  header.emplace_back("probability");
  io::CsvWriter csv(header, s.hash());
  double total = 0.0;
  for (std::size_t i = 0; i < d.probabilities.size(); ++i) {
    auto row = to_std(d.support[i]);
    row.push_back(d.probabilities[i]);
    csv.row(row);
    total += d.probabilities[i];
  }
  s.csv("fv_tpm.csv", csv);
  json checks = json::array();
  for (const auto& kv : kappas) {
    const cplx chi = characteristic_from_weights(fv, w, kv.cast<cplx>());
    double sum = 0.0;
    for (std::size_t i = 0; i < d.probabilities.size(); ++i) sum += d.probabilities[i] * std::exp(-kv.dot(d.support[i]));
    checks.push_back({{"kappa", to_json(kv)}, {"chi", chi.real()}, {"tpm_sum", sum}, {"difference", std::abs(sum - chi.real())}});
  }
  const json summary = {{"dim", fv.dim},           {"t", t},
                        {"atoms", d.probabilities.size()}, {"total_probability", total},
                        {"chi_checks", checks},    {"recurrence_time", fv.recurrence_time()},
                        {"warnings", fv.warnings}};
  s.json_file("fv_tpm.json", summary);
  s.finish(summary);
}

void cmd_transfer(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const std::size_t k = m.reservoirs.size();
  const Scgf scgf(m);
  const FvBuildSpec spec = fv_spec(s.config(), o);
  const double lam = o.lambda.empty() ? m.lambda : o.lambda.front();
  const std::vector<RVec> kappas = o.kappa.empty() ? unit_kappas(k, 0.5) : parse_vectors(o.kappa, k, "--kappa");
  json kp = json::array();
  for (const auto& v : kappas) kp.push_back(to_json(v));
  s.set_parameters({{"lambda", lam}, {"tau", o.tau}, {"nblock", o.nblock}, {"kappa", kp}, {"modes", fv_spec_json(spec)}});
  const FiniteVolumeModel fv = build_finite_volume(m, spec, lam);
  const Propagator prop(fv);
  auto header = kappa_header(k, "kappa_");
  header.emplace_back("n");
  header.emplace_back("norm");
  io::CsvWriter csv(header, s.hash());
  json results = json::array();
  for (const auto& kv : kappas) {
    const CompressedDynamics cd = compressed_step(fv, prop, kv, o.tau);
    const PolymerBlocks blocks = extract_blocks(cd, o.nblock, fv.recurrence_time());
    const TransferOperator t = build_and_deform(blocks, o.nblock);
    for (std::size_t n = 0; n < blocks.norms.size(); ++n) {
      auto row = to_std(kv);
      row.push_back(static_cast<double>(n + 1));
      row.push_back(blocks.norms[n]);
      csv.row(row);
    }
    const double fgr = lam * lam * scgf.at(kv).eigenvalue.real();
    results.push_back({{"kappa", to_json(kv)},
                       {"blocks", blocks.norms},
                       {"c_hat", blocks.c_hat},
                       {"delta", t.delta},
                       {"leading", {t.leading.real(), t.leading.imag()}},
                       {"gap", t.gap},
                       {"f_transfer", t.f_transfer},
                       {"f_fgr", fgr},
                       {"relative_gap", (t.f_transfer - fgr) / std::abs(fgr)},
                       {"leading_positive", t.leading_positive}});
  }
  s.csv("transfer_blocks.csv", csv);
  const json summary = {{"dim", fv.dim}, {"t_micro", o.tau / (lam * lam)}, {"results", results}, {"warnings", fv.warnings}};
  s.json_file("transfer.json", summary);
  s.finish(summary);
}

json clt_json(const CltReport& c) {
  return {{"rank", c.rank},   {"ks", c.ks},       {"p_values", c.p_values}, {"mahalanobis_ks", c.mahalanobis_ks},
          {"mahalanobis_p", c.mahalanobis_p}, {"min_p", c.min_p}, {"alpha", c.alpha}, {"null_leak", c.null_leak},
          {"pass", c.pass}};
}

void cmd_trajectories(Session& s, const Options& o) {
  const ModelConfig& m = s.config().model;
  const std::size_t k = m.reservoirs.size();
  const Scgf scgf(m);
  const RateProcess rp = build_rate_process(m);
  const double gap = scgf.at(RVec::Zero(static_cast<Eigen::Index>(k))).gap;
  const double horizon = o.tmax > 0.0 ? o.tmax : 100.0 / gap;
  const std::vector<RVec> kappas = o.kappa.empty() ? std::vector<RVec>{0.2 * betas_of(m)} : parse_vectors(o.kappa, k, "--kappa");
  json kp = json::array();
  for (const auto& v : kappas) kp.push_back(to_json(v));
  // jobs is excluded on purpose: outputs do not depend on it.
  s.set_parameters({{"T", horizon}, {"samples", o.samples}, {"seed", o.seed}, {"kappa", kp}});
  const TrajectoryEnsemble ens = sample(rp, horizon, o.samples, o.seed, o.jobs);

  auto header = kappa_header(k, "y_");
  header.insert(header.begin(), "sample");
  header.emplace_back("S");
  io::CsvWriter csv(header, s.hash());
  for (int i = 0; i < ens.n_samples; ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (Eigen::Index j = 0; j < ens.y.cols(); ++j) row.push_back(ens.y(i, j));
    row.push_back(ens.entropy(i));
    csv.row(row);
  }
  s.csv("ensemble.csv", csv);

  const TransportMoments tm = transport_moments(scgf, m.betas());
  const MeanCurrentEstimate mc = empirical_mean_currents(ens, tm.mean_currents, 200, o.seed);
  json est = json::array();
  for (const auto& kv : kappas) {
    const ScgfEstimate e = empirical_scgf(ens, rp, kv, 200, o.seed);
    est.push_back({{"kappa", to_json(kv)},
                   {"estimate", e.estimate},
                   {"std_error", e.std_error},
                   {"effective_samples", e.effective_samples},
                   {"prediction", e.prediction},
                   {"asymptotic_prediction", e.asymptotic_prediction}});
  }
  const CltReport clt = clt_test(ens, clt_normalization(tm), lattice_step(m.system.bohr_set), 0.01, o.seed);
  json hist = json::array();
  for (const auto& r : entropy_histogram(ens, 20))
    hist.push_back({{"s", r.s}, {"log_ratio", r.log_ratio}, {"count_pos", r.count_pos}, {"count_neg", r.count_neg}});
  const json summary = {{"T", horizon},
                        {"samples", ens.n_samples},
                        {"mean_currents", {{"estimate", to_json(mc.estimate)}, {"std_error", to_json(mc.std_error)}, {"prediction", to_json(mc.prediction)}}},
                        {"scgf", est},
                        {"clt", clt_json(clt)},
                        {"entropy_histogram", hist}};
  s.json_file("trajectories.json", summary);
  s.finish(summary);
}

json error_json(const std::string& code, const std::string& message, int exit_code) {
  return {{"error", code}, {"message", message}, {"exit_code", exit_code}};
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Full counting statistics of energy transport for weakly coupled open quantum systems"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"validate", "check a model config and report its Bohr set and irreducibility"},
      {"generator", "assemble the deformed generator at one kappa"},
      {"scgf-scan", "scan the scaled cumulant generating function over kappa or nu"},
      {"gc-check", "Gallavotti-Cohen symmetry defect along kappa = nu * beta"},
      {"moments", "mean currents, covariance and entropy production"},
      {"rate-function", "Legendre transform of the SCGF at given currents"},
      {"fv-compare", "finite-volume characteristic function against the weak-coupling SCGF"},
      {"fv-tpm", "two-point measurement distribution of a finite-volume model"},
      {"transfer", "polymer blocks and transfer-operator estimate of the SCGF"},
      {"trajectories", "Monte Carlo energy-exchange trajectories with SCGF and CLT checks"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) subs.push_back(app.add_subcommand(name, help));

  for (CLI::App* sub : subs) {
    sub->add_option("--config", o.config, "model config (JSON)")->envname("FCS_CONFIG")->required();
    sub->add_option("--out", o.out, "output directory")->envname("FCS_OUT");
    sub->add_option("--jobs", o.jobs, "worker threads, 0 = all cores")->envname("FCS_JOBS");
    sub->add_option("--seed", o.seed, "random seed")->envname("FCS_SEED");
    sub->add_option("--kappa", o.kappa, "deformation vector a,b,... (repeatable)")->envname("FCS_KAPPA");
    sub->add_option("--nu", o.nu, "entropy-direction grid start:stop:step")->envname("FCS_NU");
    sub->add_option("--lambda", o.lambda, "coupling strengths")->delimiter(',')->envname("FCS_LAMBDA");
    sub->add_option("--tmax", o.tmax, "time horizon (fv-compare: t = tmax / lambda^2)")->envname("FCS_TMAX");
    sub->add_option("--modes", o.modes, "modes per reservoir")->envname("FCS_MODES");
    sub->add_option("--nmax", o.nmax, "occupation cutoff per reservoir")->delimiter(',')->envname("FCS_NMAX");
    sub->add_option("--nblock", o.nblock, "transfer-operator block count")->envname("FCS_NBLOCK");
    sub->add_option("--tau", o.tau, "macroscopic block time")->envname("FCS_TAU");
    sub->add_option("--alpha", o.alpha, "current vector a,b,... (repeatable)")->envname("FCS_ALPHA");
    sub->add_option("--samples", o.samples, "trajectory count")->envname("FCS_SAMPLES");
    sub->add_option("--initial", o.initial, "fv-compare system state: stationary or configured")->envname("FCS_INITIAL");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << error_json("ConfigError", e.what(), 2).dump() << "\n";
    return 2;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    Session s(o, name, load_config(o.config));
    if (name == "validate") cmd_validate(s);
    else if (name == "generator") cmd_generator(s, o);
    else if (name == "scgf-scan") cmd_scgf_scan(s, o);
    else if (name == "gc-check") cmd_gc_check(s, o);
    else if (name == "moments") cmd_moments(s);
    else if (name == "rate-function") cmd_rate_function(s, o);
    else if (name == "fv-compare") cmd_fv_compare(s, o);
    else if (name == "fv-tpm") cmd_fv_tpm(s, o);
    else if (name == "transfer") cmd_transfer(s, o);
    else if (name == "trajectories") cmd_trajectories(s, o);
    return 0;
  } catch (const Error& e) {
    const int code = is_config_error(e.code()) ? 2 : 3;
    std::cerr << error_json(std::string(to_string(e.code())), e.what(), code).dump() << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << error_json("InternalError", e.what(), 3).dump() << "\n";
    return 3;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fcs::cli
