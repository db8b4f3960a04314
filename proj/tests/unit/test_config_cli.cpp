#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fcs/cli.hpp"
#include "fcs/config.hpp"
#include "fcs/errors.hpp"
#include "fcs/io.hpp"

using namespace fcs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json canonical_json() {
  std::ifstream in(FCS_CANONICAL_CONFIG);
  return json::parse(in);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fcs_cli_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const json& j, const std::string& name) {
  const fs::path p = scratch(name) / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fcs");
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = cli::run(args);
  return {code, ::testing::internal::GetCapturedStdout(), ::testing::internal::GetCapturedStderr()};
}

ErrorCode parse_error(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "config unexpectedly parsed";
  return ErrorCode::ConfigError;
}

}  // namespace

TEST(Config, CanonicalFileMatchesBuiltInModel) {
  const RunConfig c = load_config(FCS_CANONICAL_CONFIG);
  const ModelConfig ref = canonical_qubit();
  EXPECT_EQ(max_abs(c.model.system.hamiltonian - ref.system.hamiltonian), 0.0);
  ASSERT_EQ(c.model.reservoirs.size(), 2u);
  EXPECT_EQ(c.model.reservoirs[1].beta, 2.0);
  EXPECT_EQ(max_abs(c.model.reservoirs[0].coupling - ref.reservoirs[0].coupling), 0.0);
  EXPECT_EQ(c.model.lambda, 0.1);
  EXPECT_EQ(c.model.domain.hi[1], 2.5);
  EXPECT_EQ(c.modes.n_modes, 3);
  EXPECT_EQ(c.modes.band_scale, 9.0);
}

TEST(Config, UnknownKeyNamesItsPath) {
  json j = canonical_json();
  j["reservoirs"][1]["density"]["bogus"] = 1;
  try {
    parse_config(j);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    EXPECT_NE(std::string(e.what()).find("/reservoirs/1/density/bogus"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsMalformedValues) {
  json j = canonical_json();
  j["reservoirs"][0]["beta"] = "hot";
  EXPECT_EQ(parse_error(j), ErrorCode::ConfigError);
  j = canonical_json();
  j["reservoirs"][0]["beta"] = -1.0;
  EXPECT_EQ(parse_error(j), ErrorCode::NonPositiveTemperature);
  j = canonical_json();
  j["system"]["hamiltonian"] = json::array({json::array({0.5, 0}), json::array({0, 0}), json::array({0, 0})});
  EXPECT_EQ(parse_error(j), ErrorCode::ConfigError);
  j = canonical_json();
  j["run"]["variant"] = "other";
  EXPECT_EQ(parse_error(j), ErrorCode::ConfigError);
  j = canonical_json();
  j["system"]["hamiltonian"][1] = json::array({0.0, 1.0});
  EXPECT_EQ(parse_error(j), ErrorCode::NonHermitianInput);
}

TEST(Config, JsonRoundTrip) {
  const RunConfig a = load_config(FCS_CANONICAL_CONFIG);
  const json ja = to_json(a);
  const RunConfig b = parse_config(ja);
  EXPECT_EQ(to_json(b).dump(), ja.dump());
  const CMat m = random_hermitian(3, 2) + I * random_hermitian(3, 3);
  EXPECT_EQ(max_abs(matrix_from_json(matrix_to_json(m), 3, "/m") - m), 0.0);
}

TEST(Io, NumberFormattingAndCsv) {
  EXPECT_EQ(io::number(0.1), "0.10000000000000001");
  EXPECT_EQ(io::number(-2.0), "-2");
  EXPECT_EQ(io::hex(io::fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(io::hex(io::fnv1a("a")), "af63dc4c8601ec8c");
  io::CsvWriter w({"x", "y"}, "abc");
  w.row({1.0, 0.5});
  EXPECT_EQ(w.str(), "# manifest abc\nx,y\n1,0.5\n");
}

TEST(Io, ManifestHashIgnoresWallTime) {
  io::RunManifest a;
  a.config_hash = "1";
  a.subcommand = "moments";
  a.parameters = {{"k", 1}};
  io::RunManifest b = a;
  b.wall_time = 12.0;
  b.outputs = {"x.csv"};
  EXPECT_EQ(a.hash(), b.hash());
  b.parameters = {{"k", 2}};
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Cli, ValidateAndGcCheck) {
  const fs::path out = scratch("validate");
  const Result v = run_cli({"validate", "--config", FCS_CANONICAL_CONFIG, "--out", out.string()});
  ASSERT_EQ(v.code, 0) << v.err;
  EXPECT_TRUE(fs::exists(out / "validate.json"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  const Result g = run_cli({"gc-check", "--config", FCS_CANONICAL_CONFIG, "--out", out.string()});
  ASSERT_EQ(g.code, 0) << g.err;
  const json summary = json::parse(slurp(out / "gc_check.json"));
  EXPECT_LT(summary.at("max_defect").get<double>(), 1e-9);
  const std::string csv = slurp(out / "gc_check.csv");
  EXPECT_EQ(csv.rfind("# manifest ", 0), 0u);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
  const fs::path a = scratch("repeat_a"), b = scratch("repeat_b");
  for (const auto& dir : {a, b}) {
    const Result r = run_cli({"trajectories", "--config", FCS_CANONICAL_CONFIG, "--out", dir.string(), "--samples", "400",
                              "--seed", "9", "--jobs", dir == a ? "1" : "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() == "manifest.json") continue;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
  }
}

TEST(Cli, ConfigErrorExitsWithTwo) {
  json j = canonical_json();
  j["system"]["foo"] = 1;
  const Result r = run_cli({"validate", "--config", write_config(j, "bad").string(), "--out", scratch("bad_out").string()});
  EXPECT_EQ(r.code, 2);
  const json err = json::parse(r.err);
  EXPECT_EQ(err.at("error"), "ConfigError");
  EXPECT_EQ(err.at("exit_code"), 2);
  EXPECT_EQ(run_cli({"generator", "--config", FCS_CANONICAL_CONFIG, "--kappa", "5,0"}).code, 2);
  EXPECT_EQ(run_cli({"moments"}).code, 2);
}

TEST(Cli, NumericalFailureExitsWithThree) {
  json j = canonical_json();
  for (auto& r : j["reservoirs"]) r["coupling"] = json::array({json::array({1, 0}), json::array({0, 0}), json::array({0, 0}),
                                                              json::array({1, 0})});
  const Result r = run_cli({"moments", "--config", write_config(j, "collide").string(), "--out", scratch("collide_out").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.err).at("error"), "EigenvalueCollision");
}

TEST(Cli, FlagsOverrideEnvironment) {
  const fs::path env_dir = scratch("env_dir"), flag_dir = scratch("flag_dir");
  ::setenv("FCS_OUT", env_dir.string().c_str(), 1);
  ::setenv("FCS_KAPPA", "0.5,0", 1);
  ASSERT_EQ(run_cli({"generator", "--config", FCS_CANONICAL_CONFIG}).code, 0);
  const json from_env = json::parse(slurp(env_dir / "generator.json"));
  EXPECT_DOUBLE_EQ(from_env.at("kappa")[0].get<double>(), 0.5);
  ASSERT_EQ(run_cli({"generator", "--config", FCS_CANONICAL_CONFIG, "--out", flag_dir.string(), "--kappa", "0.25,0"}).code, 0);
  const json from_flag = json::parse(slurp(flag_dir / "generator.json"));
  EXPECT_DOUBLE_EQ(from_flag.at("kappa")[0].get<double>(), 0.25);
  ::unsetenv("FCS_OUT");
  ::unsetenv("FCS_KAPPA");
}
