#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = FIXTURE_DIR;
const std::string kCli = CLI_BIN_PATH;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "estimand_lab_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
  const fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd =
      env_prefix + kCli + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

}  // namespace

TEST_CASE("decompose emits a complete report and exits zero") {
  const RunResult r =
      run_cli("decompose --dgp " + kFixtures + "/binomial_reference.json --kind long");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report.at("kind") == "long");
  CHECK(report.at("assumption") == "strong");
  CHECK(report.at("identity_residual").get<double>() < 1e-10);
  CHECK(report.at("atoms").size() == 4);
  CHECK(report.at("weights").contains("denominator"));
}

TEST_CASE("reruns are byte-identical") {
  const std::string args =
      "decompose --dgp " + kFixtures + "/binomial_inter_star.json --kind inter-star --csv";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());
}

TEST_CASE("malformed configs exit 2 and leave no partial output") {
  const fs::path bad = scratch_dir() / "bad.json";
  std::ofstream(bad) << "{ not json";
  const fs::path out = scratch_dir() / "never_written.json";
  const RunResult r =
      run_cli("decompose --dgp " + bad.string() + " --kind long --out " + out.string());
  CHECK(r.exit_code == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("schema violations exit 2") {
  const fs::path cfg = scratch_dir() / "sum.json";
  std::ofstream(cfg) << R"({
    "actions": [[0, 1]],
    "joint_law": [
      {"d": 0, "a": [0], "p": 0.3}, {"d": 0, "a": [1], "p": 0.3},
      {"d": 1, "a": [0], "p": 0.3}, {"d": 1, "a": [1], "p": 0.3}
    ],
    "mu": {"affine": {"const": 0, "d": 1, "a": [0.5]}}
  })";
  CHECK(run_cli("decompose --dgp " + cfg.string() + " --kind short").exit_code == 2);
  CHECK(run_cli("decompose --dgp " + kFixtures + "/binomial_reference.json --kind quadratic")
            .exit_code == 2);
  CHECK(run_cli("decompose --dgp " + kFixtures + "/bernoulli_long_pair.json --kind inter-star")
            .exit_code == 2);
}

TEST_CASE("singular designs exit 3") {
  const fs::path cfg = scratch_dir() / "measurable.json";
  std::ofstream(cfg) << R"({
    "assumption": "strong",
    "actions": [[0, 1]],
    "full_support": false,
    "joint_law": [
      {"d": 0, "a": [0], "p": "1/2"}, {"d": 0, "a": [1], "p": "0"},
      {"d": 1, "a": [0], "p": "0"}, {"d": 1, "a": [1], "p": "1/2"}
    ],
    "mu": {"affine": {"const": 0, "d": 1, "a": [0.5]}}
  })";
  const RunResult r = run_cli("decompose --dgp " + cfg.string() + " --kind sfe");
  CHECK(r.exit_code == 3);
  CHECK(run_cli("decompose --dgp " + kFixtures + "/two_binary_030.json --kind inter").exit_code ==
        3);
}

TEST_CASE("check passes on every shipped fixture") {
  for (const char* name :
       {"binomial_reference", "binomial_long_scalar", "bernoulli_long_pair", "two_binary_030",
        "binomial_inter_scalar", "bernoulli_inter_pair", "binomial_inter_star", "ssp_short", "ssp_long",
        "ssp_inter"}) {
    const RunResult r = run_cli("check --dgp " + kFixtures + "/" + name + ".json");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("check passed") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
  }
}

TEST_CASE("a one-point sweep matches the decompose weights") {
  const RunResult sweep = run_cli("sweep --dgp " + kFixtures +
                                  "/binomial_reference.json --kind long --grid 0.8:0.8:0.1");
  const RunResult dec =
      run_cli("decompose --dgp " + kFixtures + "/binomial_reference.json --kind long");
  REQUIRE(sweep.exit_code == 0);
  REQUIRE(dec.exit_code == 0);
  const json report = json::parse(dec.out);
  std::istringstream csv(sweep.out);
  std::string line;
  std::getline(csv, line);  // version comment
  std::getline(csv, line);  // sweep comment
  std::getline(csv, line);  // header
  CHECK(line == "p,a1,omega_dce,omega_ind");
  std::size_t atom = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string p, a, dce, ind;
    std::getline(row, p, ',');
    std::getline(row, a, ',');
    std::getline(row, dce, ',');
    std::getline(row, ind, ',');
    const double want_dce = report.at("atoms").at(atom).at("omega_dce").get<double>();
    const double want_ind = report.at("atoms").at(atom).at("omega_ind").get<double>();
    CHECK(std::abs(std::stod(dce) - want_dce) < 1e-12);
    CHECK(std::abs(std::stod(ind) - want_ind) < 1e-12);
    ++atom;
  }
  CHECK(atom == 4);
}

TEST_CASE("sweep grids outside the open unit interval exit 2") {
  CHECK(run_cli("sweep --dgp " + kFixtures +
                "/binomial_reference.json --kind long --grid 0:0.9:0.1")
            .exit_code == 2);
  CHECK(run_cli("sweep --dgp " + kFixtures +
                "/binomial_reference.json --kind long --grid 0.5:0.4:0.1")
            .exit_code == 2);
  CHECK(run_cli("sweep --dgp " + kFixtures + "/binomial_reference.json --kind long --grid nope")
            .exit_code == 2);
}

TEST_CASE("search dumps replayable hits") {
  const fs::path hits = scratch_dir() / "hits";
  const RunResult r = run_cli("search --kind long --k 1 --support 3 --trials 400 --seed 7 --out " +
                              hits.string());
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary.at("trials_run") == 400);
  REQUIRE(summary.at("hit_count").get<int>() >= 1);
  const std::string file = summary.at("hits").at(0).at("file").get<std::string>();
  const json hit = json::parse(slurp(hits / file));
  // replay the stored DGP through the CLI and compare the weight column
  const fs::path replay = scratch_dir() / "replay.json";
  std::ofstream(replay) << hit.at("dgp").dump();
  const RunResult dec = run_cli("decompose --dgp " + replay.string() + " --kind long");
  REQUIRE(dec.exit_code == 0);
  const json report = json::parse(dec.out);
  const auto& dumped = hit.at("omega_dce");
  for (std::size_t i = 0; i < dumped.size(); ++i)
    CHECK(dumped.at(i).get<double>() ==
          report.at("atoms").at(i).at("omega_dce").get<double>());
}

TEST_CASE("simulate writes a deterministic report file") {
  const fs::path out1 = scratch_dir() / "sim1.json";
  const fs::path out2 = scratch_dir() / "sim2.json";
  const std::string base = "simulate --dgp " + kFixtures +
                           "/binomial_long_scalar.json --n 2000 --reps 20 --seed 5 --out ";
  REQUIRE(run_cli(base + out1.string()).exit_code == 0);
  REQUIRE(run_cli(base + out2.string()).exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));
  const json report = json::parse(slurp(out1));
  CHECK(report.at("all_within").get<bool>());
  CHECK(report.at("config").at("n") == 2000);
}

TEST_CASE("assumption override is applied before validation") {
  // strong -> weak requires the full conditional-mean table: exit 2
  const RunResult r = run_cli("decompose --dgp " + kFixtures +
                              "/binomial_reference.json --kind short --assumption weak");
  CHECK(r.exit_code == 2);
}

TEST_CASE("log verbosity is opt-in via the environment") {
  const std::string args = "decompose --dgp " + kFixtures + "/binomial_reference.json --kind short";
  CHECK(run_cli(args).err.empty());
  const RunResult verbose = run_cli(args, "ESTIMAND_LAB_LOG=debug ");
  CHECK(verbose.err.find("[estimand_lab]") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("decompose").exit_code == 2);           // missing --dgp
  CHECK(run_cli("frobnicate --dgp x").exit_code == 2);  // unknown subcommand
}
