#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stableid/cli.hpp"
#include "stableid/io.hpp"
#include "stableid/matrix.hpp"
#include "stableid/sysid.hpp"
#include "test_support.hpp"

using namespace stableid;
using namespace test_support;
using nlohmann::json;

namespace {

struct CliOutcome {
  int code = 0;
  std::string out;
  std::string err;
};

CliOutcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliOutcome result;
  result.code = cli_run(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("stableid_test_" + name);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("project the all-ones matrix") {
  const auto path = temp_file("ones2x2.txt");
  write_matrix_file(path.string(), Matrix::constant(2, 2, 1.0));
  const CliOutcome res = run_cli({"project", path.string()});
  REQUIRE(res.code == 0);
  const json j = json::parse(res.out);
  CHECK_FALSE(j["was_already_stable"].get<bool>());
  for (const auto& row : j["theta_star"]) {
    for (const auto& v : row) {
      CHECK(std::fabs(v.get<double>() - 0.25) < 1e-4);
    }
  }
  CHECK(j["rho"].get<double>() < 1.0);
  std::filesystem::remove(path);
}

TEST_CASE("project a stable matrix is the identity") {
  const auto path = temp_file("stable.txt");
  write_matrix_file(path.string(), Matrix{{0.25, 0.1}, {0.0, 0.5}});
  const CliOutcome res = run_cli({"project", path.string()});
  REQUIRE(res.code == 0);
  const json j = json::parse(res.out);
  CHECK(j["was_already_stable"].get<bool>());
  CHECK(j["theta_star"][0][0].get<double>() == 0.25);
  CHECK(j["rate"].get<double>() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("simulate then estimate round trips through files") {
  const auto theta_path = temp_file("theta.txt");
  const auto traj_path = temp_file("traj.txt");
  write_matrix_file(theta_path.string(), Matrix{{0.8, 0.1}, {0.0, 0.7}});
  const CliOutcome sim = run_cli({"simulate", "--theta", theta_path.string(),
                                  "--T", "300", "--seed", "11", "--out",
                                  traj_path.string()});
  REQUIRE(sim.code == 0);
  const Trajectory traj = read_trajectory_file(traj_path.string());
  CHECK(traj.horizon() == 300);
  CHECK(traj.seed == 11);

  const CliOutcome est = run_cli({"estimate", traj_path.string()});
  REQUIRE(est.code == 0);
  const json j = json::parse(est.out);
  CHECK(j["T"].get<long>() == 300);
  CHECK(j["projection"]["rho"].get<double>() < 1.0);
  // a healthy sample from a stable system estimates stably
  CHECK(std::fabs(j["theta_hat"][0][0].get<double>() - 0.8) < 0.3);
  std::filesystem::remove(theta_path);
  std::filesystem::remove(traj_path);
}

TEST_CASE("simulate twice with one seed writes identical files") {
  const auto theta_path = temp_file("theta_det.txt");
  write_matrix_file(theta_path.string(), Matrix{{0.5}});
  const auto p1 = temp_file("traj_det1.txt");
  const auto p2 = temp_file("traj_det2.txt");
  REQUIRE(run_cli({"simulate", "--theta", theta_path.string(), "--T", "50",
                   "--seed", "3", "--out", p1.string()}).code == 0);
  REQUIRE(run_cli({"simulate", "--theta", theta_path.string(), "--T", "50",
                   "--seed", "3", "--out", p2.string()}).code == 0);
  CHECK(slurp(p1) == slurp(p2));
  std::filesystem::remove(theta_path);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("bench rates twice with one seed is byte identical") {
  const auto p1 = temp_file("rates1.csv");
  const auto p2 = temp_file("rates2.csv");
  const std::vector<std::string> base{"bench", "rates", "--n", "1",
                                      "--seed", "7", "--trials", "3",
                                      "--systems", "3", "--t-max", "64"};
  auto with_out = [&](const std::filesystem::path& p) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(p.string());
    return args;
  };
  REQUIRE(run_cli(with_out(p1)).code == 0);
  REQUIRE(run_cli(with_out(p2)).code == 0);
  const std::string text = slurp(p1);
  CHECK(text == slurp(p2));
  CHECK(text.rfind("trial_id,", 0) == 0);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("bench coverage emits a summary on stderr") {
  const CliOutcome res = run_cli({"bench", "coverage", "--trials", "25", "--T",
                                  "200", "--seed", "2"});
  REQUIRE(res.code == 0);
  const json summary = json::parse(res.err);
  CHECK(summary["experiment"] == "coverage");
  CHECK(summary["trials"].get<long>() == 25);
  CHECK(summary["frequency"].get<double>() >= 0.0);
  // records went to stdout in csv form
  CHECK(res.out.rfind("trial_id,", 0) == 0);
}

TEST_CASE("bench spectral json format") {
  const CliOutcome res = run_cli({"bench", "spectral", "--trials", "4", "--seed",
                                  "5", "--format", "json"});
  REQUIRE(res.code == 0);
  const json records = json::parse(res.out);
  REQUIRE(records.is_array());
  CHECK(records.size() == 4);
  CHECK(records[0].contains("rho_proj"));
}

TEST_CASE("config file feeds bench flags") {
  const auto cfg_path = temp_file("bench.cfg");
  {
    std::ofstream cfg(cfg_path);
    cfg << "trials = 2\nsystems = 2\nt-max = 32\nseed = 9\n";
  }
  const CliOutcome res =
      run_cli({"bench", "rates", "--n", "1", "--config", cfg_path.string()});
  REQUIRE(res.code == 0);
  const json summary = json::parse(res.err);
  CHECK(summary["records"].get<long>() > 0);
  std::filesystem::remove(cfg_path);
}

TEST_CASE("usage errors exit with code 1 and a json message") {
  const CliOutcome unknown = run_cli({"frobnicate"});
  CHECK(unknown.code == 1);
  const json j = json::parse(unknown.err);
  CHECK(j["code"].get<int>() == 1);
  CHECK(j.contains("message"));

  const CliOutcome missing = run_cli({"project", "/nonexistent/matrix.txt"});
  CHECK(missing.code == 1);
  CHECK(json::parse(missing.err)["code"].get<int>() == 1);

  const CliOutcome no_args = run_cli({});
  CHECK(no_args.code == 1);
}

TEST_CASE("numerical failures exit with code 2") {
  // a two-step scalar trajectory cannot support a 2-dimensional estimate
  const auto traj_path = temp_file("short.txt");
  {
    std::ofstream out(traj_path);
    out << "2 2 0\n1 0\n0.5 0\n0.25 0\n";  // rank-deficient regressors
  }
  const CliOutcome res = run_cli({"estimate", traj_path.string()});
  CHECK(res.code == 2);
  const json j = json::parse(res.err);
  CHECK(j["code"].get<int>() == 2);
  std::filesystem::remove(traj_path);
}

TEST_CASE("help exits zero") {
  const CliOutcome res = run_cli({"--help"});
  CHECK(res.code == 0);
  CHECK(res.out.find("project") != std::string::npos);
}

}  // TEST_SUITE
