#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rnsm/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status;
  std::string out;
};

Run cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + RNSM_CLI_PATH + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("rnsm_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, PresetsListsTheSevenModels) {
  const auto r = cli("presets");
  ASSERT_EQ(r.status, 0) << r.out;
  for (const char* row : {"NSE            1       0       0       B1",
                          "Leray-alpha    1       1       0       B1",
                          "ML-alpha       1       0       1       B1",
                          "SBM            1       1       1       B1",
                          "NSV            0       1       1       B1",
                          "NS-alpha       1       0       1       B2",
                          "NS-alpha-like  1       0       1       B2"})
    EXPECT_NE(r.out.find(row), std::string::npos) << row;
}

TEST(Cli, RegimeReportForLerayAlpha) {
  const auto r = cli("regime --model leray-alpha --n 3");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("uniqueness: β ≥ 0"), std::string::npos) << r.out;
}

TEST(Cli, RegimeForCustomExponents) {
  const auto d = scratch("regime");
  const auto r = cli("regime --model custom --theta 1 --theta1 1 --theta2 0 --form B1 --n 3 --json " +
                     (d / "r.json").string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("uniqueness: β ≥ 0"), std::string::npos) << r.out;
  EXPECT_TRUE(json::parse(slurp(d / "r.json")).is_object());
}

TEST(Cli, SimulateWritesReproducibleFiles) {
  const auto d = scratch("simulate");
  const std::string args = "simulate --model nsv --grid 64 --t-end 1 --dt 1e-3 --out ";
  ASSERT_EQ(cli(args + (d / "a").string()).status, 0);
  ASSERT_EQ(cli(args + (d / "b").string()).status, 0);
  for (const char* f : {"trajectory.csv", "diagnostics.csv", "spectrum.csv", "final.snap", "manifest.json"}) {
    ASSERT_TRUE(fs::exists(d / "a" / f)) << f;
    EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
  }
  const auto diag = slurp(d / "a" / "diagnostics.csv");
  EXPECT_NE(diag.find("blew_up,0"), std::string::npos) << diag;

  const auto s = cli("spectrum --input " + (d / "a" / "final.snap").string() + " --out " + (d / "s").string());
  EXPECT_EQ(s.status, 0) << s.out;
  EXPECT_EQ(slurp(d / "s" / "spectrum.csv"), slurp(d / "a" / "spectrum.csv"));
}

TEST(Cli, FlagsOverrideConfigAndAreEchoed) {
  const auto d = scratch("override");
  std::ofstream(d / "c.json") << R"({"params": {"nu": 0.5, "alpha": 0.3}, "grid": {"resolution": 16},
                                     "dt": 0.01, "t_end": 0.1})";
  const auto r = cli("simulate --config " + (d / "c.json").string() + " --nu 0.1 --out " + (d / "o").string());
  ASSERT_EQ(r.status, 0) << r.out;
  const auto m = json::parse(slurp(d / "o" / "manifest.json"));
  EXPECT_EQ(m["config"]["params"]["nu"].get<double>(), 0.1);
  EXPECT_EQ(m["config"]["params"]["alpha"].get<double>(), 0.3);
  EXPECT_EQ(m["config"]["grid"]["resolution"].get<int>(), 16);
}

TEST(Cli, OutputRootFromEnvironment) {
  const auto d = scratch("env");
  const auto r = cli("simulate --grid 16 --dt 0.01 --t-end 0.1", "RNSM_OUT=" + d.string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(fs::exists(d / "simulate" / "trajectory.csv"));
}

TEST(Cli, SweepRunsAndWritesTheExperimentFiles) {
  const auto d = scratch("sweep");
  const auto r = cli("sweep --kind twin --model leray-alpha --alpha 0.2 --grid 32 --dt 0.01 --t-end 0.5 "
                     "--values 1e-4,5e-5 --jobs 2 --out " + d.string());
  ASSERT_EQ(r.status, 0) << r.out;
  for (const char* f : {"table.csv", "summary.json", "manifest.json"}) EXPECT_TRUE(fs::exists(d / f)) << f;
}

TEST(Cli, DistinctExitCodes) {
  const auto d = scratch("codes");
  EXPECT_EQ(cli("simulate --no-such-flag").status, 2);
  EXPECT_EQ(cli("frobnicate").status, 2);
  EXPECT_EQ(cli("simulate --dt 0.3 --t-end 1 --out " + d.string()).status, 2);
  EXPECT_EQ(cli("sweep --kind inviscid-limit --model NSE --values 0.1,0.05").status, 2);

  std::ofstream(d / "big.json") << R"({"initial": {"amplitude": 1e4}})";
  EXPECT_EQ(cli("simulate --config " + (d / "big.json").string() +
                " --model nse --nu 0 --grid 16 --dt 0.5 --t-end 20 --out " + (d / "b").string())
                .status,
            3);
  // Too short for the synchronization check to pass.
  EXPECT_EQ(cli("determine --model nse --grid 16 --dt 0.02 --t-end 0.2 --nu 1 --forcing-amplitude 0.15 "
                "--values 0,2 --out " + (d / "m").string())
                .status,
            1);
}

TEST(Cli, HelpDocumentsEveryFlag) {
  const std::vector<std::string> run_flags = {"--model", "--theta", "--theta1", "--theta2", "--alpha",
                                              "--nu",    "--eta",   "--form",   "--grid",   "--dims",
                                              "--dt",    "--t-end", "--seed",   "--config", "--out",
                                              "--jobs"};
  for (const char* sub : {"simulate", "sweep", "determine"}) {
    const auto r = cli(std::string(sub) + " --help");
    ASSERT_EQ(r.status, 0) << sub;
    for (const auto& f : run_flags) EXPECT_NE(r.out.find(f + " "), std::string::npos) << sub << " " << f;
  }
  const auto reg = cli("regime --help");
  for (const char* f : {"--model", "--theta", "--theta1", "--theta2", "--form", "--n", "--verbose", "--json"})
    EXPECT_NE(reg.out.find(std::string(f) + " "), std::string::npos) << f;
  EXPECT_NE(cli("spectrum --help").out.find("--input"), std::string::npos);
  EXPECT_NE(cli("presets --help").out.find("--n"), std::string::npos);
  EXPECT_EQ(cli("--help").status, 0);
}
