#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "support.hpp"

using namespace testing_support;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(QPOMDP_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int st = pclose(pipe);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string tmp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qpomdp-cli-test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string fx(const std::string& name) { return fixture(name); }

}  // namespace

TEST(Cli, SolveSmallExamples) {
  auto r = cli("solve --pomdp " + fx("m1.pomdp") + " --mu 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "WINNING(1, 2)\n");

  r = cli("solve --pomdp " + fx("m2.pomdp") + " --mu-max 2");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "NO-STRATEGY(1)\nNO-STRATEGY(2)\n");

  r = cli("solve --pomdp " + fx("m3.pomdp") + " --memoryless");
  EXPECT_EQ(r.code, 0);
}

TEST(Cli, InconclusiveScheduleIsUnknown) {
  const auto r = cli("solve --pomdp " + fx("m2.pomdp") + " --mu 1 --k 1");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.out, "UNKNOWN(1)\n");
}

TEST(Cli, ConflictBudgetIsUnknown) {
  const auto r = cli("solve --pomdp " + fx("escape3.pomdp") + " --mu 3 --k 2 --conflict-budget 1");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("solve --pomdp " + fx("m1.pomdp") + " --k 0").code, 3);
  EXPECT_EQ(cli("solve --pomdp " + fx("m1.pomdp") + " --mu 0").code, 3);
  EXPECT_EQ(cli("solve --pomdp /nonexistent.pomdp").code, 3);
  EXPECT_EQ(cli("solve --pomdp " + fx("m1.pomdp") + " --backend bogus").code, 3);
  EXPECT_EQ(cli("encode --pomdp " + fx("m1.pomdp") + " --k 0").code, 3);
  EXPECT_NE(cli("solve").code, 0);
}

TEST(Cli, StrategyOutputVerifies) {
  const auto path = tmp("hallway.strategy");
  auto r = cli("solve --pomdp " + fx("hallway3.pomdp") + " --mu 2 --out " + path);
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("WINNING(2, ", 0), 0u) << r.out;
  r = cli("verify --pomdp " + fx("hallway3.pomdp") + " --strategy " + path);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "WINNING\n");
}

TEST(Cli, VerifyExampleStrategies) {
  auto r = cli("verify --pomdp " + fx("m3.pomdp") + " --strategy " + fx("m3_always_a.strategy"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "WINNING\n");
  r = cli("verify --pomdp " + fx("m3.pomdp") + " --strategy " + fx("m3_always_b.strategy"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "NOT-WINNING counterexample (U, m0)\n");
  EXPECT_EQ(cli("verify --pomdp " + fx("m3.pomdp") + " --strategy " + fx("m3_mu2_header.strategy")).code, 3);
}

TEST(Cli, JsonReport) {
  const auto path = tmp("report.json");
  ASSERT_EQ(cli("solve --pomdp " + fx("m3.pomdp") + " --mu 1 --json-report " + path).code, 0);
  const auto j = nlohmann::json::parse(slurp(path));
  for (const char* key : {"verdict", "mu", "k", "vars", "clauses", "solver_stats", "time_ms"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["verdict"], "WINNING");
  EXPECT_EQ(j["mu"], 1);
  EXPECT_GT(j["clauses"].get<int>(), 0);
}

TEST(Cli, EncodeIsByteIdentical) {
  const auto a = tmp("a.cnf"), b = tmp("b.cnf");
  ASSERT_EQ(cli("encode --pomdp " + fx("hallway3.pomdp") + " --k 4 --mu 2 --dimacs-out " + a).code, 0);
  ASSERT_EQ(cli("encode --pomdp " + fx("hallway3.pomdp") + " --k 4 --mu 2 --dimacs-out " + b).code, 0);
  const auto ta = slurp(a);
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(b));
  const auto stdout_run = cli("encode --pomdp " + fx("hallway3.pomdp") + " --k 4 --mu 2");
  EXPECT_EQ(stdout_run.out, ta);
  // The formula matches the library encoding.
  const auto p = load_fixture("hallway3.pomdp");
  const auto e = encode(p, small_memory(4, 2));
  EXPECT_EQ(ta, to_dimacs(e.cnf, &e.vars));
}

TEST(Cli, ExternalBackendAgrees) {
  auto r = cli("solve --pomdp " + fx("hallway3.pomdp") + " --mu-max 2 --backend external:" + QPOMDP_SAT_BIN);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("NO-STRATEGY(1)\nWINNING(2, ", 0), 0u) << r.out;
}

TEST(Cli, BaselineVerdicts) {
  auto r = cli("baseline --pomdp " + fx("m2.pomdp"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out.rfind("NOT-WINNING", 0), 0u);
  r = cli("baseline --pomdp " + fx("m3.pomdp") + " --dump " + tmp("m3.belief"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("WINNING", 0), 0u);
  EXPECT_EQ(slurp(tmp("m3.belief")).rfind("nodes: ", 0), 0u);
  EXPECT_EQ(cli("baseline --pomdp " + fx("hallway3.pomdp") + " --node-cap 2").code, 3);
}

TEST(Cli, GenMatchesFixtures) {
  auto r = cli("gen hallway --width 3 --height 3 --goal 1,2 --init '0,0;1,0' --traps 2,0 --fail 0.1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(fx("hallway3.pomdp")));
  const auto path = tmp("rs.pomdp");
  ASSERT_EQ(cli("gen --out " + path + " rocksample --n 2").code, 0);
  EXPECT_EQ(slurp(path), slurp(fx("rocksample2.pomdp")));
  r = cli("gen escape --n 3 --robot 0,0 --agent 2,2");
  EXPECT_EQ(r.out, slurp(fx("escape3.pomdp")));
  EXPECT_EQ(cli("gen rocksample --types x").code, 3);
  EXPECT_EQ(cli("gen escape --robot 1,1 --agent 1,1").code, 3);
}

TEST(Cli, StrictRejectsNonAbsorbingGoal) {
  const auto path = tmp("leaky.pomdp");
  std::ofstream(path) << "states: s0 G\nactions: a\nobservations: o g\ninit: s0\ngoal: G\nobs: s0 o\nobs: G g\n"
                         "trans: s0 a G 1\ntrans: G a s0 1\n";
  EXPECT_EQ(cli("solve --strict --pomdp " + path).code, 3);
  EXPECT_EQ(cli("solve --pomdp " + path).code, 0);
}

TEST(Cli, ParseErrorsNameThePosition) {
  const auto path = tmp("broken.pomdp");
  std::ofstream(path) << "states: s0 G\nactions: a\nobservations: o\ninit: s0\ngoal: G\nobs: s0 o\nobs: G o\n"
                         "trans: s0 a X 1\n";
  const std::string cmd = std::string(QPOMDP_BIN) + " solve --pomdp " + path + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[512];
  std::string out;
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  pclose(pipe);
  EXPECT_NE(out.find("line 8, column 13"), std::string::npos) << out;
}
