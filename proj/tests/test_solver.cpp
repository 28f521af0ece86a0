#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace qpomdp;
using namespace testing_support;

namespace {

// Pigeonhole: n+1 pigeons, n holes. Always UNSAT, needs real search.
CnfFormula pigeonhole(int n) {
  CnfFormula f;
  auto x = [n](int p, int h) { return p * n + h + 1; };
  f.ensure_vars((n + 1) * n);
  for (int p = 0; p <= n; ++p) {
    std::vector<Literal> c;
    for (int h = 0; h < n; ++h) c.push_back(x(p, h));
    f.add_clause(c);
  }
  for (int h = 0; h < n; ++h)
    for (int p = 0; p <= n; ++p)
      for (int q = p + 1; q <= n; ++q) f.add_clause({-x(p, h), -x(q, h)});
  return f;
}

std::string fake_solver(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "qpomdp-fake-solvers";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << "#!/bin/sh\n" << body;
  return "sh " + path.string();
}

}  // namespace

TEST(Embedded, TrivialFormulas) {
  CnfFormula empty;
  EXPECT_TRUE(solve_embedded(empty).sat());

  CnfFormula unit;
  unit.ensure_vars(1);
  unit.add_clause({1});
  auto out = solve_embedded(unit);
  ASSERT_TRUE(out.sat());
  EXPECT_TRUE(out.value(1));

  CnfFormula contra;
  contra.ensure_vars(1);
  contra.add_clause({1});
  contra.add_clause({-1});
  EXPECT_EQ(solve_embedded(contra).status, SatStatus::kUnsat);

  // Variables never mentioned still get a value.
  CnfFormula loose;
  loose.ensure_vars(5);
  loose.add_clause({-2});
  out = solve_embedded(loose);
  ASSERT_TRUE(out.sat());
  EXPECT_EQ(out.model.size(), 6u);
  EXPECT_FALSE(out.value(2));
}

TEST(Embedded, AgreesWithEnumerationOnRandom3Cnf) {
  // Around the phase transition (ratio ~4.26) both answers are common.
  int sat = 0, unsat = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const int vars = 8 + static_cast<int>(seed % 13);  // 8..20
    const auto f = random_cnf(seed, vars, static_cast<int>(vars * 4.26));
    const auto out = solve_embedded(f, {seed});
    const bool expected = brute_force_sat(f);
    ASSERT_EQ(out.sat(), expected) << "seed " << seed;
    if (out.sat()) {
      ++sat;
      EXPECT_TRUE(satisfies(f, out.model));
    } else {
      ++unsat;
    }
  }
  EXPECT_GT(sat, 30);
  EXPECT_GT(unsat, 30);
}

TEST(Embedded, PigeonholeIsUnsat) {
  for (int n = 2; n <= 7; ++n) EXPECT_EQ(solve_embedded(pigeonhole(n)).status, SatStatus::kUnsat) << n;
}

TEST(Embedded, LargerRandomSatisfiableInstances) {
  // Planted solution keeps these satisfiable.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const int n = 300;
    std::vector<bool> plant(n + 1);
    for (int v = 1; v <= n; ++v) plant[v] = rng() & 1;
    CnfFormula f;
    f.ensure_vars(n);
    while (f.num_clauses() < 1200) {
      std::vector<Literal> c;
      bool ok = false;
      while (c.size() < 3) {
        const int v = 1 + static_cast<int>(rng() % n);
        bool dup = false;
        for (auto l : c) dup = dup || std::abs(l) == v;
        if (dup) continue;
        const Literal l = rng() & 1 ? v : -v;
        ok = ok || plant[v] == (l > 0);
        c.push_back(l);
      }
      if (ok) f.add_clause(c);
    }
    const auto out = solve_embedded(f, {seed});
    ASSERT_TRUE(out.sat());
    EXPECT_TRUE(satisfies(f, out.model));
  }
}

TEST(Embedded, ConflictBudgetGivesUnknown) {
  sat::Options o;
  o.conflict_budget = 10;
  const auto out = solve_embedded(pigeonhole(8), o);
  EXPECT_EQ(out.status, SatStatus::kUnknown);
  EXPECT_TRUE(out.model.empty());
  EXPECT_LE(out.stats.conflicts, 11u);
}

TEST(Embedded, FixedSeedReproducible) {
  const auto p = load_fixture("hallway3.pomdp");
  const auto e = encode(p, small_memory(8, 2));
  sat::Options o;
  o.seed = 42;
  const auto a = solve_embedded(e.cnf, o);
  const auto b = solve_embedded(e.cnf, o);
  ASSERT_TRUE(a.sat());
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.stats.conflicts, b.stats.conflicts);
  EXPECT_EQ(a.stats.decisions, b.stats.decisions);
  EXPECT_EQ(a.stats.propagations, b.stats.propagations);
}

TEST(Embedded, StatsArePopulated) {
  const auto out = solve_embedded(pigeonhole(5));
  EXPECT_GT(out.stats.conflicts, 0u);
  EXPECT_GT(out.stats.decisions, 0u);
  EXPECT_GT(out.stats.propagations, 0u);
}

TEST(CompetitionOutput, Parsing) {
  auto out = parse_competition_output("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 3);
  ASSERT_TRUE(out.sat());
  EXPECT_EQ(out.model, (std::vector<bool>{false, true, false, true}));
  EXPECT_EQ(parse_competition_output("s UNSATISFIABLE\n", 3).status, SatStatus::kUnsat);
  EXPECT_EQ(parse_competition_output("s UNKNOWN\n", 3).status, SatStatus::kUnknown);
  EXPECT_THROW(parse_competition_output("s SATISFIABLE\nv 1 -2 0\n", 3), SolverError);
  EXPECT_THROW(parse_competition_output("s SATISFIABLE\nv 1 -2 3\n", 3), SolverError);
  EXPECT_THROW(parse_competition_output("v 1 0\n", 1), SolverError);
  EXPECT_THROW(parse_competition_output("s SATISFIABLE\nv 1 4 0\n", 3), SolverError);
  EXPECT_THROW(parse_competition_output("s MAYBE\n", 3), SolverError);
}

TEST(External, BundledSolverMatchesEmbedded) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_cnf(seed, 15, 64);
    const auto ext = solve_external(f, QPOMDP_SAT_BIN);
    EXPECT_EQ(ext.sat(), solve_embedded(f).sat()) << seed;
    if (ext.sat()) { EXPECT_TRUE(satisfies(f, ext.model)); }
  }
  const auto p = load_fixture("m3.pomdp");
  const auto e = encode(p, small_memory(4, 1));
  const auto out = solve_external(e.cnf, std::string(QPOMDP_SAT_BIN) + " {}");
  ASSERT_TRUE(out.sat());
  EXPECT_TRUE(verify_almost_sure(p, extract_strategy(p, out, e.vars, small_memory(4, 1))).winning);
}

TEST(External, MisbehavingSolversAreErrors) {
  CnfFormula f;
  f.ensure_vars(2);
  f.add_clause({1, 2});
  f.add_clause({-1});
  EXPECT_THROW(solve_external(f, fake_solver("truncated.sh", "echo 's SATISFIABLE'\necho 'v -1'\nexit 10\n")),
               SolverError);
  EXPECT_THROW(solve_external(f, fake_solver("crash.sh", "exit 3\n")), SolverError);
  EXPECT_THROW(solve_external(f, fake_solver("silent.sh", "exit 0\n")), SolverError);
  // Claims a model that falsifies clause {1, 2}.
  EXPECT_THROW(solve_external(f, fake_solver("liar.sh", "echo 's SATISFIABLE'\necho 'v -1 -2 0'\nexit 10\n")),
               SolverError);
  const auto ok = solve_external(f, fake_solver("honest.sh", "echo 's SATISFIABLE'\necho 'v -1 2 0'\nexit 10\n"));
  EXPECT_TRUE(ok.sat());
  EXPECT_THROW(solve_external(f, "/nonexistent/solver-binary"), SolverError);
}
