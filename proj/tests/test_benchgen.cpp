#include <gtest/gtest.h>

#include "support.hpp"

using namespace qpomdp;
using namespace testing_support;

namespace {

SolveReport run(const Pomdp& p, MemId mu) {
  SolveConfig c;
  c.mu = mu;
  return solve(p, c);
}

std::size_t reachable_count(const Pomdp& p) {
  std::vector<bool> seen(p.num_states(), false);
  std::vector<StateId> stack{p.initial()};
  seen[p.initial()] = true;
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    for (ActionId a = 0; a < p.num_actions(); ++a)
      for (StateId t : p.support(s, a))
        if (!seen[t]) {
          seen[t] = true;
          stack.push_back(t);
        }
  }
  return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
}

}  // namespace

TEST(Hallway, StateCountByConstruction) {
  HallwayParams hp;
  hp.width = 3;
  hp.height = 2;
  hp.goal = {2, 1};
  hp.initial = {{0, 0}};
  const auto p = gen_hallway(hp);
  EXPECT_EQ(p.num_states(), 3u * 2u * 4u + 3u);
  EXPECT_EQ(p.num_actions(), 3u);
  // barriers and traps remove four poses each
  hp.barriers = {{1, 0}};
  hp.traps = {{1, 1}};
  EXPECT_EQ(gen_hallway(hp).num_states(), 4u * 4u + 3u);
}

TEST(Hallway, ObservationIsRelativeWallPattern) {
  HallwayParams hp;
  hp.width = 3;
  hp.height = 2;
  hp.goal = {2, 1};
  hp.initial = {{0, 0}};
  const auto p = gen_hallway(hp);
  // Corner (0,0) facing south: front open, right (west) wall, back (north)
  // wall, left (east) open.
  const auto s = *p.find_state("c0_0_S");
  EXPECT_EQ(p.observation_name(p.observation(s)), "w0110");
  const auto n = *p.find_state("c0_0_N");
  EXPECT_EQ(p.observation_name(p.observation(n)), "w1001");
}

TEST(Hallway, StartAtGoalIsImmediate) {
  HallwayParams hp;
  hp.goal = {1, 1};
  hp.initial = {{1, 1}};
  const auto p = gen_hallway(hp);
  EXPECT_TRUE(decide(p, small_memory(1, 1)).sat);
}

TEST(Hallway, WalledOffGoalLoses) {
  HallwayParams hp;
  hp.width = 3;
  hp.height = 3;
  hp.goal = {2, 2};
  hp.barriers = {{1, 2}, {2, 1}};
  hp.initial = {{0, 0}};
  const auto p = gen_hallway(hp);
  EXPECT_FALSE(baseline_decide(p).winning);
  for (MemId mu : {1, 2}) EXPECT_EQ(run(p, mu).verdict, Verdict::kNoStrategy);
}

TEST(Hallway, OpenCorridorNeedsNoMemory) {
  HallwayParams hp;
  hp.width = 1;
  hp.height = 4;
  hp.goal = {0, 3};
  hp.initial = {{0, 0}};
  const auto p = gen_hallway(hp);
  const auto r = run(p, 1);
  EXPECT_EQ(r.verdict, Verdict::kWinning);
}

TEST(Hallway, ShippedFixtureNeedsTwoMemoryStates) {
  const auto p = load_fixture("hallway3.pomdp");
  EXPECT_EQ(run(p, 1).verdict, Verdict::kNoStrategy);
  const auto r = run(p, 2);
  EXPECT_EQ(r.verdict, Verdict::kWinning);
  EXPECT_TRUE(baseline_decide(p).winning);
}

TEST(Hallway, RejectsBadGeometry) {
  HallwayParams hp;
  hp.goal = {5, 5};
  EXPECT_THROW(gen_hallway(hp), ModelError);
  hp = {};
  hp.traps = {hp.goal};
  EXPECT_THROW(gen_hallway(hp), ModelError);
  hp = {};
  hp.initial.clear();
  EXPECT_THROW(gen_hallway(hp), ModelError);
  hp = {};
  hp.fail = 1.0;
  EXPECT_THROW(gen_hallway(hp), ModelError);
}

TEST(RockSample, TwoGoodRocksSolvableWithTwoMemoryStates) {
  const auto p = load_fixture("rocksample2.pomdp");
  const auto d = decide(p, small_memory(8, 2));
  EXPECT_TRUE(d.sat);
  EXPECT_TRUE(d.extraction_ok);
}

TEST(RockSample, BothBadIsHopeless) {
  RockSampleParams rp;
  rp.types = {RockType::kBad, RockType::kBad};
  rp.min_good = 0;
  const auto p = gen_rocksample(rp);
  EXPECT_FALSE(baseline_decide(p).winning);
  for (MemId mu : {1, 2}) EXPECT_EQ(run(p, mu).verdict, Verdict::kNoStrategy);
}

TEST(RockSample, StateCountsNearPublishedOrder) {
  // 3 bookkeeping states plus 9 cells x (typings, held sample) pairs.
  const std::vector<std::size_t> published{0, 0, 0, 0, 351, 909, 2187};
  for (int n = 2; n <= 6; ++n) {
    RockSampleParams rp;
    rp.n = n;
    const auto p = gen_rocksample(rp);
    std::size_t pairs = 0;
    for (std::uint32_t t = 0; t < (1u << n); ++t)
      if (std::popcount(t) >= 2) pairs += 1 + static_cast<std::size_t>(std::popcount(t));
    EXPECT_EQ(p.num_states(), 3 + 9 * pairs) << n;
    if (published[n]) {
      EXPECT_LE(p.num_states(), 2 * published[n]);
      EXPECT_GE(2 * p.num_states(), published[n]);
    }
  }
}

TEST(RockSample, ResampleCanDestroySample) {
  const auto p = load_fixture("rocksample2.pomdp");
  const auto s = *p.find_state("r1_1_tgg_s0");
  const auto sample = *p.find_action("sample");
  const auto row = p.transitions(s, sample);
  ASSERT_EQ(row.size(), 2u);
  EXPECT_DOUBLE_EQ(row[0].probability, 0.5);
}

TEST(RockSample, RejectsBadParameters) {
  RockSampleParams rp;
  rp.n = 1;
  EXPECT_THROW(gen_rocksample(rp), ModelError);
  rp = {};
  rp.rocks = {{1, 1}, {1, 1}};
  EXPECT_THROW(gen_rocksample(rp), ModelError);
  rp = {};
  rp.types = {RockType::kBad, RockType::kBad};
  EXPECT_THROW(gen_rocksample(rp), ModelError);  // no typing has two good rocks
}

TEST(Escape, ThreeByThreeShape) {
  const auto p = load_fixture("escape3.pomdp");
  EXPECT_EQ(p.num_actions(), 4u);
  EXPECT_GE(p.num_states(), 84u / 2);
  EXPECT_LE(p.num_states(), 84u * 2);
  EXPECT_EQ(to_text(gen_escape({})), to_text(p));
  EXPECT_EQ(reachable_count(p), p.num_states());
}

TEST(Escape, OppositeCornersOnLargerGridSolveQuickly) {
  EscapeParams ep;
  ep.n = 4;
  ep.robot = {0, 0};
  ep.agent = {3, 3};
  const auto p = gen_escape(ep);
  SolveConfig c;
  c.mu = 5;
  c.k_schedule = {2};
  EXPECT_EQ(solve(p, c).verdict, Verdict::kWinning);
}

TEST(Escape, RejectsBadParameters) {
  EscapeParams ep;
  ep.n = 2;
  EXPECT_THROW(gen_escape(ep), ModelError);
  ep = {};
  ep.agent = ep.robot;
  EXPECT_THROW(gen_escape(ep), ModelError);
}

TEST(Generators, ValidDeterministicAndSupportOnly) {
  std::vector<Pomdp> models;
  for (int w = 1; w <= 4; ++w) {
    HallwayParams hp;
    hp.width = w;
    hp.height = 3;
    hp.goal = {w - 1, 2};
    hp.initial = {{0, 0}};
    models.push_back(gen_hallway(hp));
  }
  for (int n = 2; n <= 4; ++n) {
    RockSampleParams rp;
    rp.n = n;
    models.push_back(gen_rocksample(rp));
  }
  models.push_back(gen_escape({}));
  for (const auto& p : models) {
    // Re-parsing validates rows and absorbing goal; goal observation is its own.
    const auto q = parse_pomdp(to_text(p), {true});
    EXPECT_EQ(to_text(q), to_text(p));
    EXPECT_TRUE(p.goal_observation_dedicated());
  }
  HallwayParams hp;
  EXPECT_EQ(to_text(gen_hallway(hp)), to_text(gen_hallway(hp)));
}
