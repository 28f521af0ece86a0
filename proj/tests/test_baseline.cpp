#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace qpomdp;
using namespace testing_support;

namespace {

std::vector<std::string> names(const Pomdp& p, const Support& b) {
  std::vector<std::string> out;
  for (StateId s : b) out.push_back(p.state_name(s));
  return out;
}

// A winning belief-support MDP yields a finite-memory strategy: memory is the
// belief node, actions are the ones that stay inside the winning set, and the
// update tracks post(B, a) restricted to the observation just seen.
FiniteMemoryStrategy belief_strategy(const Pomdp& p, const BeliefSupportMdp& m, const std::vector<bool>& win) {
  const auto n = static_cast<MemId>(m.nodes.size());
  FiniteMemoryStrategy s(n, 0, p.num_observations(), p.num_actions());
  std::map<Support, MemId> index;
  for (MemId b = 0; b < n; ++b) index[m.nodes[b]] = b;
  for (MemId b = 0; b < n; ++b) {
    for (ActionId a = 0; a < p.num_actions(); ++a) {
      bool stays = true;
      for (auto c : m.succ[b][a]) stays = stays && win[c];
      if (stays) s.action_support[b].push_back(a);
    }
    if (!win[b] || s.action_support[b].empty()) {
      s.action_support[b].clear();
      for (ActionId a = 0; a < p.num_actions(); ++a) s.action_support[b].push_back(a);
    }
    for (ObsId z = 0; z < p.num_observations(); ++z)
      for (ActionId a = 0; a < p.num_actions(); ++a) {
        Support next;
        for (StateId x : m.nodes[b])
          for (StateId t : p.support(x, a))
            if (t != p.goal() && p.observation(t) == z) next.push_back(t);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        auto it = index.find(next);
        s.updates(b, z, a) = {it == index.end() ? 0 : it->second};
      }
  }
  return s;
}

}  // namespace

TEST(BeliefSupport, SmallExamples) {
  const auto m1 = load_fixture("m1.pomdp");
  const auto b1 = build_belief_support(m1);
  ASSERT_EQ(b1.nodes.size(), 2u);
  EXPECT_EQ(names(m1, b1.nodes[0]), (std::vector<std::string>{"s0"}));
  EXPECT_EQ(names(m1, b1.nodes[1]), (std::vector<std::string>{"G"}));
  EXPECT_TRUE(mdp_almost_sure_reach(m1, b1)[0]);

  const auto m2 = load_fixture("m2.pomdp");
  EXPECT_FALSE(baseline_decide(m2).winning);

  const auto m3 = load_fixture("m3.pomdp");
  const auto b3 = build_belief_support(m3);
  EXPECT_LE(b3.nodes.size(), 4u);
  for (const auto& n : b3.nodes) EXPECT_EQ(n.size(), 1u);
  EXPECT_TRUE(baseline_decide(m3).winning);
}

TEST(BeliefSupport, SharedObservationMergesStates) {
  const auto p = parse_pomdp(R"(states: s0 s1 s2 G
actions: a
observations: start twin goal
init: s0
goal: G
obs: s0 start
obs: s1 twin
obs: s2 twin
obs: G goal
trans: s0 a s1 0.5
trans: s0 a s2 0.5
trans: s1 a G 1
trans: s2 a s2 1
trans: G a G 1
)");
  const auto m = build_belief_support(p);
  bool merged = false;
  for (const auto& n : m.nodes) merged = merged || names(p, n) == std::vector<std::string>{"s1", "s2"};
  EXPECT_TRUE(merged);
  // {s1,s2} under a splits into {G} and {s2}.
  EXPECT_FALSE(mdp_almost_sure_reach(p, m)[0]);
}

TEST(BeliefSupport, NodesAreObservationConsistentAndPostsPartitioned) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto p = random_pomdp(seed);
    const auto m = build_belief_support(p);
    EXPECT_LE(m.nodes.size(), std::size_t{1} << p.num_states());
    for (std::size_t b = 0; b < m.nodes.size(); ++b) {
      ASSERT_FALSE(m.nodes[b].empty());
      for (StateId s : m.nodes[b]) EXPECT_EQ(p.observation(s), p.observation(m.nodes[b][0]));
      for (ActionId a = 0; a < p.num_actions(); ++a) {
        std::set<StateId> post, covered;
        for (StateId s : m.nodes[b])
          for (StateId t : p.support(s, a)) post.insert(t);
        std::size_t total = 0;
        for (auto c : m.succ[b][a]) {
          for (StateId t : m.nodes[c]) covered.insert(t);
          total += m.nodes[c].size();
        }
        EXPECT_EQ(post, covered);
        EXPECT_EQ(total, covered.size());  // disjoint
      }
    }
  }
}

TEST(Baseline, CyclingSupportWithTrappedStateLoses) {
  // One action, one shared observation: the support {s0,s1,s2,s3} keeps
  // returning to itself while s2 is a sink, so the goal is not reached
  // almost surely even though {G} is reachable from every support.
  const auto p = parse_pomdp(R"(states: s0 s1 s2 s3 G
actions: a
observations: z goal
init: s1
goal: G
obs: s0 z
obs: s1 z
obs: s2 z
obs: s3 z
obs: G goal
trans: s0 a s0 0.3
trans: s0 a s3 0.7
trans: s1 a s0 0.3
trans: s1 a s2 0.3
trans: s1 a G 0.4
trans: s2 a s2 1
trans: s3 a G 0.1
trans: s3 a s2 0.4
trans: s3 a s1 0.5
trans: G a G 1
)");
  EXPECT_FALSE(baseline_decide(p).winning);
  FiniteMemoryStrategy s(1, 0, p.num_observations(), p.num_actions());
  s.action_support[0] = {0};
  for (auto& u : s.update_support) u = {0};
  EXPECT_FALSE(verify_almost_sure(p, s).winning);
}

TEST(BeliefSupport, NodeCap) {
  const auto p = load_fixture("hallway3.pomdp");
  EXPECT_THROW(build_belief_support(p, 3), CapExceeded);
}

TEST(Baseline, WinningRegionYieldsVerifiedStrategy) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = random_pomdp(seed);
    const auto m = build_belief_support(p);
    const auto win = mdp_almost_sure_reach(p, m);
    if (!win[0]) continue;
    ++wins;
    EXPECT_TRUE(verify_almost_sure(p, belief_strategy(p, m, win)).winning) << seed;
  }
  EXPECT_GT(wins, 20);
}

TEST(Baseline, ImpliedBySmallMemoryStrategies) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = random_pomdp(seed);
    const bool base = baseline_decide(p).winning;
    for (int mu : {1, 2}) {
      const bool sat = decide(p, small_memory(static_cast<int>(p.num_states()) * mu, mu)).sat;
      if (sat) { EXPECT_TRUE(base) << seed; }
      if (!base) { EXPECT_FALSE(sat) << seed; }
    }
  }
}

// Belief-support strategies live in the small-memory class with one memory
// state per node, so the two must agree exactly there.
TEST(Baseline, MatchesSolverWithOneMemoryStatePerSupport) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto p = random_pomdp(seed);
    const auto m = build_belief_support(p);
    const int mu = static_cast<int>(m.nodes.size());
    const auto d = decide(p, small_memory(static_cast<int>(p.num_states()) * mu, mu));
    EXPECT_EQ(mdp_almost_sure_reach(p, m)[0], d.sat) << seed;
    EXPECT_TRUE(d.extraction_ok);
  }
}

TEST(Baseline, FixturesAgreeWithSolver) {
  EXPECT_TRUE(baseline_decide(load_fixture("hallway3.pomdp")).winning);
  EXPECT_TRUE(baseline_decide(load_fixture("rocksample2.pomdp")).winning);
  EXPECT_TRUE(baseline_decide(load_fixture("escape3.pomdp")).winning);
}

TEST(Baseline, DumpFormat) {
  const auto p = load_fixture("m1.pomdp");
  std::ostringstream os;
  write_belief_support(os, p, build_belief_support(p));
  EXPECT_EQ(os.str(), "nodes: 2\nnode: 0 s0\nnode: 1 G target\nedge: 0 a 0 1\nedge: 1 a 1\n");
}
