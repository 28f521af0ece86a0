#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpomdp/cnf.hpp"
#include "qpomdp/encoder.hpp"
#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"
#include "qpomdp/sat/outcome.hpp"

namespace qpomdp {

using MemId = std::int32_t;

// Support-only finite-memory strategy; supports are played uniformly.
// Memory updates read the observation of the state just entered.
struct FiniteMemoryStrategy {
  MemId mu = 1;
  MemId m0 = 0;
  bool deterministic = false;
  std::size_t num_observations = 0;
  std::size_t num_actions = 0;
  std::vector<std::vector<ActionId>> action_support;  // per memory state
  std::vector<std::vector<MemId>> update_support;     // per (m, z, a)

  FiniteMemoryStrategy() = default;
  FiniteMemoryStrategy(MemId mu_, MemId m0_, std::size_t nz, std::size_t na)
      : mu(mu_), m0(m0_), num_observations(nz), num_actions(na),
        action_support(static_cast<std::size_t>(mu_)),
        update_support(static_cast<std::size_t>(mu_) * nz * na) {}

  std::size_t update_index(MemId m, ObsId z, ActionId a) const {
    return (static_cast<std::size_t>(m) * num_observations + z) * num_actions + a;
  }
  std::vector<MemId>& updates(MemId m, ObsId z, ActionId a) {
    return update_support[update_index(m, z, a)];
  }
  const std::vector<MemId>& updates(MemId m, ObsId z, ActionId a) const {
    return update_support[update_index(m, z, a)];
  }

  bool all_singletons() const {
    for (const auto& s : action_support)
      if (s.size() != 1) return false;
    for (const auto& s : update_support)
      if (s.size() != 1) return false;
    return true;
  }

  // Throws ModelError on a dimension mismatch or a malformed support.
  void check_against(const Pomdp& p) const {
    if (mu < 1) throw ModelError("strategy memory size must be at least 1");
    if (m0 < 0 || m0 >= mu) throw ModelError("initial memory state out of range");
    if (num_actions != p.num_actions())
      throw ModelError("strategy has " + std::to_string(num_actions) + " actions, model has " +
                       std::to_string(p.num_actions()));
    if (num_observations != p.num_observations())
      throw ModelError("strategy has " + std::to_string(num_observations) +
                       " observations, model has " + std::to_string(p.num_observations()));
    if (action_support.size() != static_cast<std::size_t>(mu) ||
        update_support.size() != static_cast<std::size_t>(mu) * num_observations * num_actions)
      throw ModelError("strategy tables do not match its memory size");
    for (const auto& s : action_support) {
      if (s.empty()) throw ModelError("empty action support");
      for (ActionId a : s)
        if (a >= num_actions) throw ModelError("action out of range in strategy");
    }
    for (const auto& s : update_support) {
      if (s.empty()) throw ModelError("empty memory-update support");
      for (MemId m : s)
        if (m < 0 || m >= mu) throw ModelError("memory state out of range in strategy");
    }
    if (deterministic && !all_singletons())
      throw ModelError("strategy marked deterministic has a non-singleton support");
  }
};

// A memoryless strategy as a finite-memory one: the memory holds the current
// observation. per_observation[z] is the action support at observation z.
inline FiniteMemoryStrategy memoryless_strategy(
    const Pomdp& p, const std::vector<std::vector<ActionId>>& per_observation) {
  const auto nz = p.num_observations();
  const auto na = p.num_actions();
  if (per_observation.size() != nz) throw ModelError("one action support per observation expected");
  FiniteMemoryStrategy s(static_cast<MemId>(nz), static_cast<MemId>(p.observation(p.initial())),
                         nz, na);
  s.action_support = per_observation;
  for (MemId m = 0; m < s.mu; ++m)
    for (ObsId z = 0; z < nz; ++z)
      for (ActionId a = 0; a < na; ++a) s.updates(m, z, a) = {static_cast<MemId>(z)};
  s.deterministic = s.all_singletons();
  return s;
}

inline FiniteMemoryStrategy extract_strategy(const Pomdp& p, const SatOutcome& out,
                                             const VarMap& vars, const EncodeParams& params) {
  if (!out.sat()) throw SolverError("cannot extract a strategy from a non-SAT outcome");
  const auto na = p.num_actions();
  const auto nz = p.num_observations();
  if (params.strategy_class == StrategyClass::kMemoryless) {
    // Unused observations are never consulted; they get the full action set
    // (or the first action when deterministic).
    std::vector<std::vector<ActionId>> per_obs(nz);
    std::vector<bool> seen(nz, false);
    for (StateId s = 0; s < p.num_states(); ++s) {
      const ObsId z = p.observation(s);
      if (seen[z]) continue;
      seen[z] = true;
      for (ActionId a = 0; a < na; ++a)
        if (out.value(vars.at(VarKey::action_state(static_cast<std::int32_t>(s),
                                                   static_cast<std::int32_t>(a)))))
          per_obs[z].push_back(a);
      if (per_obs[z].empty()) throw SolverError("model leaves an observation without actions");
    }
    for (ObsId z = 0; z < nz; ++z)
      if (!seen[z])
        for (ActionId a = 0; a < (params.deterministic ? 1 : na); ++a) per_obs[z].push_back(a);
    auto s = memoryless_strategy(p, per_obs);
    if (params.deterministic) s.deterministic = true;
    s.check_against(p);
    return s;
  }
  FiniteMemoryStrategy s(params.mu, params.m0, nz, na);
  s.deterministic = params.deterministic;
  for (MemId m = 0; m < params.mu; ++m) {
    for (ActionId a = 0; a < na; ++a)
      if (out.value(vars.at(VarKey::action_mem(m, static_cast<std::int32_t>(a)))))
        s.action_support[m].push_back(a);
    for (ObsId z = 0; z < nz; ++z)
      for (ActionId a = 0; a < na; ++a)
        for (MemId m2 = 0; m2 < params.mu; ++m2)
          if (out.value(vars.at(VarKey::update(m, static_cast<std::int32_t>(z),
                                               static_cast<std::int32_t>(a), m2))))
            s.updates(m, z, a).push_back(m2);
  }
  for (const auto& sup : s.action_support)
    if (sup.empty()) throw SolverError("model leaves a memory state without actions");
  for (const auto& sup : s.update_support)
    if (sup.empty()) throw SolverError("model leaves a memory update undefined");
  s.check_against(p);
  return s;
}

struct ProductEdge {
  std::uint32_t target;
  ActionId action;
};

// Nodes are (state, memory) pairs numbered s * mu + m.
struct ProductGraph {
  MemId mu = 1;
  std::vector<std::vector<ProductEdge>> edges;
  std::vector<bool> reachable;
  std::vector<bool> goal_node;

  std::uint32_t node(StateId s, MemId m) const {
    return static_cast<std::uint32_t>(s * static_cast<std::uint32_t>(mu) + static_cast<std::uint32_t>(m));
  }
  StateId state_of(std::uint32_t n) const { return n / static_cast<std::uint32_t>(mu); }
  MemId memory_of(std::uint32_t n) const { return static_cast<MemId>(n % static_cast<std::uint32_t>(mu)); }
  std::size_t size() const { return edges.size(); }
};

inline ProductGraph build_product_graph(const Pomdp& p, const FiniteMemoryStrategy& sigma) {
  sigma.check_against(p);
  ProductGraph g;
  g.mu = sigma.mu;
  const std::size_t n = p.num_states() * static_cast<std::size_t>(sigma.mu);
  g.edges.resize(n);
  g.reachable.assign(n, false);
  g.goal_node.assign(n, false);
  for (StateId s = 0; s < p.num_states(); ++s)
    for (MemId m = 0; m < sigma.mu; ++m) {
      auto& out = g.edges[g.node(s, m)];
      if (s == p.goal()) g.goal_node[g.node(s, m)] = true;
      for (ActionId a : sigma.action_support[m])
        for (StateId t : p.support(s, a))
          for (MemId m2 : sigma.updates(m, p.observation(t), a)) out.push_back({g.node(t, m2), a});
    }
  std::deque<std::uint32_t> queue{g.node(p.initial(), sigma.m0)};
  g.reachable[queue.front()] = true;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto& e : g.edges[u])
      if (!g.reachable[e.target]) {
        g.reachable[e.target] = true;
        queue.push_back(e.target);
      }
  }
  return g;
}

// Nodes from which some goal node is reachable.
inline std::vector<bool> can_reach_goal(const ProductGraph& g) {
  std::vector<std::vector<std::uint32_t>> pred(g.size());
  for (std::uint32_t u = 0; u < g.size(); ++u)
    for (const auto& e : g.edges[u]) pred[e.target].push_back(u);
  std::vector<bool> ok(g.size(), false);
  std::deque<std::uint32_t> queue;
  for (std::uint32_t u = 0; u < g.size(); ++u)
    if (g.goal_node[u]) {
      ok[u] = true;
      queue.push_back(u);
    }
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (auto u : pred[v])
      if (!ok[u]) {
        ok[u] = true;
        queue.push_back(u);
      }
  }
  return ok;
}

struct ProductNode {
  StateId state;
  MemId memory;
  bool operator==(const ProductNode&) const = default;
};

struct VerifyResult {
  bool winning = false;
  // Smallest failing reachable node, by state name then memory index.
  std::optional<ProductNode> counterexample;
};

inline VerifyResult verify_almost_sure(const Pomdp& p, const FiniteMemoryStrategy& sigma) {
  const auto g = build_product_graph(p, sigma);
  const auto ok = can_reach_goal(g);
  std::optional<ProductNode> worst;
  for (std::uint32_t u = 0; u < g.size(); ++u) {
    if (!g.reachable[u] || ok[u]) continue;
    const ProductNode cand{g.state_of(u), g.memory_of(u)};
    if (!worst) {
      worst = cand;
      continue;
    }
    const auto& a = p.state_name(cand.state);
    const auto& b = p.state_name(worst->state);
    if (a < b || (a == b && cand.memory < worst->memory)) worst = cand;
  }
  return {!worst.has_value(), worst};
}

}  // namespace qpomdp
