#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"

namespace qpomdp {

using Support = std::vector<StateId>;  // sorted, non-empty, one observation

struct BeliefSupportMdp {
  std::vector<Support> nodes;  // node 0 is {I}
  // succ[b][a]: successor node ids of node b under action a, ascending.
  std::vector<std::vector<std::vector<std::uint32_t>>> succ;
  std::vector<bool> target;
  std::size_t num_actions = 0;
};

// Forward construction from {I}. The goal always forms its own node, so a
// node is a target exactly when it is {G}.
inline BeliefSupportMdp build_belief_support(const Pomdp& p, std::size_t node_cap = std::size_t{1} << 22) {
  BeliefSupportMdp m;
  m.num_actions = p.num_actions();
  std::map<Support, std::uint32_t> index;
  auto intern = [&](Support b) {
    auto [it, fresh] = index.emplace(std::move(b), static_cast<std::uint32_t>(m.nodes.size()));
    if (fresh) {
      if (m.nodes.size() >= node_cap)
        throw CapExceeded("belief-support construction exceeded " + std::to_string(node_cap) + " nodes");
      m.nodes.push_back(it->first);
    }
    return it->second;
  };
  intern({p.initial()});

  const auto nz = p.num_observations();
  std::vector<std::vector<StateId>> by_obs(nz);
  std::vector<bool> mark(p.num_states(), false);
  for (std::size_t b = 0; b < m.nodes.size(); ++b) {
    m.succ.emplace_back(p.num_actions());
    for (ActionId a = 0; a < p.num_actions(); ++a) {
      for (auto& v : by_obs) v.clear();
      std::vector<StateId> post;
      for (StateId s : m.nodes[b])
        for (StateId t : p.support(s, a))
          if (!mark[t]) {
            mark[t] = true;
            post.push_back(t);
          }
      std::sort(post.begin(), post.end());
      std::vector<std::uint32_t> out;
      bool has_goal = false;
      for (StateId t : post) {
        mark[t] = false;
        if (t == p.goal())
          has_goal = true;
        else
          by_obs[p.observation(t)].push_back(t);
      }
      // Copy out before interning: intern may grow m.nodes and m.succ.
      std::vector<Support> parts;
      if (has_goal) parts.push_back({p.goal()});
      for (auto& v : by_obs)
        if (!v.empty()) parts.push_back(v);
      for (auto& part : parts) out.push_back(intern(std::move(part)));
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      m.succ[b][a] = std::move(out);
    }
  }
  m.target.resize(m.nodes.size());
  for (std::size_t b = 0; b < m.nodes.size(); ++b)
    m.target[b] = m.nodes[b].size() == 1 && m.nodes[b][0] == p.goal();
  return m;
}

// Almost-sure reachability with actions chosen per belief support. Reaching
// a target node from a support is not enough: every state in the support
// must have a path to the goal, otherwise probability mass can pile up on a
// trapped state while the support itself keeps cycling. So the reachability
// half of the fixpoint runs on (state, support) pairs, the pruning half on
// supports: an action stays allowed only while all its successor supports
// are alive.
inline std::vector<bool> mdp_almost_sure_reach(const Pomdp& p, const BeliefSupportMdp& m) {
  const std::size_t n = m.nodes.size();
  std::vector<std::uint32_t> offset(n + 1, 0);
  for (std::size_t b = 0; b < n; ++b)
    offset[b + 1] = offset[b] + static_cast<std::uint32_t>(m.nodes[b].size());
  const std::uint32_t npairs = offset[n];
  std::vector<std::uint32_t> owner(npairs);
  for (std::uint32_t b = 0; b < n; ++b)
    for (std::uint32_t i = offset[b]; i < offset[b + 1]; ++i) owner[i] = b;
  auto pair_of = [&](std::uint32_t c, StateId t) {
    const auto& v = m.nodes[c];
    const auto it = std::lower_bound(v.begin(), v.end(), t);
    return it != v.end() && *it == t ? offset[c] + static_cast<std::uint32_t>(it - v.begin())
                                     : npairs;
  };

  // Reverse pair edges, labelled by the action of the source support.
  std::vector<std::vector<std::pair<std::uint32_t, ActionId>>> pred(npairs);
  for (std::uint32_t b = 0; b < n; ++b)
    for (std::uint32_t i = offset[b]; i < offset[b + 1]; ++i) {
      const StateId s = m.nodes[b][i - offset[b]];
      for (ActionId a = 0; a < m.num_actions; ++a)
        for (StateId t : p.support(s, a))
          for (auto c : m.succ[b][a]) {
            const auto q = pair_of(c, t);
            if (q != npairs) {
              pred[q].push_back({i, a});
              break;
            }
          }
    }

  std::vector<bool> alive(n, true);
  std::vector<std::vector<bool>> allowed(n, std::vector<bool>(m.num_actions, true));
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<bool> reach(npairs, false);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t q = 0; q < npairs; ++q)
      if (alive[owner[q]] && m.nodes[owner[q]][q - offset[owner[q]]] == p.goal()) {
        reach[q] = true;
        queue.push_back(q);
      }
    while (!queue.empty()) {
      const auto q = queue.front();
      queue.pop_front();
      for (auto [r, a] : pred[q])
        if (!reach[r] && alive[owner[r]] && allowed[owner[r]][a]) {
          reach[r] = true;
          queue.push_back(r);
        }
    }
    for (std::uint32_t b = 0; b < n; ++b) {
      if (!alive[b]) continue;
      for (std::uint32_t i = offset[b]; i < offset[b + 1]; ++i)
        if (!reach[i]) {
          alive[b] = false;
          changed = true;
          break;
        }
    }
    for (std::uint32_t b = 0; b < n; ++b) {
      if (!alive[b]) continue;
      bool any = false;
      for (ActionId a = 0; a < m.num_actions; ++a) {
        if (!allowed[b][a]) continue;
        for (auto c : m.succ[b][a])
          if (!alive[c]) {
            allowed[b][a] = false;
            changed = true;
            break;
          }
        any = any || allowed[b][a];
      }
      if (!any && !m.target[b]) {
        alive[b] = false;
        changed = true;
      }
    }
  }
  return alive;
}

struct BaselineResult {
  bool winning = false;
  std::size_t nodes = 0;
  std::size_t winning_nodes = 0;
};

inline BaselineResult baseline_decide(const Pomdp& p, std::size_t node_cap = std::size_t{1} << 22) {
  const auto m = build_belief_support(p, node_cap);
  const auto win = mdp_almost_sure_reach(p, m);
  return {win[0], m.nodes.size(),
          static_cast<std::size_t>(std::count(win.begin(), win.end(), true))};
}

// Line-oriented dump: node lines list member states, edge lines list
// successor node ids per action.
inline void write_belief_support(std::ostream& os, const Pomdp& p, const BeliefSupportMdp& m) {
  os << "nodes: " << m.nodes.size() << '\n';
  for (std::size_t b = 0; b < m.nodes.size(); ++b) {
    os << "node: " << b;
    for (StateId s : m.nodes[b]) os << ' ' << p.state_name(s);
    if (m.target[b]) os << " target";
    os << '\n';
  }
  for (std::size_t b = 0; b < m.nodes.size(); ++b)
    for (ActionId a = 0; a < m.num_actions; ++a) {
      os << "edge: " << b << ' ' << p.action_name(a);
      for (auto c : m.succ[b][a]) os << ' ' << c;
      os << '\n';
    }
}

}  // namespace qpomdp
