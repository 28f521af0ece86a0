#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"
#include "qpomdp/strategy.hpp"

namespace qpomdp {

struct BruteForceOptions {
  std::uint64_t cap = 10'000'000;  // search nodes visited before giving up
  bool memoryless = false;         // one action support per observation
  bool deterministic = false;      // singleton supports only
};

struct BruteForceResult {
  bool exists = false;
  std::optional<FiniteMemoryStrategy> witness;
  std::uint64_t visited = 0;
};

namespace detail {

// Exhaustive search over uniform-support strategies. Only the supports that
// the current partial strategy can actually reach are branched on; a branch
// dies as soon as some reached node cannot reach the goal even if every
// undecided support allowed everything.
class StrategySearch {
 public:
  StrategySearch(const Pomdp& p, MemId mu, const BruteForceOptions& opt)
      : p_(p), opt_(opt), na_(p.num_actions()), nz_(p.num_observations()) {
    if (p.num_actions() > 16) throw Error("too many actions for exhaustive search");
    if (opt.memoryless) {
      // Memory mirrors the current observation; updates are fixed.
      mu_ = static_cast<MemId>(nz_);
      m0_ = static_cast<MemId>(p.observation(p.initial()));
      update_.assign(static_cast<std::size_t>(mu_) * nz_ * na_, 0);
      for (MemId m = 0; m < mu_; ++m)
        for (ObsId z = 0; z < nz_; ++z)
          for (ActionId a = 0; a < na_; ++a) update_[uidx(m, z, a)] = 1u << z;
    } else {
      if (mu > 16) throw Error("memory size too large for exhaustive search");
      mu_ = mu;
      m0_ = 0;
      update_.assign(static_cast<std::size_t>(mu_) * nz_ * na_, 0);
    }
    action_.assign(static_cast<std::size_t>(mu_), 0);
    nodes_ = p.num_states() * static_cast<std::size_t>(mu_);
  }

  BruteForceResult run() {
    BruteForceResult r;
    r.exists = dfs();
    r.visited = visited_;
    if (r.exists) r.witness = materialize();
    return r;
  }

 private:
  std::size_t uidx(MemId m, ObsId z, ActionId a) const {
    return (static_cast<std::size_t>(m) * nz_ + z) * na_ + a;
  }
  std::uint32_t node(StateId s, MemId m) const {
    return s * static_cast<std::uint32_t>(mu_) + static_cast<std::uint32_t>(m);
  }

  std::uint32_t all_actions() const { return (1u << na_) - 1; }
  std::uint32_t all_memory() const { return (1u << mu_) - 1; }

  template <typename F>
  void successors(std::uint32_t u, bool optimistic, F&& visit) const {
    const StateId s = u / static_cast<std::uint32_t>(mu_);
    const MemId m = static_cast<MemId>(u % static_cast<std::uint32_t>(mu_));
    std::uint32_t acts = action_[m];
    if (acts == 0) {
      if (!optimistic) return;
      acts = all_actions();
    }
    for (ActionId a = 0; a < na_; ++a) {
      if (!(acts >> a & 1u)) continue;
      for (StateId t : p_.support(s, a)) {
        std::uint32_t ms = update_[uidx(m, p_.observation(t), a)];
        if (ms == 0) {
          if (!optimistic) continue;
          ms = all_memory();
        }
        for (MemId m2 = 0; m2 < mu_; ++m2)
          if (ms >> m2 & 1u) visit(node(t, m2));
      }
    }
  }

  std::vector<bool> goal_reachers(bool optimistic) const {
    std::vector<std::vector<std::uint32_t>> pred(nodes_);
    for (std::uint32_t u = 0; u < nodes_; ++u)
      successors(u, optimistic, [&](std::uint32_t v) { pred[v].push_back(u); });
    std::vector<bool> ok(nodes_, false);
    std::deque<std::uint32_t> queue;
    for (MemId m = 0; m < mu_; ++m) {
      ok[node(p_.goal(), m)] = true;
      queue.push_back(node(p_.goal(), m));
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

  // An undecided support: either an action support (update index unused) or
  // a memory-update support.
  struct Item {
    bool is_action;
    std::size_t index;
  };

  // Forward closure under decided supports. Returns the first undecided
  // support met, in breadth-first order.
  std::optional<Item> closure(std::vector<bool>& reached) const {
    reached.assign(nodes_, false);
    std::optional<Item> pending;
    std::deque<std::uint32_t> queue{node(p_.initial(), m0_)};
    reached[queue.front()] = true;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      const StateId s = u / static_cast<std::uint32_t>(mu_);
      if (s == p_.goal()) continue;
      const MemId m = static_cast<MemId>(u % static_cast<std::uint32_t>(mu_));
      if (action_[m] == 0) {
        if (!pending) pending = Item{true, static_cast<std::size_t>(m)};
        continue;
      }
      for (ActionId a = 0; a < na_; ++a) {
        if (!(action_[m] >> a & 1u)) continue;
        for (StateId t : p_.support(s, a)) {
          const auto ui = uidx(m, p_.observation(t), a);
          if (update_[ui] == 0) {
            if (!pending) pending = Item{false, ui};
            continue;
          }
          for (MemId m2 = 0; m2 < mu_; ++m2)
            if ((update_[ui] >> m2 & 1u) && !reached[node(t, m2)]) {
              reached[node(t, m2)] = true;
              queue.push_back(node(t, m2));
            }
        }
      }
    }
    return pending;
  }

  bool dfs() {
    if (++visited_ > opt_.cap)
      throw CapExceeded("exhaustive strategy search exceeded " + std::to_string(opt_.cap) +
                        " search nodes");
    std::vector<bool> reached;
    const auto pending = closure(reached);
    const auto ok = goal_reachers(pending.has_value());
    for (std::uint32_t u = 0; u < nodes_; ++u)
      if (reached[u] && !ok[u]) return false;
    if (!pending) return true;

    std::uint32_t& slot = pending->is_action ? action_[pending->index] : update_[pending->index];
    const std::uint32_t full = pending->is_action ? all_actions() : all_memory();
    for (std::uint32_t mask = full; mask > 0; --mask) {
      if (opt_.deterministic && (mask & (mask - 1)) != 0) continue;
      slot = mask;
      if (dfs()) return true;
    }
    slot = 0;
    return false;
  }

  FiniteMemoryStrategy materialize() const {
    FiniteMemoryStrategy s(mu_, m0_, nz_, na_);
    for (MemId m = 0; m < mu_; ++m) {
      const std::uint32_t acts = action_[m] ? action_[m] : (opt_.deterministic ? 1u : all_actions());
      for (ActionId a = 0; a < na_; ++a)
        if (acts >> a & 1u) s.action_support[m].push_back(a);
      for (ObsId z = 0; z < nz_; ++z)
        for (ActionId a = 0; a < na_; ++a) {
          std::uint32_t ms = update_[uidx(m, z, a)];
          if (ms == 0) ms = opt_.deterministic ? 1u : all_memory();
          for (MemId m2 = 0; m2 < mu_; ++m2)
            if (ms >> m2 & 1u) s.updates(m, z, a).push_back(m2);
        }
    }
    s.deterministic = s.all_singletons();
    return s;
  }

  const Pomdp& p_;
  BruteForceOptions opt_;
  std::size_t na_, nz_;
  MemId mu_ = 1, m0_ = 0;
  std::size_t nodes_ = 0;
  std::vector<std::uint32_t> action_;  // bitmask per memory state, 0 = undecided
  std::vector<std::uint32_t> update_;  // bitmask per (m, z, a), 0 = undecided
  std::uint64_t visited_ = 0;
};

}  // namespace detail

// Decides whether a winning uniform-support strategy of memory size mu exists
// (ignored in memoryless mode). The witness is checked by the verifier.
inline BruteForceResult brute_force_exists(const Pomdp& p, MemId mu,
                                           const BruteForceOptions& opt = {}) {
  if (mu < 1) throw Error("mu must be at least 1");
  auto r = detail::StrategySearch(p, mu, opt).run();
  if (r.exists && !verify_almost_sure(p, *r.witness).winning)
    throw Error("exhaustive search produced a witness the verifier rejects");
  return r;
}

}  // namespace qpomdp
