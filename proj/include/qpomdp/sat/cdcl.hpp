#pragma once

// Conflict-driven clause learning solver in the MiniSat lineage: two watched
// literals (binary clauses watched inline), first-UIP learning with recursive
// minimization, VSIDS with phase saving, Luby restarts, and LBD-guided
// learnt clause reduction.

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "qpomdp/cnf.hpp"
#include "qpomdp/error.hpp"
#include "qpomdp/sat/outcome.hpp"

namespace qpomdp::sat {

struct Options {
  std::uint64_t seed = 0;
  // Zero means unlimited.
  std::uint64_t conflict_budget = 0;
  double var_decay = 0.95;
  double clause_decay = 0.999;
  double random_var_freq = 0.005;
  std::uint32_t restart_unit = 100;
  std::uint32_t reduce_base = 2000;
  std::uint32_t reduce_step = 300;
};

class CdclSolver {
 public:
  explicit CdclSolver(const CnfFormula& f, Options opts = {})
      : opts_(opts), rng_(opts.seed) {
    num_vars_ = static_cast<std::uint32_t>(f.num_vars());
    const std::size_t nl = 2 * static_cast<std::size_t>(num_vars_);
    value_.assign(num_vars_, 0);
    level_.assign(num_vars_, 0);
    reason_.assign(num_vars_, kNoRef);
    activity_.assign(num_vars_, 0.0);
    phase_.assign(num_vars_, 0);
    seen_.assign(num_vars_, 0);
    watches_.assign(nl, {});
    bin_watches_.assign(nl, {});
    heap_index_.assign(num_vars_, -1);
    for (std::uint32_t v = 0; v < num_vars_; ++v) heap_insert(v);

    std::vector<std::uint32_t> lits;
    for (std::size_t i = 0; i < f.num_clauses() && ok_; ++i) {
      lits.clear();
      for (Literal l : f.clause(i)) lits.push_back(to_lit(l));
      add_input_clause(lits);
    }
  }

  SatOutcome solve() {
    const auto t0 = std::chrono::steady_clock::now();
    SatOutcome out;
    SatStatus st = ok_ ? search_loop() : SatStatus::kUnsat;
    out.status = st;
    if (st == SatStatus::kSat) {
      out.model.assign(num_vars_ + 1, false);
      for (std::uint32_t v = 0; v < num_vars_; ++v) out.model[v + 1] = value_[v] > 0;
    }
    stats_.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.stats = stats_;
    return out;
  }

 private:
  static constexpr std::uint32_t kNoRef = std::numeric_limits<std::uint32_t>::max();
  static constexpr std::uint32_t kHeader = 3;  // size, flags|lbd, activity

  struct Watcher {
    std::uint32_t cref;
    std::uint32_t blocker;
  };
  struct BinWatcher {
    std::uint32_t other;
    std::uint32_t cref;
  };

  // Literal encoding: 2*var + negated.
  static std::uint32_t to_lit(Literal l) {
    const auto v = static_cast<std::uint32_t>((l > 0 ? l : -l) - 1);
    return 2 * v + (l < 0 ? 1u : 0u);
  }
  static std::uint32_t var(std::uint32_t lit) { return lit >> 1; }
  static std::uint32_t neg(std::uint32_t lit) { return lit ^ 1u; }

  // 1 true, -1 false, 0 undefined.
  int lit_value(std::uint32_t lit) const {
    const int v = value_[var(lit)];
    return (lit & 1u) ? -v : v;
  }

  // ----- clause arena
  std::uint32_t& c_size(std::uint32_t cr) { return arena_[cr]; }
  std::uint32_t c_size(std::uint32_t cr) const { return arena_[cr]; }
  bool c_learnt(std::uint32_t cr) const { return arena_[cr + 1] & 1u; }
  bool c_deleted(std::uint32_t cr) const { return arena_[cr + 1] & 2u; }
  void c_mark_deleted(std::uint32_t cr) { arena_[cr + 1] |= 2u; }
  std::uint32_t c_lbd(std::uint32_t cr) const { return arena_[cr + 1] >> 2; }
  void c_set_lbd(std::uint32_t cr, std::uint32_t lbd) {
    arena_[cr + 1] = (arena_[cr + 1] & 3u) | (lbd << 2);
  }
  float c_activity(std::uint32_t cr) const {
    float f;
    std::memcpy(&f, &arena_[cr + 2], sizeof f);
    return f;
  }
  void c_set_activity(std::uint32_t cr, float f) { std::memcpy(&arena_[cr + 2], &f, sizeof f); }
  std::uint32_t* c_lits(std::uint32_t cr) { return &arena_[cr + kHeader]; }
  const std::uint32_t* c_lits(std::uint32_t cr) const { return &arena_[cr + kHeader]; }

  std::uint32_t alloc_clause(const std::vector<std::uint32_t>& lits, bool learnt) {
    const auto cr = static_cast<std::uint32_t>(arena_.size());
    arena_.push_back(static_cast<std::uint32_t>(lits.size()));
    arena_.push_back(learnt ? 1u : 0u);
    arena_.push_back(0);
    arena_.insert(arena_.end(), lits.begin(), lits.end());
    return cr;
  }

  void attach(std::uint32_t cr) {
    const std::uint32_t* c = c_lits(cr);
    if (c_size(cr) == 2) {
      bin_watches_[c[0]].push_back({c[1], cr});
      bin_watches_[c[1]].push_back({c[0], cr});
    } else {
      watches_[c[0]].push_back({cr, c[1]});
      watches_[c[1]].push_back({cr, c[0]});
    }
  }

  void add_input_clause(std::vector<std::uint32_t>& lits) {
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i)
      if (lits[i] == neg(lits[i - 1])) return;  // tautology
    // Drop literals already false at level 0; skip satisfied clauses.
    std::size_t j = 0;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      const int v = lit_value(lits[i]);
      if (v > 0) return;
      if (v == 0) lits[j++] = lits[i];
    }
    lits.resize(j);
    if (lits.empty()) {
      ok_ = false;
      return;
    }
    if (lits.size() == 1) {
      enqueue(lits[0], kNoRef);
      if (propagate() != kNoRef) ok_ = false;
      return;
    }
    const std::uint32_t cr = alloc_clause(lits, false);
    attach(cr);
  }

  // ----- assignment
  std::uint32_t decision_level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }

  void enqueue(std::uint32_t lit, std::uint32_t reason) {
    const std::uint32_t v = var(lit);
    value_[v] = (lit & 1u) ? -1 : 1;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(lit);
  }

  // Returns the conflicting clause or kNoRef.
  std::uint32_t propagate() {
    std::uint32_t confl = kNoRef;
    while (qhead_ < trail_.size()) {
      const std::uint32_t p = trail_[qhead_++];
      const std::uint32_t false_lit = neg(p);
      ++stats_.propagations;

      for (const BinWatcher& bw : bin_watches_[false_lit]) {
        const int ov = lit_value(bw.other);
        if (ov > 0) continue;
        if (ov < 0) {
          qhead_ = trail_.size();
          return bw.cref;
        }
        enqueue(bw.other, bw.cref);
      }

      auto& ws = watches_[false_lit];
      std::size_t i = 0, j = 0;
      const std::size_t n = ws.size();
      while (i < n) {
        const Watcher w = ws[i];
        if (lit_value(w.blocker) > 0) {
          ws[j++] = ws[i++];
          continue;
        }
        std::uint32_t* c = c_lits(w.cref);
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        ++i;
        const std::uint32_t first = c[0];
        if (first != w.blocker && lit_value(first) > 0) {
          ws[j++] = {w.cref, first};
          continue;
        }
        const std::uint32_t sz = c_size(w.cref);
        bool found = false;
        for (std::uint32_t k = 2; k < sz; ++k) {
          if (lit_value(c[k]) >= 0) {
            std::swap(c[1], c[k]);
            watches_[c[1]].push_back({w.cref, first});
            found = true;
            break;
          }
        }
        if (found) continue;
        ws[j++] = {w.cref, first};
        if (lit_value(first) < 0) {
          confl = w.cref;
          qhead_ = trail_.size();
          while (i < n) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNoRef) return confl;
    }
    return confl;
  }

  void cancel_until(std::uint32_t lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t c = trail_.size(); c-- > trail_lim_[lvl];) {
      const std::uint32_t v = var(trail_[c]);
      value_[v] = 0;
      reason_[v] = kNoRef;
      phase_[v] = (trail_[c] & 1u) ? 0 : 1;
      if (heap_index_[v] < 0) heap_insert(v);
    }
    qhead_ = trail_lim_[lvl];
    trail_.resize(trail_lim_[lvl]);
    trail_lim_.resize(lvl);
  }

  // ----- VSIDS heap (max-heap on activity)
  bool heap_less(std::uint32_t a, std::uint32_t b) const { return activity_[a] > activity_[b]; }

  void heap_up(std::size_t i) {
    const std::uint32_t v = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!heap_less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      heap_index_[heap_[i]] = static_cast<std::int32_t>(i);
      i = parent;
    }
    heap_[i] = v;
    heap_index_[v] = static_cast<std::int32_t>(i);
  }

  void heap_down(std::size_t i) {
    const std::uint32_t v = heap_[i];
    const std::size_t n = heap_.size();
    while (2 * i + 1 < n) {
      std::size_t child = 2 * i + 1;
      if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
      if (!heap_less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      heap_index_[heap_[i]] = static_cast<std::int32_t>(i);
      i = child;
    }
    heap_[i] = v;
    heap_index_[v] = static_cast<std::int32_t>(i);
  }

  void heap_insert(std::uint32_t v) {
    heap_index_[v] = static_cast<std::int32_t>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
  }

  std::uint32_t heap_pop() {
    const std::uint32_t top = heap_.front();
    heap_index_[top] = -1;
    const std::uint32_t last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_index_[last] = 0;
      heap_down(0);
    }
    return top;
  }

  void bump_var(std::uint32_t v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_index_[v] >= 0) heap_up(static_cast<std::size_t>(heap_index_[v]));
  }

  void bump_clause(std::uint32_t cr) {
    float a = c_activity(cr) + static_cast<float>(cla_inc_);
    c_set_activity(cr, a);
    if (a > 1e20f) {
      for (std::uint32_t l : learnts_) c_set_activity(l, c_activity(l) * 1e-20f);
      cla_inc_ *= 1e-20;
    }
  }

  std::uint32_t pick_branch() {
    std::uint32_t next = kNoRef;
    if (opts_.random_var_freq > 0 && !heap_.empty()) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(rng_) < opts_.random_var_freq) {
        std::uniform_int_distribution<std::size_t> pick(0, heap_.size() - 1);
        const std::uint32_t v = heap_[pick(rng_)];
        if (value_[v] == 0) next = v;
      }
    }
    while (next == kNoRef || value_[next] != 0) {
      if (heap_.empty()) return kNoRef;
      next = heap_pop();
    }
    return 2 * next + (phase_[next] ? 0u : 1u);
  }

  // ----- conflict analysis
  std::uint32_t abstract_level(std::uint32_t v) const { return 1u << (level_[v] & 31u); }

  bool lit_redundant(std::uint32_t p, std::uint32_t abstract_levels) {
    analyze_stack_.clear();
    analyze_stack_.push_back(p);
    const std::size_t top = analyze_toclear_.size();
    while (!analyze_stack_.empty()) {
      const std::uint32_t q = analyze_stack_.back();
      analyze_stack_.pop_back();
      const std::uint32_t cr = reason_[var(q)];
      const std::uint32_t* c = c_lits(cr);
      const std::uint32_t sz = c_size(cr);
      for (std::uint32_t i = 0; i < sz; ++i) {
        const std::uint32_t l = c[i];
        const std::uint32_t v = var(l);
        if (v == var(q) || seen_[v] || level_[v] == 0) continue;
        if (reason_[v] != kNoRef && (abstract_level(v) & abstract_levels) != 0) {
          seen_[v] = 1;
          analyze_stack_.push_back(l);
          analyze_toclear_.push_back(l);
        } else {
          for (std::size_t j = top; j < analyze_toclear_.size(); ++j)
            seen_[var(analyze_toclear_[j])] = 0;
          analyze_toclear_.resize(top);
          return false;
        }
      }
    }
    return true;
  }

  void analyze(std::uint32_t confl, std::vector<std::uint32_t>& learnt, std::uint32_t& bt_level) {
    learnt.clear();
    learnt.push_back(0);
    int path_count = 0;
    std::uint32_t p = kNoRef;
    std::size_t index = trail_.size();
    do {
      if (c_learnt(confl)) bump_clause(confl);
      const std::uint32_t* c = c_lits(confl);
      const std::uint32_t sz = c_size(confl);
      for (std::uint32_t i = 0; i < sz; ++i) {
        const std::uint32_t q = c[i];
        if (q == p) continue;
        const std::uint32_t v = var(q);
        if (!seen_[v] && level_[v] > 0) {
          bump_var(v);
          seen_[v] = 1;
          if (level_[v] >= decision_level())
            ++path_count;
          else
            learnt.push_back(q);
        }
      }
      while (!seen_[var(trail_[--index])]) {
      }
      p = trail_[index];
      confl = reason_[var(p)];
      seen_[var(p)] = 0;
      --path_count;
    } while (path_count > 0);
    learnt[0] = neg(p);

    analyze_toclear_.assign(learnt.begin(), learnt.end());
    std::uint32_t abstract_levels = 0;
    for (std::size_t i = 1; i < learnt.size(); ++i) abstract_levels |= abstract_level(var(learnt[i]));
    std::size_t j = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      const std::uint32_t v = var(learnt[i]);
      if (reason_[v] == kNoRef || !lit_redundant(learnt[i], abstract_levels)) learnt[j++] = learnt[i];
    }
    learnt.resize(j);

    bt_level = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i)
        if (level_[var(learnt[i])] > level_[var(learnt[max_i])]) max_i = i;
      std::swap(learnt[1], learnt[max_i]);
      bt_level = level_[var(learnt[1])];
    }
    for (std::uint32_t l : analyze_toclear_) seen_[var(l)] = 0;
  }

  std::uint32_t compute_lbd(const std::vector<std::uint32_t>& lits) {
    ++lbd_stamp_;
    if (lbd_seen_.size() < decision_level() + 1) lbd_seen_.resize(decision_level() + 1, 0);
    std::uint32_t n = 0;
    for (std::uint32_t l : lits) {
      const std::uint32_t lv = level_[var(l)];
      if (lbd_seen_[lv] != lbd_stamp_) {
        lbd_seen_[lv] = lbd_stamp_;
        ++n;
      }
    }
    return n;
  }

  // ----- learnt clause database
  bool locked(std::uint32_t cr) const {
    const std::uint32_t* c = c_lits(cr);
    for (int k = 0; k < 2; ++k) {
      const std::uint32_t v = var(c[k]);
      if (reason_[v] == cr && lit_value(c[k]) > 0) return true;
    }
    return false;
  }

  void reduce_db() {
    std::vector<std::uint32_t> candidates;
    std::vector<std::uint32_t> keep;
    for (std::uint32_t cr : learnts_) {
      if (c_lbd(cr) <= 2 || c_size(cr) == 2 || locked(cr))
        keep.push_back(cr);
      else
        candidates.push_back(cr);
    }
    std::sort(candidates.begin(), candidates.end(), [this](std::uint32_t a, std::uint32_t b) {
      if (c_lbd(a) != c_lbd(b)) return c_lbd(a) > c_lbd(b);
      if (c_activity(a) != c_activity(b)) return c_activity(a) < c_activity(b);
      return a < b;
    });
    const std::size_t drop = candidates.size() / 2;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (i < drop) {
        c_mark_deleted(candidates[i]);
        wasted_ += kHeader + c_size(candidates[i]);
      } else {
        keep.push_back(candidates[i]);
      }
    }
    std::sort(keep.begin(), keep.end());
    learnts_ = std::move(keep);
    purge_watches();
    if (wasted_ * 5 > arena_.size()) collect_garbage();
  }

  void purge_watches() {
    for (auto& ws : watches_)
      ws.erase(std::remove_if(ws.begin(), ws.end(),
                              [this](const Watcher& w) { return c_deleted(w.cref); }),
               ws.end());
  }

  void collect_garbage() {
    std::vector<std::uint32_t> fresh;
    fresh.reserve(arena_.size() - wasted_);
    std::vector<std::uint32_t> relocated;  // old cref -> new, only for live clauses
    auto move_clause = [&](std::uint32_t cr) {
      const auto nc = static_cast<std::uint32_t>(fresh.size());
      fresh.insert(fresh.end(), arena_.begin() + cr, arena_.begin() + cr + kHeader + c_size(cr));
      return nc;
    };
    std::vector<std::pair<std::uint32_t, std::uint32_t>> map;
    std::uint32_t cr = 0;
    while (cr < arena_.size()) {
      const std::uint32_t next = cr + kHeader + c_size(cr);
      if (!c_deleted(cr)) map.emplace_back(cr, move_clause(cr));
      cr = next;
    }
    auto lookup = [&](std::uint32_t old) {
      auto it = std::lower_bound(map.begin(), map.end(), std::make_pair(old, 0u));
      return it->second;
    };
    for (std::uint32_t v = 0; v < num_vars_; ++v)
      if (reason_[v] != kNoRef) reason_[v] = lookup(reason_[v]);
    for (auto& l : learnts_) l = lookup(l);
    arena_ = std::move(fresh);
    wasted_ = 0;
    for (auto& ws : watches_) ws.clear();
    for (auto& ws : bin_watches_) ws.clear();
    cr = 0;
    while (cr < arena_.size()) {
      attach(cr);
      cr += kHeader + c_size(cr);
    }
  }

  static double luby(double y, std::uint64_t x) {
    std::uint64_t size = 1;
    int seq = 0;
    while (size < x + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != x) {
      size = (size - 1) >> 1;
      --seq;
      x = x % size;
    }
    double r = 1;
    for (int i = 0; i < seq; ++i) r *= y;
    return r;
  }

  SatStatus search_loop() {
    std::uint64_t next_reduce = opts_.reduce_base;
    std::uint64_t reductions = 0;
    std::vector<std::uint32_t> learnt;
    for (std::uint64_t restart = 0;; ++restart) {
      const auto limit =
          static_cast<std::uint64_t>(luby(2.0, restart) * opts_.restart_unit);
      std::uint64_t conflicts_here = 0;
      for (;;) {
        const std::uint32_t confl = propagate();
        if (confl != kNoRef) {
          ++stats_.conflicts;
          ++conflicts_here;
          if (decision_level() == 0) return SatStatus::kUnsat;
          std::uint32_t bt = 0;
          analyze(confl, learnt, bt);
          const std::uint32_t lbd = compute_lbd(learnt);
          cancel_until(bt);
          if (learnt.size() == 1) {
            enqueue(learnt[0], kNoRef);
          } else {
            const std::uint32_t cr = alloc_clause(learnt, true);
            c_set_lbd(cr, lbd);
            learnts_.push_back(cr);
            attach(cr);
            bump_clause(cr);
            enqueue(learnt[0], cr);
          }
          var_inc_ /= opts_.var_decay;
          cla_inc_ /= opts_.clause_decay;
          if (opts_.conflict_budget && stats_.conflicts >= opts_.conflict_budget) {
            cancel_until(0);
            return SatStatus::kUnknown;
          }
          if (stats_.conflicts >= next_reduce) {
            ++reductions;
            next_reduce = stats_.conflicts + opts_.reduce_base + opts_.reduce_step * reductions;
            reduce_db();
          }
        } else {
          if (conflicts_here >= limit) {
            ++stats_.restarts;
            cancel_until(0);
            break;
          }
          const std::uint32_t next = pick_branch();
          if (next == kNoRef) return SatStatus::kSat;
          ++stats_.decisions;
          trail_lim_.push_back(static_cast<std::uint32_t>(trail_.size()));
          enqueue(next, kNoRef);
        }
      }
    }
  }

  Options opts_;
  std::mt19937_64 rng_;
  std::uint32_t num_vars_ = 0;
  bool ok_ = true;

  std::vector<std::uint32_t> arena_;
  std::size_t wasted_ = 0;
  std::vector<std::uint32_t> learnts_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::vector<BinWatcher>> bin_watches_;

  std::vector<std::int8_t> value_;
  std::vector<std::uint32_t> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<double> activity_;
  std::vector<std::uint8_t> phase_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::uint32_t> trail_;
  std::vector<std::uint32_t> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<std::uint32_t> heap_;
  std::vector<std::int32_t> heap_index_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;

  std::vector<std::uint32_t> analyze_stack_;
  std::vector<std::uint32_t> analyze_toclear_;
  std::vector<std::uint32_t> lbd_seen_;
  std::uint32_t lbd_stamp_ = 0;

  SolverStats stats_;
};

}  // namespace qpomdp::sat

namespace qpomdp {

// Solves with the embedded CDCL engine. A SAT answer is checked against the
// input before it is returned.
inline SatOutcome solve_embedded(const CnfFormula& f, const sat::Options& opts = {}) {
  SatOutcome out = sat::CdclSolver(f, opts).solve();
  if (out.sat() && !satisfies(f, out.model))
    throw SolverError("embedded solver produced a model that falsifies the formula");
  return out;
}

}  // namespace qpomdp
