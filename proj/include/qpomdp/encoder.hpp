#pragma once

#include <cstdint>
#include <vector>

#include "qpomdp/cnf.hpp"
#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"

namespace qpomdp {

enum class StrategyClass {
  kMemoryless,   // observation-stationary: one action support per observation
  kSmallMemory,  // mu memory states; actions depend on memory only
};

struct EncodeParams {
  StrategyClass strategy_class = StrategyClass::kSmallMemory;
  std::int32_t k = 1;    // path-length bound, in steps
  std::int32_t mu = 1;   // memory size (small-memory only)
  std::int32_t m0 = 0;   // initial memory state
  bool deterministic = false;
  // Emit both directions of the path-variable definitions. Dropping the
  // reverse direction keeps the formula equisatisfiable.
  bool reverse_implications = true;
};

inline void check_params(const EncodeParams& p) {
  if (p.k < 1) throw Error("k must be at least 1");
  if (p.mu < 1) throw Error("mu must be at least 1");
  if (p.m0 < 0 || p.m0 >= p.mu) throw Error("initial memory state out of range");
}

// Observation-stationary encoding over A(s,a), C(s), P(s,j).
inline Encoding encode_memoryless(const Pomdp& p, std::int32_t k, bool reverse = true) {
  check_params({StrategyClass::kMemoryless, k, 1, 0, false, reverse});
  const auto ns = static_cast<std::int32_t>(p.num_states());
  const auto na = static_cast<std::int32_t>(p.num_actions());
  const auto g = static_cast<std::int32_t>(p.goal());
  Encoding e;

  std::vector<Var> A(static_cast<std::size_t>(ns * na)), C(ns);
  std::vector<Var> P(static_cast<std::size_t>(ns) * (k + 1));
  auto a_var = [&](std::int32_t s, std::int32_t a) { return A[s * na + a]; };
  auto p_var = [&](std::int32_t s, std::int32_t j) { return P[static_cast<std::size_t>(s) * (k + 1) + j]; };

  for (std::int32_t s = 0; s < ns; ++s)
    for (std::int32_t a = 0; a < na; ++a) A[s * na + a] = e.fresh(VarKey::action_state(s, a));
  for (std::int32_t s = 0; s < ns; ++s) C[s] = e.fresh(VarKey::reach(s));
  for (std::int32_t s = 0; s < ns; ++s)
    for (std::int32_t j = 0; j <= k; ++j)
      P[static_cast<std::size_t>(s) * (k + 1) + j] = e.fresh(VarKey::path(s, j));

  std::vector<Literal> clause;
  // At least one action per state.
  for (std::int32_t s = 0; s < ns; ++s) {
    clause.clear();
    for (std::int32_t a = 0; a < na; ++a) clause.push_back(a_var(s, a));
    e.add(clause);
  }
  // Same observation, same action support.
  for (std::int32_t i = 0; i < ns; ++i)
    for (std::int32_t j = i + 1; j < ns; ++j) {
      if (p.observation(i) != p.observation(j)) continue;
      for (std::int32_t r = 0; r < na; ++r) {
        e.add({-a_var(i, r), a_var(j, r)});
        e.add({a_var(i, r), -a_var(j, r)});
      }
    }
  // Reachability closure (self-loop instances are tautologies and omitted).
  for (std::int32_t s = 0; s < ns; ++s)
    for (std::int32_t a = 0; a < na; ++a)
      for (StateId t : p.support(s, a))
        if (static_cast<std::int32_t>(t) != s) e.add({-C[s], -a_var(s, a), C[t]});
  e.add({C[p.initial()]});
  for (std::int32_t j = 0; j <= k; ++j) e.add({p_var(g, j)});
  for (std::int32_t s = 0; s < ns; ++s) e.add({-C[s], p_var(s, k)});
  for (std::int32_t s = 0; s < ns; ++s)
    if (s != g) e.add({-p_var(s, 0)});

  for (std::int32_t s = 0; s < ns; ++s) {
    if (s == g) continue;
    for (std::int32_t j = 1; j <= k; ++j) {
      std::vector<BoolExpr> options;
      options.reserve(na);
      for (std::int32_t a = 0; a < na; ++a) {
        std::vector<BoolExpr> succ;
        for (StateId t : p.support(s, a)) succ.push_back(BoolExpr::leaf(p_var(t, j - 1)));
        options.push_back(BoolExpr::all(
            {BoolExpr::leaf(a_var(s, a)), BoolExpr::any(std::move(succ))}));
      }
      tseitin_iff(e, p_var(s, j), BoolExpr::any(std::move(options)), reverse);
    }
  }
  return e;
}

// Small-memory encoding over A(m,a), C(s,m), P(s,m,j), M(m,z,a,m'). Memory
// updates read the observation of the successor state.
inline Encoding encode_small_memory(const Pomdp& p, std::int32_t k, std::int32_t mu,
                                    std::int32_t m0, bool reverse = true) {
  check_params({StrategyClass::kSmallMemory, k, mu, m0, false, reverse});
  const auto ns = static_cast<std::int32_t>(p.num_states());
  const auto na = static_cast<std::int32_t>(p.num_actions());
  const auto nz = static_cast<std::int32_t>(p.num_observations());
  const auto g = static_cast<std::int32_t>(p.goal());
  const std::size_t kk = static_cast<std::size_t>(k) + 1;
  Encoding e;

  std::vector<Var> A(static_cast<std::size_t>(mu * na));
  std::vector<Var> C(static_cast<std::size_t>(ns * mu));
  std::vector<Var> P(static_cast<std::size_t>(ns) * mu * kk);
  std::vector<Var> M(static_cast<std::size_t>(mu) * nz * na * mu);
  auto a_var = [&](std::int32_t m, std::int32_t a) { return A[m * na + a]; };
  auto c_var = [&](std::int32_t s, std::int32_t m) { return C[s * mu + m]; };
  auto p_var = [&](std::int32_t s, std::int32_t m, std::int32_t j) {
    return P[(static_cast<std::size_t>(s) * mu + m) * kk + j];
  };
  auto m_var = [&](std::int32_t m, std::int32_t z, std::int32_t a, std::int32_t m2) {
    return M[((static_cast<std::size_t>(m) * nz + z) * na + a) * mu + m2];
  };

  for (std::int32_t m = 0; m < mu; ++m)
    for (std::int32_t a = 0; a < na; ++a) A[m * na + a] = e.fresh(VarKey::action_mem(m, a));
  for (std::int32_t s = 0; s < ns; ++s)
    for (std::int32_t m = 0; m < mu; ++m) C[s * mu + m] = e.fresh(VarKey::reach_mem(s, m));
  for (std::int32_t s = 0; s < ns; ++s)
    for (std::int32_t m = 0; m < mu; ++m)
      for (std::int32_t j = 0; j <= k; ++j)
        P[(static_cast<std::size_t>(s) * mu + m) * kk + j] = e.fresh(VarKey::path_mem(s, m, j));
  for (std::int32_t m = 0; m < mu; ++m)
    for (std::int32_t z = 0; z < nz; ++z)
      for (std::int32_t a = 0; a < na; ++a)
        for (std::int32_t m2 = 0; m2 < mu; ++m2)
          M[((static_cast<std::size_t>(m) * nz + z) * na + a) * mu + m2] =
              e.fresh(VarKey::update(m, z, a, m2));

  std::vector<Literal> clause;
  for (std::int32_t m = 0; m < mu; ++m) {
    clause.clear();
    for (std::int32_t a = 0; a < na; ++a) clause.push_back(a_var(m, a));
    e.add(clause);
  }
  for (std::int32_t m = 0; m < mu; ++m)
    for (std::int32_t z = 0; z < nz; ++z)
      for (std::int32_t a = 0; a < na; ++a) {
        clause.clear();
        for (std::int32_t m2 = 0; m2 < mu; ++m2) clause.push_back(m_var(m, z, a, m2));
        e.add(clause);
      }
  for (std::int32_t s = 0; s < ns; ++s)
    for (std::int32_t m = 0; m < mu; ++m)
      for (std::int32_t a = 0; a < na; ++a)
        for (StateId t : p.support(s, a)) {
          const auto z = static_cast<std::int32_t>(p.observation(t));
          for (std::int32_t m2 = 0; m2 < mu; ++m2) {
            if (static_cast<std::int32_t>(t) == s && m2 == m) continue;  // tautology
            e.add({-c_var(s, m), -a_var(m, a), -m_var(m, z, a, m2), c_var(t, m2)});
          }
        }
  e.add({c_var(p.initial(), m0)});
  for (std::int32_t m = 0; m < mu; ++m)
    for (std::int32_t j = 0; j <= k; ++j) e.add({p_var(g, m, j)});
  for (std::int32_t s = 0; s < ns; ++s)
    for (std::int32_t m = 0; m < mu; ++m) e.add({-c_var(s, m), p_var(s, m, k)});
  for (std::int32_t s = 0; s < ns; ++s)
    if (s != g)
      for (std::int32_t m = 0; m < mu; ++m) e.add({-p_var(s, m, 0)});

  // M(m,z,a,m') & P(t,m',j) terms are shared between all predecessors of t.
  std::vector<Var> step(static_cast<std::size_t>(mu) * na * mu * ns * k, 0);
  auto step_term = [&](std::int32_t m, std::int32_t a, std::int32_t m2, std::int32_t t,
                       std::int32_t j) {
    Var& u = step[(((static_cast<std::size_t>(m) * na + a) * mu + m2) * ns + t) * k + j];
    if (u == 0) {
      u = e.fresh(VarKey::aux(AuxTag::kStep, {m, a, m2, t, j}));
      const auto z = static_cast<std::int32_t>(p.observation(t));
      tseitin_iff(e, u,
                  BoolExpr::all({BoolExpr::leaf(m_var(m, z, a, m2)),
                                 BoolExpr::leaf(p_var(t, m2, j))}),
                  reverse);
    }
    return u;
  };

  for (std::int32_t s = 0; s < ns; ++s) {
    if (s == g) continue;
    for (std::int32_t m = 0; m < mu; ++m)
      for (std::int32_t j = 1; j <= k; ++j) {
        std::vector<BoolExpr> options;
        options.reserve(na);
        for (std::int32_t a = 0; a < na; ++a) {
          std::vector<BoolExpr> succ;
          for (std::int32_t m2 = 0; m2 < mu; ++m2)
            for (StateId t : p.support(s, a))
              succ.push_back(BoolExpr::leaf(step_term(m, a, m2, static_cast<std::int32_t>(t), j - 1)));
          options.push_back(BoolExpr::all(
              {BoolExpr::leaf(a_var(m, a)), BoolExpr::any(std::move(succ))}));
        }
        tseitin_iff(e, p_var(s, m, j), BoolExpr::any(std::move(options)), reverse);
      }
  }
  return e;
}

// Exactly-one constraints: pairwise at-most-one on top of the at-least-one
// clauses already present.
inline void add_determinism(Encoding& e, const Pomdp& p, const EncodeParams& params) {
  const auto na = static_cast<std::int32_t>(p.num_actions());
  auto amo = [&e](const std::vector<Var>& xs) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = i + 1; j < xs.size(); ++j) e.add({-xs[i], -xs[j]});
  };
  std::vector<Var> xs;
  if (params.strategy_class == StrategyClass::kMemoryless) {
    const ObservationClasses oc(p);
    for (const auto& cls : oc.classes) {
      xs.clear();
      for (std::int32_t a = 0; a < na; ++a)
        xs.push_back(e.vars.at(VarKey::action_state(static_cast<std::int32_t>(cls.front()), a)));
      amo(xs);
    }
    return;
  }
  const auto nz = static_cast<std::int32_t>(p.num_observations());
  for (std::int32_t m = 0; m < params.mu; ++m) {
    xs.clear();
    for (std::int32_t a = 0; a < na; ++a) xs.push_back(e.vars.at(VarKey::action_mem(m, a)));
    amo(xs);
  }
  for (std::int32_t m = 0; m < params.mu; ++m)
    for (std::int32_t z = 0; z < nz; ++z)
      for (std::int32_t a = 0; a < na; ++a) {
        xs.clear();
        for (std::int32_t m2 = 0; m2 < params.mu; ++m2)
          xs.push_back(e.vars.at(VarKey::update(m, z, a, m2)));
        amo(xs);
      }
}

inline Encoding encode(const Pomdp& p, const EncodeParams& params) {
  check_params(params);
  Encoding e = params.strategy_class == StrategyClass::kMemoryless
                   ? encode_memoryless(p, params.k, params.reverse_implications)
                   : encode_small_memory(p, params.k, params.mu, params.m0,
                                         params.reverse_implications);
  if (params.deterministic) add_determinism(e, p, params);
  return e;
}

// Reference sizes for the encoding-size checks: the asymptotic variable
// count and |S|^2 mu^2 |Z| |A| k for clauses.
// Clause counts stay below kClauseConstant * clause_scale. Fixed from the
// worst ratio seen on small random models and the benchmark fixtures (5.25,
// at k=1 where the constant-size families dominate).
inline constexpr double kClauseConstant = 8.0;

struct SizeBounds {
  double vars;
  double clause_scale;
};

inline SizeBounds size_bounds(const Pomdp& p, const EncodeParams& params) {
  const double s = static_cast<double>(p.num_states());
  const double a = static_cast<double>(p.num_actions());
  const double z = static_cast<double>(p.num_observations());
  const double mu = params.strategy_class == StrategyClass::kMemoryless ? 1.0 : params.mu;
  const double k = params.k;
  return {2.0 * (s * mu * k + mu * mu * z * a + s * a), s * s * mu * mu * z * a * k};
}

}  // namespace qpomdp
