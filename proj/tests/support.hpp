#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qpomdp/qpomdp.hpp"

namespace testing_support {

using namespace qpomdp;

inline std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Pomdp load_fixture(const std::string& name) { return parse_pomdp(slurp(fixture(name))); }

struct RandomShape {
  int max_states = 6;
  int max_actions = 3;
  int max_obs = 4;
  int max_support = 3;
};

// Small random model: goal absorbing, every row a random support with random
// positive weights. State names are s0.. with the goal last.
inline Pomdp random_pomdp(std::uint64_t seed, RandomShape shape = {}) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int ns = pick(2, shape.max_states);
  const int na = pick(1, shape.max_actions);
  const int nz = pick(1, shape.max_obs);
  PomdpDraft d;
  for (int s = 0; s < ns; ++s) d.states.push_back(s + 1 == ns ? "G" : "s" + std::to_string(s));
  for (int a = 0; a < na; ++a) d.actions.push_back("a" + std::to_string(a));
  for (int z = 0; z < nz; ++z) d.observations.push_back("z" + std::to_string(z));
  const StateId goal = static_cast<StateId>(ns - 1);
  const bool dedicated = nz > 1 && pick(0, 1) == 1;
  for (int s = 0; s < ns; ++s) {
    int z = pick(0, nz - 1);
    if (dedicated) z = s == static_cast<int>(goal) ? nz - 1 : pick(0, nz - 2);
    d.obs_of.push_back(static_cast<ObsId>(z));
  }
  d.initial = static_cast<StateId>(pick(0, ns - 2));
  d.goal = goal;
  d.trans.resize(static_cast<std::size_t>(ns * na));
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) {
      auto& row = d.trans[static_cast<std::size_t>(s * na + a)];
      if (static_cast<StateId>(s) == goal) {
        row.push_back({goal, 1.0});
        continue;
      }
      std::vector<int> targets(static_cast<std::size_t>(ns));
      for (int t = 0; t < ns; ++t) targets[t] = t;
      std::shuffle(targets.begin(), targets.end(), rng);
      const int k = pick(1, std::min(shape.max_support, ns));
      double total = 0;
      std::vector<double> w(static_cast<std::size_t>(k));
      for (auto& x : w) total += (x = weight(rng));
      for (int i = 0; i < k; ++i) row.push_back({static_cast<StateId>(targets[i]), w[i] / total});
    }
  return Pomdp::create(std::move(d));
}

// Multiplies every positive probability by a factor in (0.5, 2] and
// renormalizes; supports are unchanged.
inline Pomdp reweight(const Pomdp& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> factor(0.5000001, 2.0);
  PomdpDraft d = p.draft();
  for (auto& row : d.trans) {
    double total = 0;
    for (auto& t : row) total += (t.probability *= factor(rng));
    for (auto& t : row) t.probability /= total;
  }
  return Pomdp::create(std::move(d));
}

inline EncodeParams small_memory(std::int32_t k, std::int32_t mu, bool det = false) {
  EncodeParams e;
  e.strategy_class = StrategyClass::kSmallMemory;
  e.k = k;
  e.mu = mu;
  e.deterministic = det;
  return e;
}

inline EncodeParams memoryless(std::int32_t k, bool det = false) {
  EncodeParams e;
  e.strategy_class = StrategyClass::kMemoryless;
  e.k = k;
  e.deterministic = det;
  return e;
}

// SAT decision plus verified extraction; fails loudly if a SAT model yields a
// strategy the verifier rejects.
struct Decision {
  bool sat = false;
  std::size_t non_aux_vars = 0;
  std::size_t clauses = 0;
  bool extraction_ok = true;
};

inline Decision decide(const Pomdp& p, const EncodeParams& params, std::uint64_t seed = 0) {
  Encoding e = encode(p, params);
  sat::Options o;
  o.seed = seed;
  const auto out = solve_embedded(e.cnf, o);
  Decision d;
  d.sat = out.sat();
  d.non_aux_vars = e.vars.count_non_aux();
  d.clauses = e.cnf.num_clauses();
  if (d.sat) d.extraction_ok = verify_almost_sure(p, extract_strategy(p, out, e.vars, params)).winning;
  return d;
}

// Exhaustive satisfiability check for formulas over at most ~22 variables.
inline bool brute_force_sat(const CnfFormula& f) {
  const auto n = f.num_vars();
  std::vector<bool> model(static_cast<std::size_t>(n) + 1);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    for (Var v = 1; v <= n; ++v) model[v] = bits >> (v - 1) & 1u;
    if (satisfies(f, model)) return true;
  }
  return false;
}

inline CnfFormula random_cnf(std::uint64_t seed, int vars, int clauses, int width = 3) {
  std::mt19937_64 rng(seed);
  CnfFormula f;
  f.ensure_vars(vars);
  std::uniform_int_distribution<int> var(1, vars);
  while (static_cast<int>(f.num_clauses()) < clauses) {
    std::vector<Literal> c;
    while (static_cast<int>(c.size()) < width) {
      const int v = var(rng);
      bool dup = false;
      for (auto l : c) dup = dup || std::abs(l) == v;
      if (!dup) c.push_back(rng() & 1 ? v : -v);
    }
    f.add_clause(c);
  }
  return f;
}

}  // namespace testing_support
