#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpomdp/encoder.hpp"
#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"
#include "qpomdp/sat/cdcl.hpp"
#include "qpomdp/sat/external.hpp"
#include "qpomdp/strategy.hpp"

namespace qpomdp {

struct Backend {
  std::string external_command;  // empty selects the embedded solver

  static Backend parse(const std::string& spec) {
    if (spec == "embedded") return {};
    const std::string prefix = "external:";
    if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size()) return {spec.substr(prefix.size())};
    throw Error("unknown backend '" + spec + "' (expected embedded or external:<command>)");
  }
  bool embedded() const { return external_command.empty(); }
};

inline SatOutcome run_backend(const Backend& b, const CnfFormula& f, const sat::Options& opts) {
  return b.embedded() ? solve_embedded(f, opts) : solve_external(f, b.external_command);
}

struct SolveConfig {
  std::optional<MemId> mu;      // fixed memory size; otherwise search 1..mu_max
  MemId mu_max = 1;
  std::vector<std::int32_t> k_schedule;  // empty selects the doubling schedule
  bool deterministic = false;
  bool memoryless = false;
  bool reverse_implications = true;
  Backend backend;
  std::uint64_t seed = 0;
  std::uint64_t conflict_budget = 0;
};

// Path-length bound at which UNSAT rules out every strategy of the class.
inline std::int32_t conclusive_k(const Pomdp& p, MemId mu) {
  return static_cast<std::int32_t>(p.num_states()) * mu;
}

// 2, 4, 8, ... below the bound, then the bound itself.
inline std::vector<std::int32_t> doubling_schedule(std::int32_t bound) {
  std::vector<std::int32_t> ks;
  for (std::int32_t k = 2; k < bound; k *= 2) ks.push_back(k);
  ks.push_back(std::max<std::int32_t>(bound, 1));
  return ks;
}

struct Attempt {
  MemId mu = 1;
  std::int32_t k = 1;
  std::size_t vars = 0;
  std::size_t non_aux_vars = 0;
  std::size_t clauses = 0;
  SatStatus status = SatStatus::kUnknown;
  SolverStats stats;
  double encode_ms = 0;
  double solve_ms = 0;
};

enum class Verdict { kWinning, kNoStrategy, kUnknown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kWinning: return "WINNING";
    case Verdict::kNoStrategy: return "NO-STRATEGY";
    case Verdict::kUnknown: return "UNKNOWN";
  }
  return "?";
}

struct SolveReport {
  Verdict verdict = Verdict::kUnknown;
  MemId mu = 0;        // memory size of the verdict
  std::int32_t k = 0;  // k of the deciding run
  std::optional<FiniteMemoryStrategy> strategy;
  std::vector<Attempt> attempts;
  std::vector<MemId> refuted;  // sizes shown to have no strategy
  double time_ms = 0;

  std::string summary() const {
    switch (verdict) {
      case Verdict::kWinning:
        return "WINNING(" + std::to_string(mu) + ", " + std::to_string(k) + ")";
      case Verdict::kNoStrategy:
        return "NO-STRATEGY(" + std::to_string(mu) + ")";
      case Verdict::kUnknown:
        return "UNKNOWN(" + std::to_string(mu) + ")";
    }
    return "?";
  }
};

namespace detail {
inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

// One formula, one solver call. A SAT answer is turned into a strategy and
// checked by the verifier; a rejected strategy is an error.
inline Attempt solve_once(const Pomdp& p, const EncodeParams& params, const SolveConfig& cfg,
                          std::optional<FiniteMemoryStrategy>* strategy = nullptr) {
  Attempt at;
  at.mu = params.mu;
  at.k = params.k;
  auto t0 = std::chrono::steady_clock::now();
  Encoding e = encode(p, params);
  at.encode_ms = detail::ms_since(t0);
  at.vars = static_cast<std::size_t>(e.cnf.num_vars());
  at.non_aux_vars = e.vars.count_non_aux();
  at.clauses = e.cnf.num_clauses();
  t0 = std::chrono::steady_clock::now();
  sat::Options opts;
  opts.seed = cfg.seed;
  opts.conflict_budget = cfg.conflict_budget;
  const SatOutcome out = run_backend(cfg.backend, e.cnf, opts);
  at.solve_ms = detail::ms_since(t0);
  at.status = out.status;
  at.stats = out.stats;
  if (out.sat()) {
    auto sigma = extract_strategy(p, out, e.vars, params);
    const auto check = verify_almost_sure(p, sigma);
    if (!check.winning)
      throw Error("extracted strategy fails verification at node (" +
                  p.state_name(check.counterexample->state) + ", m" +
                  std::to_string(check.counterexample->memory) + ")");
    if (strategy) *strategy = std::move(sigma);
  }
  return at;
}

inline SolveReport solve(const Pomdp& p, const SolveConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  std::vector<MemId> sizes;
  if (cfg.memoryless) {
    sizes = {1};
  } else if (cfg.mu) {
    sizes = {*cfg.mu};
  } else {
    for (MemId m = 1; m <= cfg.mu_max; ++m) sizes.push_back(m);
  }
  if (sizes.empty() || sizes.front() < 1) throw Error("mu must be at least 1");
  for (std::int32_t k : cfg.k_schedule)
    if (k < 1) throw Error("k must be at least 1");

  for (MemId mu : sizes) {
    const std::int32_t bound = conclusive_k(p, mu);
    auto ks = cfg.k_schedule.empty() ? doubling_schedule(bound) : cfg.k_schedule;
    rep.mu = mu;
    bool conclusive = false;
    bool won = false;
    for (std::int32_t k : ks) {
      EncodeParams params;
      params.strategy_class = cfg.memoryless ? StrategyClass::kMemoryless : StrategyClass::kSmallMemory;
      params.k = k;
      params.mu = mu;
      params.deterministic = cfg.deterministic;
      params.reverse_implications = cfg.reverse_implications;
      std::optional<FiniteMemoryStrategy> sigma;
      rep.attempts.push_back(solve_once(p, params, cfg, &sigma));
      rep.k = k;
      const auto status = rep.attempts.back().status;
      if (status == SatStatus::kSat) {
        rep.strategy = std::move(sigma);
        won = true;
        break;
      }
      if (status == SatStatus::kUnknown) break;
      if (k >= bound) {
        conclusive = true;
        break;
      }
    }
    if (won) {
      rep.verdict = Verdict::kWinning;
      break;
    }
    if (!conclusive) {
      rep.verdict = Verdict::kUnknown;
      break;
    }
    rep.refuted.push_back(mu);
    rep.verdict = Verdict::kNoStrategy;
  }
  rep.time_ms = detail::ms_since(t0);
  return rep;
}

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::kWinning: return 0;
    case Verdict::kNoStrategy: return 1;
    case Verdict::kUnknown: return 2;
  }
  return 2;
}

inline nlohmann::json stats_json(const SolverStats& s) {
  return {{"conflicts", s.conflicts},
          {"decisions", s.decisions},
          {"propagations", s.propagations},
          {"restarts", s.restarts},
          {"wall_ms", s.wall_ms}};
}

inline nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["summary"] = r.summary();
  j["mu"] = r.mu;
  j["k"] = r.k;
  const Attempt* last = r.attempts.empty() ? nullptr : &r.attempts.back();
  j["vars"] = last ? last->vars : 0;
  j["clauses"] = last ? last->clauses : 0;
  j["solver_stats"] = last ? stats_json(last->stats) : nlohmann::json::object();
  j["time_ms"] = r.time_ms;
  j["refuted_mu"] = r.refuted;
  auto& runs = j["attempts"] = nlohmann::json::array();
  for (const auto& a : r.attempts)
    runs.push_back({{"mu", a.mu},
                    {"k", a.k},
                    {"status", to_string(a.status)},
                    {"vars", a.vars},
                    {"non_aux_vars", a.non_aux_vars},
                    {"clauses", a.clauses},
                    {"encode_ms", a.encode_ms},
                    {"solve_ms", a.solve_ms},
                    {"solver_stats", stats_json(a.stats)}});
  return j;
}

}  // namespace qpomdp
