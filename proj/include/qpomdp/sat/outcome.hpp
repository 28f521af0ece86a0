#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpomdp/cnf.hpp"

namespace qpomdp {

enum class SatStatus { kSat, kUnsat, kUnknown };

inline const char* to_string(SatStatus s) {
  switch (s) {
    case SatStatus::kSat: return "SAT";
    case SatStatus::kUnsat: return "UNSAT";
    case SatStatus::kUnknown: return "UNKNOWN";
  }
  return "?";
}

struct SolverStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  double wall_ms = 0.0;
};

struct SatOutcome {
  SatStatus status = SatStatus::kUnknown;
  // model[v] for v in 1..num_vars; index 0 unused. Empty unless SAT.
  std::vector<bool> model;
  SolverStats stats;

  bool sat() const noexcept { return status == SatStatus::kSat; }
  bool value(Var v) const { return model.at(static_cast<std::size_t>(v)); }
};

// Index of the first clause the assignment falsifies, if any.
inline std::optional<std::size_t> first_falsified_clause(const CnfFormula& f,
                                                         const std::vector<bool>& model) {
  if (model.size() < static_cast<std::size_t>(f.num_vars()) + 1) return std::size_t{0};
  for (std::size_t i = 0; i < f.num_clauses(); ++i) {
    bool sat = false;
    for (Literal l : f.clause(i)) {
      if (model[static_cast<std::size_t>(l > 0 ? l : -l)] == (l > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return i;
  }
  return std::nullopt;
}

inline bool satisfies(const CnfFormula& f, const std::vector<bool>& model) {
  return !first_falsified_clause(f, model).has_value();
}

}  // namespace qpomdp
