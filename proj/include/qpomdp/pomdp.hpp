#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qpomdp/error.hpp"

namespace qpomdp {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
using ObsId = std::uint32_t;

inline constexpr double kProbabilityTolerance = 1e-9;

struct Transition {
  StateId target;
  double probability;
};

// Unvalidated model data. Rows are indexed by state * num_actions + action.
struct PomdpDraft {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  std::vector<ObsId> obs_of;
  std::vector<std::vector<Transition>> trans;
  StateId initial = 0;
  std::optional<StateId> goal;

  std::vector<Transition>& row(StateId s, ActionId a) {
    return trans[static_cast<std::size_t>(s) * actions.size() + a];
  }
  const std::vector<Transition>& row(StateId s, ActionId a) const {
    return trans[static_cast<std::size_t>(s) * actions.size() + a];
  }
};

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_';
  });
}

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline void check_names(const std::vector<std::string>& names,
                        std::string_view what) {
  if (names.empty()) throw ModelError("no " + std::string(what) + " declared");
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names) {
    if (!is_identifier(n))
      throw ModelError("invalid " + std::string(what) + " identifier '" + n + "'");
    if (!seen.insert(n).second)
      throw ModelError("duplicate " + std::string(what) + " '" + n + "'");
  }
}

}  // namespace detail

// A validated POMDP with total transition function and absorbing goal.
// Immutable once built.
class Pomdp {
 public:
  static Pomdp create(PomdpDraft d) {
    validate_draft(d);
    if (!d.goal) throw ModelError("no goal state declared");
    const StateId g = *d.goal;
    if (g >= d.states.size()) throw ModelError("goal state out of range");
    for (ActionId a = 0; a < d.actions.size(); ++a) {
      const auto& row = d.row(g, a);
      if (row.size() != 1 || row[0].target != g)
        throw ModelError("goal state '" + d.states[g] +
                         "' is not absorbing under action '" + d.actions[a] + "'");
    }
    return Pomdp(std::move(d));
  }

  // Structural checks shared by create() and normalize_goal(); the goal
  // field is not consulted.
  static void validate_draft(const PomdpDraft& d) {
    detail::check_names(d.states, "state");
    detail::check_names(d.actions, "action");
    detail::check_names(d.observations, "observation");
    if (d.obs_of.size() != d.states.size())
      throw ModelError("observation map does not cover every state");
    for (std::size_t s = 0; s < d.states.size(); ++s)
      if (d.obs_of[s] >= d.observations.size())
        throw ModelError("state '" + d.states[s] + "' has an unknown observation");
    if (d.initial >= d.states.size()) throw ModelError("initial state out of range");
    if (d.trans.size() != d.states.size() * d.actions.size())
      throw ModelError("transition table has wrong shape");
    for (StateId s = 0; s < d.states.size(); ++s) {
      for (ActionId a = 0; a < d.actions.size(); ++a) {
        const auto& row = d.row(s, a);
        const std::string where = "(" + d.states[s] + ", " + d.actions[a] + ")";
        if (row.empty()) throw ModelError("no transitions for " + where);
        double sum = 0.0;
        std::unordered_set<StateId> targets;
        for (const auto& t : row) {
          if (t.target >= d.states.size())
            throw ModelError("successor out of range in " + where);
          if (!(t.probability > 0.0) || !(t.probability <= 1.0) ||
              !std::isfinite(t.probability))
            throw ModelError("probability " + detail::format_double(t.probability) +
                             " outside (0,1] in " + where);
          if (!targets.insert(t.target).second)
            throw ModelError("duplicate successor '" + d.states[t.target] + "' in " + where);
          sum += t.probability;
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance)
          throw ModelError("probabilities sum to " + detail::format_double(sum) +
                           " for " + where);
      }
    }
  }

  std::size_t num_states() const noexcept { return d_.states.size(); }
  std::size_t num_actions() const noexcept { return d_.actions.size(); }
  std::size_t num_observations() const noexcept { return d_.observations.size(); }

  const std::string& state_name(StateId s) const { return d_.states[s]; }
  const std::string& action_name(ActionId a) const { return d_.actions[a]; }
  const std::string& observation_name(ObsId z) const { return d_.observations[z]; }
  const std::vector<std::string>& state_names() const noexcept { return d_.states; }
  const std::vector<std::string>& action_names() const noexcept { return d_.actions; }
  const std::vector<std::string>& observation_names() const noexcept {
    return d_.observations;
  }

  StateId initial() const noexcept { return d_.initial; }
  StateId goal() const noexcept { return *d_.goal; }
  ObsId observation(StateId s) const { return d_.obs_of[s]; }

  std::span<const Transition> transitions(StateId s, ActionId a) const {
    return d_.row(s, a);
  }

  // {s' : delta(s,a)(s') > 0}, ascending. Never empty.
  std::span<const StateId> support(StateId s, ActionId a) const {
    return supports_[static_cast<std::size_t>(s) * num_actions() + a];
  }

  std::optional<StateId> find_state(std::string_view name) const {
    return find(d_.states, name);
  }
  std::optional<ActionId> find_action(std::string_view name) const {
    return find(d_.actions, name);
  }
  std::optional<ObsId> find_observation(std::string_view name) const {
    return find(d_.observations, name);
  }

  // True when no other state shares the goal's observation.
  bool goal_observation_dedicated() const {
    for (StateId s = 0; s < num_states(); ++s)
      if (s != goal() && observation(s) == observation(goal())) return false;
    return true;
  }

  const PomdpDraft& draft() const noexcept { return d_; }

 private:
  explicit Pomdp(PomdpDraft d) : d_(std::move(d)) {
    supports_.resize(d_.trans.size());
    for (std::size_t i = 0; i < d_.trans.size(); ++i) {
      auto& sup = supports_[i];
      for (const auto& t : d_.trans[i]) sup.push_back(t.target);
      std::sort(sup.begin(), sup.end());
    }
  }

  static std::optional<std::uint32_t> find(const std::vector<std::string>& v,
                                           std::string_view name) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] == name) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }

  PomdpDraft d_;
  std::vector<std::vector<StateId>> supports_;
};

// Partition of the states by observation. Only non-empty classes are listed,
// ordered by observation id.
struct ObservationClasses {
  std::vector<std::vector<StateId>> classes;
  std::vector<std::uint32_t> class_of;
  std::vector<ObsId> observation;

  explicit ObservationClasses(const Pomdp& p) {
    std::vector<std::int64_t> index(p.num_observations(), -1);
    class_of.resize(p.num_states());
    for (ObsId z = 0; z < p.num_observations(); ++z) {
      for (StateId s = 0; s < p.num_states(); ++s) {
        if (p.observation(s) != z) continue;
        if (index[z] < 0) {
          index[z] = static_cast<std::int64_t>(classes.size());
          classes.emplace_back();
          observation.push_back(z);
        }
        classes[index[z]].push_back(s);
        class_of[s] = static_cast<std::uint32_t>(index[z]);
      }
    }
  }
};

inline std::span<const StateId> support_successors(const Pomdp& p, StateId s,
                                                   ActionId a) {
  return p.support(s, a);
}

namespace detail {

inline std::string fresh_name(const std::vector<std::string>& taken,
                              const std::string& base) {
  auto used = [&](const std::string& n) {
    return std::find(taken.begin(), taken.end(), n) != taken.end();
  };
  if (!used(base)) return base;
  for (int i = 1;; ++i) {
    std::string n = base + "_" + std::to_string(i);
    if (!used(n)) return n;
  }
}

}  // namespace detail

// Collapses the target set into one fresh absorbing goal state with its own
// observation. A model whose target is already a lone absorbing goal with a
// dedicated observation is returned as is.
inline Pomdp normalize_goal(PomdpDraft d, const std::vector<StateId>& targets) {
  if (targets.empty()) throw ModelError("target set is empty");
  Pomdp::validate_draft(d);
  for (StateId t : targets)
    if (t >= d.states.size()) throw ModelError("target state out of range");

  if (targets.size() == 1) {
    const StateId t = targets.front();
    bool absorbing = true;
    for (ActionId a = 0; a < d.actions.size() && absorbing; ++a) {
      const auto& row = d.row(t, a);
      absorbing = row.size() == 1 && row[0].target == t;
    }
    bool dedicated = true;
    for (StateId s = 0; s < d.states.size(); ++s)
      if (s != t && d.obs_of[s] == d.obs_of[t]) dedicated = false;
    if (absorbing && dedicated) {
      d.goal = t;
      return Pomdp::create(std::move(d));
    }
  }

  const std::size_t na = d.actions.size();
  const auto g = static_cast<StateId>(d.states.size());
  const auto zg = static_cast<ObsId>(d.observations.size());
  d.states.push_back(detail::fresh_name(d.states, "goal"));
  d.observations.push_back(detail::fresh_name(d.observations, "goal"));
  d.obs_of.push_back(zg);

  std::vector<std::vector<Transition>> trans;
  trans.reserve(d.states.size() * na);
  std::vector<bool> is_target(d.states.size(), false);
  for (StateId t : targets) is_target[t] = true;
  for (StateId s = 0; s < g; ++s)
    for (ActionId a = 0; a < na; ++a)
      trans.push_back(is_target[s] ? std::vector<Transition>{{g, 1.0}} : d.row(s, a));
  for (ActionId a = 0; a < na; ++a) trans.push_back({{g, 1.0}});
  d.trans = std::move(trans);
  d.goal = g;
  return Pomdp::create(std::move(d));
}

inline Pomdp normalize_goal(const Pomdp& p, const std::vector<StateId>& targets) {
  return normalize_goal(p.draft(), targets);
}

}  // namespace qpomdp
