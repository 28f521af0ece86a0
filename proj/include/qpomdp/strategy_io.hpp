#pragma once

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"
#include "qpomdp/pomdp_io.hpp"
#include "qpomdp/strategy.hpp"

namespace qpomdp {

// Strategy text format, names resolved against the model:
//   mu: <n>
//   m0: <m>
//   deterministic: true|false
//   actions:
//   <m> <action> ...
//   updates:
//   <m> <observation|*> <action|*> <m'> ...
// Every memory state needs one actions line; every (m, z, a) needs exactly one
// update, possibly through a wildcard.
inline void write_strategy(std::ostream& os, const Pomdp& p, const FiniteMemoryStrategy& s) {
  s.check_against(p);
  os << "mu: " << s.mu << '\n'
     << "m0: " << s.m0 << '\n'
     << "deterministic: " << (s.deterministic ? "true" : "false") << '\n'
     << "actions:\n";
  for (MemId m = 0; m < s.mu; ++m) {
    os << m;
    for (ActionId a : s.action_support[m]) os << ' ' << p.action_name(a);
    os << '\n';
  }
  os << "updates:\n";
  for (MemId m = 0; m < s.mu; ++m)
    for (ObsId z = 0; z < p.num_observations(); ++z)
      for (ActionId a = 0; a < p.num_actions(); ++a) {
        os << m << ' ' << p.observation_name(z) << ' ' << p.action_name(a);
        for (MemId m2 : s.updates(m, z, a)) os << ' ' << m2;
        os << '\n';
      }
}

inline std::string to_text(const Pomdp& p, const FiniteMemoryStrategy& s) {
  std::ostringstream os;
  write_strategy(os, p, s);
  return os.str();
}

namespace detail {

inline MemId parse_mem(const Token& t, std::size_t line_no, MemId mu) {
  MemId v = 0;
  const auto* end = t.text.data() + t.text.size();
  const auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ParseError(line_no, t.column, "expected a memory index, got '" + std::string(t.text) + "'");
  if (v < 0 || v >= mu) throw ParseError(line_no, t.column, "memory index " + std::string(t.text) + " out of range");
  return v;
}

}  // namespace detail

inline FiniteMemoryStrategy parse_strategy(std::string_view text, const Pomdp& p) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  enum Phase { kMu, kM0, kDet, kActionsHeader, kActions, kUpdates } phase = kMu;
  FiniteMemoryStrategy s;
  std::vector<bool> action_seen;
  std::vector<bool> update_seen;
  bool declared_deterministic = false;

  auto expect_header = [&line_no](const std::vector<detail::Token>& toks, const char* key) {
    if (toks[0].text != key)
      throw ParseError(line_no, toks[0].column,
                       "expected '" + std::string(key) + "', got '" + std::string(toks[0].text) + "'");
  };
  auto single_value = [&line_no](const std::vector<detail::Token>& toks) -> const detail::Token& {
    if (toks.size() != 2) throw ParseError(line_no, toks[0].column, "expected one value");
    return toks[1];
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = detail::tokenize_line(line);
    if (toks.empty()) continue;
    switch (phase) {
      case kMu: {
        expect_header(toks, "mu:");
        const auto& t = single_value(toks);
        const MemId mu = detail::parse_mem(t, line_no, 1 << 20);
        if (mu < 1) throw ParseError(line_no, t.column, "mu must be at least 1");
        s = FiniteMemoryStrategy(mu, 0, p.num_observations(), p.num_actions());
        action_seen.assign(static_cast<std::size_t>(mu), false);
        update_seen.assign(s.update_support.size(), false);
        phase = kM0;
        break;
      }
      case kM0:
        expect_header(toks, "m0:");
        s.m0 = detail::parse_mem(single_value(toks), line_no, s.mu);
        phase = kDet;
        break;
      case kDet: {
        expect_header(toks, "deterministic:");
        const auto& t = single_value(toks);
        if (t.text == "true")
          declared_deterministic = true;
        else if (t.text != "false")
          throw ParseError(line_no, t.column, "expected true or false");
        phase = kActionsHeader;
        break;
      }
      case kActionsHeader:
        expect_header(toks, "actions:");
        if (toks.size() != 1) throw ParseError(line_no, toks[1].column, "unexpected token");
        phase = kActions;
        break;
      case kActions:
        if (toks[0].text == "updates:") {
          if (toks.size() != 1) throw ParseError(line_no, toks[1].column, "unexpected token");
          phase = kUpdates;
          break;
        }
        {
          const MemId m = detail::parse_mem(toks[0], line_no, s.mu);
          if (action_seen[m]) throw ParseError(line_no, toks[0].column, "duplicate actions line");
          action_seen[m] = true;
          if (toks.size() < 2) throw ParseError(line_no, toks[0].column, "empty action support");
          for (std::size_t i = 1; i < toks.size(); ++i) {
            const auto a = p.find_action(toks[i].text);
            if (!a) throw ParseError(line_no, toks[i].column, "unknown action '" + std::string(toks[i].text) + "'");
            s.action_support[m].push_back(*a);
          }
          std::sort(s.action_support[m].begin(), s.action_support[m].end());
          s.action_support[m].erase(std::unique(s.action_support[m].begin(), s.action_support[m].end()),
                                    s.action_support[m].end());
        }
        break;
      case kUpdates: {
        if (toks.size() < 4) throw ParseError(line_no, toks[0].column, "update needs memory, observation, action and targets");
        const MemId m = detail::parse_mem(toks[0], line_no, s.mu);
        std::vector<ObsId> zs;
        if (toks[1].text == "*") {
          for (ObsId z = 0; z < p.num_observations(); ++z) zs.push_back(z);
        } else if (auto z = p.find_observation(toks[1].text)) {
          zs.push_back(*z);
        } else {
          throw ParseError(line_no, toks[1].column, "unknown observation '" + std::string(toks[1].text) + "'");
        }
        std::vector<ActionId> as;
        if (toks[2].text == "*") {
          for (ActionId a = 0; a < p.num_actions(); ++a) as.push_back(a);
        } else if (auto a = p.find_action(toks[2].text)) {
          as.push_back(*a);
        } else {
          throw ParseError(line_no, toks[2].column, "unknown action '" + std::string(toks[2].text) + "'");
        }
        std::vector<MemId> targets;
        for (std::size_t i = 3; i < toks.size(); ++i) targets.push_back(detail::parse_mem(toks[i], line_no, s.mu));
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        for (ObsId z : zs)
          for (ActionId a : as) {
            const auto idx = s.update_index(m, z, a);
            if (update_seen[idx]) throw ParseError(line_no, toks[0].column, "update defined twice");
            update_seen[idx] = true;
            s.update_support[idx] = targets;
          }
        break;
      }
    }
  }
  if (phase == kMu) throw ParseError(1, 1, "empty strategy");
  if (phase != kUpdates) throw ParseError(line_no + 1, 1, "missing section");
  for (MemId m = 0; m < s.mu; ++m)
    if (!action_seen[m]) throw ParseError(line_no + 1, 1, "no actions line for memory state " + std::to_string(m));
  for (std::size_t i = 0; i < update_seen.size(); ++i)
    if (!update_seen[i]) throw ParseError(line_no + 1, 1, "memory update not defined for every (m, observation, action)");
  s.deterministic = declared_deterministic;
  s.check_against(p);
  return s;
}

inline FiniteMemoryStrategy read_strategy(std::istream& in, const Pomdp& p) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_strategy(ss.str(), p);
}

}  // namespace qpomdp
