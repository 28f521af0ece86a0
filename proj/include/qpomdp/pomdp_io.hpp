#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"

namespace qpomdp {

struct ParseOptions {
  // Reject a non-absorbing goal instead of repairing it with normalize_goal.
  bool strict = false;
};

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize_line(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#')
      ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

inline std::string format_probability(double p) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, p);
  return std::string(buf, res.ptr);
}

class PomdpParser {
 public:
  explicit PomdpParser(std::string_view text) : text_(text) {}

  PomdpDraft parse() {
    enum Phase { kStates, kActions, kObservations, kInit, kGoal, kObs, kTrans };
    static constexpr std::string_view kKeywords[] = {
        "states:", "actions:", "observations:", "init:", "goal:", "obs:", "trans:"};

    int phase = -1;  // index of the last section seen
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<bool> obs_seen;
    std::unordered_map<std::uint64_t, std::size_t> trans_seen;
    while (pos <= text_.size()) {
      std::size_t eol = text_.find('\n', pos);
      if (eol == std::string_view::npos) eol = text_.size();
      std::string_view line = text_.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      const auto toks = tokenize_line(line);
      if (toks.empty()) continue;

      int kw = -1;
      for (int i = 0; i < 7; ++i)
        if (toks[0].text == kKeywords[i]) kw = i;
      if (kw < 0)
        throw ParseError(line_no, toks[0].column,
                         "expected a section keyword, found '" + std::string(toks[0].text) + "'");
      const bool repeatable = kw == kObs || kw == kTrans;
      if (kw < phase || (kw == phase && !repeatable))
        throw ParseError(line_no, toks[0].column,
                         "section '" + std::string(kKeywords[kw]) + "' out of order");
      if (kw > phase + 1)
        throw ParseError(line_no, toks[0].column,
                         "missing section '" + std::string(kKeywords[phase + 1]) + "'");
      phase = kw;

      switch (kw) {
        case kStates:
          d_.states = id_list(toks, line_no, "state");
          state_idx_ = make_index(d_.states);
          break;
        case kActions:
          d_.actions = id_list(toks, line_no, "action");
          action_idx_ = make_index(d_.actions);
          break;
        case kObservations:
          d_.observations = id_list(toks, line_no, "observation");
          obs_idx_ = make_index(d_.observations);
          obs_seen.assign(d_.states.size(), false);
          d_.obs_of.assign(d_.states.size(), 0);
          d_.trans.assign(d_.states.size() * d_.actions.size(), {});
          break;
        case kInit:
          arity(toks, 2, line_no);
          d_.initial = lookup(state_idx_, toks[1], line_no, "state");
          break;
        case kGoal:
          arity(toks, 2, line_no);
          d_.goal = lookup(state_idx_, toks[1], line_no, "state");
          break;
        case kObs: {
          arity(toks, 3, line_no);
          const auto s = lookup(state_idx_, toks[1], line_no, "state");
          const auto z = lookup(obs_idx_, toks[2], line_no, "observation");
          if (obs_seen[s])
            throw ParseError(line_no, toks[1].column,
                             "duplicate obs declaration for state '" + d_.states[s] + "'");
          obs_seen[s] = true;
          d_.obs_of[s] = z;
          break;
        }
        case kTrans: {
          arity(toks, 5, line_no);
          const auto s = lookup(state_idx_, toks[1], line_no, "state");
          const auto a = lookup(action_idx_, toks[2], line_no, "action");
          const auto t = lookup(state_idx_, toks[3], line_no, "state");
          const double p = probability(toks[4], line_no);
          const std::uint64_t key =
              (static_cast<std::uint64_t>(s) * d_.actions.size() + a) * d_.states.size() + t;
          if (!trans_seen.emplace(key, line_no).second)
            throw ParseError(line_no, toks[0].column,
                             "duplicate transition (" + d_.states[s] + ", " + d_.actions[a] +
                                 ", " + d_.states[t] + ")");
          d_.row(s, a).push_back({t, p});
          break;
        }
      }
    }
    if (phase < kObs) {
      const std::string missing(kKeywords[phase + 1]);
      throw ParseError(line_no == 0 ? 1 : line_no, 1,
                       phase < 0 ? "empty document" : "missing section '" + missing + "'");
    }
    if (phase < kTrans) throw ParseError(line_no, 1, "missing section 'trans:'");
    for (std::size_t s = 0; s < d_.states.size(); ++s)
      if (!obs_seen[s])
        throw ModelError("missing obs declaration for state '" + d_.states[s] + "'");
    return std::move(d_);
  }

 private:
  static void arity(const std::vector<Token>& toks, std::size_t n, std::size_t line) {
    if (toks.size() < n)
      throw ParseError(line, toks.back().column + toks.back().text.size(),
                       "expected " + std::to_string(n - 1) + " operand(s)");
    if (toks.size() > n)
      throw ParseError(line, toks[n].column,
                       "unexpected token '" + std::string(toks[n].text) + "'");
  }

  static std::vector<std::string> id_list(const std::vector<Token>& toks, std::size_t line,
                                          std::string_view what) {
    if (toks.size() < 2)
      throw ParseError(line, toks[0].column + toks[0].text.size(),
                       "expected at least one " + std::string(what));
    std::vector<std::string> out;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      if (!is_identifier(toks[i].text))
        throw ParseError(line, toks[i].column,
                         "invalid identifier '" + std::string(toks[i].text) + "'");
      for (const auto& prev : out)
        if (prev == toks[i].text)
          throw ParseError(line, toks[i].column,
                           "duplicate " + std::string(what) + " '" + prev + "'");
      out.emplace_back(toks[i].text);
    }
    return out;
  }

  using Index = std::unordered_map<std::string, std::uint32_t>;

  static Index make_index(const std::vector<std::string>& names) {
    Index idx;
    for (std::size_t i = 0; i < names.size(); ++i)
      idx.emplace(names[i], static_cast<std::uint32_t>(i));
    return idx;
  }

  static std::uint32_t lookup(const Index& names, const Token& tok, std::size_t line,
                              std::string_view what) {
    if (auto it = names.find(std::string(tok.text)); it != names.end()) return it->second;
    throw ParseError(line, tok.column,
                     "unknown " + std::string(what) + " '" + std::string(tok.text) + "'");
  }

  static double probability(const Token& tok, std::size_t line) {
    double v = 0.0;
    const char* b = tok.text.data();
    const char* e = b + tok.text.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
      throw ParseError(line, tok.column,
                       "invalid probability '" + std::string(tok.text) + "'");
    if (!(v > 0.0) || v > 1.0)
      throw ParseError(line, tok.column,
                       "probability '" + std::string(tok.text) + "' outside (0,1]");
    return v;
  }

  std::string_view text_;
  PomdpDraft d_;
  Index state_idx_, action_idx_, obs_idx_;
};

}  // namespace detail

inline PomdpDraft parse_pomdp_draft(std::string_view text) {
  return detail::PomdpParser(text).parse();
}

// Parses and validates a document. A non-absorbing goal is either rejected
// (strict) or repaired by redirecting it into a fresh absorbing goal.
inline Pomdp parse_pomdp(std::string_view text, const ParseOptions& opts = {}) {
  PomdpDraft d = parse_pomdp_draft(text);
  Pomdp::validate_draft(d);
  const StateId g = *d.goal;
  bool absorbing = true;
  for (ActionId a = 0; a < d.actions.size() && absorbing; ++a) {
    const auto& row = d.row(g, a);
    absorbing = row.size() == 1 && row[0].target == g;
  }
  if (absorbing) return Pomdp::create(std::move(d));
  if (opts.strict)
    throw ModelError("goal state '" + d.states[g] + "' is not absorbing");
  return normalize_goal(std::move(d), {g});
}

inline Pomdp read_pomdp(std::istream& in, const ParseOptions& opts = {}) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pomdp(ss.str(), opts);
}

inline void write_pomdp(std::ostream& os, const Pomdp& p) {
  auto list = [&](std::string_view kw, const std::vector<std::string>& names) {
    os << kw;
    for (const auto& n : names) os << ' ' << n;
    os << '\n';
  };
  list("states:", p.state_names());
  list("actions:", p.action_names());
  list("observations:", p.observation_names());
  os << "init: " << p.state_name(p.initial()) << '\n';
  os << "goal: " << p.state_name(p.goal()) << '\n';
  for (StateId s = 0; s < p.num_states(); ++s)
    os << "obs: " << p.state_name(s) << ' ' << p.observation_name(p.observation(s)) << '\n';
  for (StateId s = 0; s < p.num_states(); ++s)
    for (ActionId a = 0; a < p.num_actions(); ++a)
      for (const auto& t : p.transitions(s, a))
        os << "trans: " << p.state_name(s) << ' ' << p.action_name(a) << ' '
           << p.state_name(t.target) << ' ' << detail::format_probability(t.probability)
           << '\n';
}

inline std::string to_text(const Pomdp& p) {
  std::ostringstream os;
  write_pomdp(os, p);
  return os.str();
}

}  // namespace qpomdp
