#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "qpomdp/error.hpp"

namespace qpomdp {

using Var = std::int32_t;  // 1-based, DIMACS convention
using Literal = std::int32_t;

// Clause database over DIMACS literals. Clauses are stored back to back.
class CnfFormula {
 public:
  std::int32_t num_vars() const noexcept { return num_vars_; }
  std::size_t num_clauses() const noexcept { return starts_.size(); }
  std::size_t num_literals() const noexcept { return lits_.size(); }

  void ensure_vars(std::int32_t n) { num_vars_ = std::max(num_vars_, n); }

  std::span<const Literal> clause(std::size_t i) const {
    const std::size_t b = starts_[i];
    const std::size_t e = i + 1 < starts_.size() ? starts_[i + 1] : lits_.size();
    return {lits_.data() + b, e - b};
  }

  // Appends a clause. Duplicate literals are merged; an empty clause, an
  // unallocated variable, or a clause containing v and -v is a caller bug.
  void add_clause(std::span<const Literal> lits) {
    if (lits.empty()) throw CnfError("empty clause");
    scratch_.assign(lits.begin(), lits.end());
    for (Literal l : scratch_)
      if (l == 0 || std::abs(l) > num_vars_)
        throw CnfError("literal " + std::to_string(l) + " out of range (num_vars " +
                       std::to_string(num_vars_) + ")");
    std::sort(scratch_.begin(), scratch_.end(),
              [](Literal a, Literal b) { return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b); });
    scratch_.erase(std::unique(scratch_.begin(), scratch_.end()), scratch_.end());
    for (std::size_t i = 1; i < scratch_.size(); ++i)
      if (scratch_[i] == -scratch_[i - 1])
        throw CnfError("tautological clause on variable " + std::to_string(std::abs(scratch_[i])));
    starts_.push_back(lits_.size());
    lits_.insert(lits_.end(), scratch_.begin(), scratch_.end());
  }

  void add_clause(std::initializer_list<Literal> lits) {
    add_clause(std::span<const Literal>(lits.begin(), lits.size()));
  }

 private:
  std::int32_t num_vars_ = 0;
  std::vector<Literal> lits_;
  std::vector<std::size_t> starts_;
  std::vector<Literal> scratch_;
};

// ---------------------------------------------------------------------------
// Semantic variable keys.

enum class VarKind : std::uint8_t {
  kActionState,  // A(state, action), memoryless encoding
  kActionMem,    // A(mem, action)
  kReach,        // C(state)
  kReachMem,     // C(state, mem)
  kPath,         // P(state, step)
  kPathMem,      // P(state, mem, step)
  kUpdate,       // M(mem, obs, action, mem')
  kAux,          // Tseitin auxiliary
};

enum class AuxTag : std::uint8_t {
  kNone,
  kNode,      // anonymous internal node: (defining lhs, serial)
  kStep,      // shared M(m,z,a,m') & P(s',m',j): (m, a, m', s', j)
  kSuccessor, // memoryless OR over successors: (state, action, j)
};

struct VarKey {
  VarKind kind = VarKind::kAux;
  AuxTag tag = AuxTag::kNone;
  std::array<std::int32_t, 5> idx{-1, -1, -1, -1, -1};

  friend bool operator==(const VarKey&, const VarKey&) = default;

  static VarKey action_state(std::int32_t s, std::int32_t a) { return {VarKind::kActionState, AuxTag::kNone, {s, a, -1, -1, -1}}; }
  static VarKey action_mem(std::int32_t m, std::int32_t a) { return {VarKind::kActionMem, AuxTag::kNone, {m, a, -1, -1, -1}}; }
  static VarKey reach(std::int32_t s) { return {VarKind::kReach, AuxTag::kNone, {s, -1, -1, -1, -1}}; }
  static VarKey reach_mem(std::int32_t s, std::int32_t m) { return {VarKind::kReachMem, AuxTag::kNone, {s, m, -1, -1, -1}}; }
  static VarKey path(std::int32_t s, std::int32_t j) { return {VarKind::kPath, AuxTag::kNone, {s, j, -1, -1, -1}}; }
  static VarKey path_mem(std::int32_t s, std::int32_t m, std::int32_t j) { return {VarKind::kPathMem, AuxTag::kNone, {s, m, j, -1, -1}}; }
  static VarKey update(std::int32_t m, std::int32_t z, std::int32_t a, std::int32_t m2) { return {VarKind::kUpdate, AuxTag::kNone, {m, z, a, m2, -1}}; }
  static VarKey aux(AuxTag tag, std::array<std::int32_t, 5> t) { return {VarKind::kAux, tag, t}; }

  bool is_aux() const noexcept { return kind == VarKind::kAux; }

  // Compact token used in DIMACS comments, e.g. "P[s3,m0,j2]".
  std::string to_string() const {
    auto join = [this](std::string head, std::initializer_list<const char*> prefixes) {
      head += '[';
      std::size_t i = 0;
      for (const char* p : prefixes) {
        if (i) head += ',';
        head += p;
        head += std::to_string(idx[i]);
        ++i;
      }
      return head + ']';
    };
    switch (kind) {
      case VarKind::kActionState: return join("A", {"s", "a"});
      case VarKind::kActionMem: return join("A", {"m", "a"});
      case VarKind::kReach: return join("C", {"s"});
      case VarKind::kReachMem: return join("C", {"s", "m"});
      case VarKind::kPath: return join("P", {"s", "j"});
      case VarKind::kPathMem: return join("P", {"s", "m", "j"});
      case VarKind::kUpdate: return join("M", {"m", "z", "a", "m"});
      case VarKind::kAux: break;
    }
    std::string out = "AUX" + std::to_string(static_cast<int>(tag)) + "[";
    for (std::size_t i = 0; i < idx.size() && idx[i] >= 0; ++i) {
      if (i) out += ',';
      out += std::to_string(idx[i]);
    }
    return out + ']';
  }
};

struct VarKeyHash {
  std::size_t operator()(const VarKey& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull ^ (static_cast<std::uint64_t>(k.kind) << 8 |
                                               static_cast<std::uint64_t>(k.tag));
    for (auto v : k.idx) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 0x100000001b3ull;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

// Bidirectional map between semantic keys and CNF variables.
class VarMap {
 public:
  Var fresh_var(const VarKey& key) {
    const Var v = static_cast<Var>(keys_.size()) + 1;
    if (!index_.emplace(key, v).second)
      throw CnfError("variable " + key.to_string() + " already allocated");
    keys_.push_back(key);
    return v;
  }

  Var at(const VarKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw CnfError("no variable for " + key.to_string());
    return it->second;
  }

  std::optional<Var> find(const VarKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const VarKey& key(Var v) const { return keys_.at(static_cast<std::size_t>(v) - 1); }
  std::size_t size() const noexcept { return keys_.size(); }

  std::size_t count_non_aux() const {
    return static_cast<std::size_t>(
        std::count_if(keys_.begin(), keys_.end(), [](const VarKey& k) { return !k.is_aux(); }));
  }

 private:
  std::vector<VarKey> keys_;
  std::unordered_map<VarKey, Var, VarKeyHash> index_;
};

// Positive and/or tree; negation only at the leaves.
struct BoolExpr {
  enum class Op : std::uint8_t { kLit, kAnd, kOr };
  Op op = Op::kLit;
  Literal lit = 0;
  std::vector<BoolExpr> children;

  static BoolExpr leaf(Literal l) { return {Op::kLit, l, {}}; }
  static BoolExpr all(std::vector<BoolExpr> c) { return {Op::kAnd, 0, std::move(c)}; }
  static BoolExpr any(std::vector<BoolExpr> c) { return {Op::kOr, 0, std::move(c)}; }

  bool is_leaf() const noexcept { return op == Op::kLit; }

  std::size_t internal_nodes() const {
    if (is_leaf()) return 0;
    std::size_t n = 1;
    for (const auto& c : children) n += c.internal_nodes();
    return n;
  }
  std::size_t total_fan_in() const {
    if (is_leaf()) return 0;
    std::size_t n = children.size();
    for (const auto& c : children) n += c.total_fan_in();
    return n;
  }

  // Evaluates under an assignment indexed by variable (index 0 unused).
  bool eval(const std::vector<bool>& value) const {
    switch (op) {
      case Op::kLit: return lit > 0 ? value[lit] : !value[-lit];
      case Op::kAnd:
        return std::all_of(children.begin(), children.end(),
                           [&](const BoolExpr& c) { return c.eval(value); });
      case Op::kOr:
        return std::any_of(children.begin(), children.end(),
                           [&](const BoolExpr& c) { return c.eval(value); });
    }
    return false;
  }
};

// A formula under construction together with its variable map.
struct Encoding {
  CnfFormula cnf;
  VarMap vars;
  std::int32_t node_serial = 0;

  Var fresh(const VarKey& key) {
    const Var v = vars.fresh_var(key);
    cnf.ensure_vars(v);
    return v;
  }
  void add(std::initializer_list<Literal> lits) { cnf.add_clause(lits); }
  void add(std::span<const Literal> lits) { cnf.add_clause(lits); }
};

inline Var fresh_var(Encoding& e, const VarKey& key) { return e.fresh(key); }

inline void add_clause(CnfFormula& f, std::span<const Literal> lits) { f.add_clause(lits); }

namespace detail {

// Defines lhs <=> expr (or lhs => expr when !both). Internal children get
// one AUX variable each; the root reuses lhs.
inline void tseitin_define(Encoding& e, Var lhs, const BoolExpr& expr, bool both) {
  const BoolExpr* node = &expr;
  while (!node->is_leaf() && node->children.size() == 1) node = &node->children.front();

  if (node->is_leaf()) {
    if (node->lit == lhs) return;
    e.add({-lhs, node->lit});
    if (both) e.add({lhs, -node->lit});
    return;
  }

  std::vector<Literal> kids;
  kids.reserve(node->children.size());
  for (const auto& c : node->children) {
    const BoolExpr* child = &c;
    while (!child->is_leaf() && child->children.size() == 1) child = &child->children.front();
    if (child->is_leaf()) {
      kids.push_back(child->lit);
    } else {
      const Var t = e.fresh(VarKey::aux(AuxTag::kNode, {lhs, e.node_serial++, -1, -1, -1}));
      tseitin_define(e, t, *child, both);
      kids.push_back(t);
    }
  }

  std::vector<Literal> big;
  big.reserve(kids.size() + 1);
  if (node->op == BoolExpr::Op::kAnd) {
    if (kids.empty()) {
      e.add({lhs});
      return;
    }
    for (Literal k : kids) e.add({-lhs, k});
    if (both) {
      big.push_back(lhs);
      for (Literal k : kids) big.push_back(-k);
      e.add(big);
    }
  } else {
    if (kids.empty()) {
      e.add({-lhs});
      return;
    }
    big.push_back(-lhs);
    big.insert(big.end(), kids.begin(), kids.end());
    e.add(big);
    if (both)
      for (Literal k : kids) e.add({lhs, -k});
  }
}

}  // namespace detail

// Asserts lhs <=> rhs. With both_directions=false only lhs => rhs is
// emitted, which is equisatisfiable for the monotone uses in the encoder.
inline void tseitin_iff(Encoding& e, Var lhs, const BoolExpr& rhs, bool both_directions = true) {
  detail::tseitin_define(e, lhs, rhs, both_directions);
}

// ---------------------------------------------------------------------------
// DIMACS.

inline void write_dimacs(std::ostream& os, const CnfFormula& f, const VarMap* map = nullptr) {
  if (map) {
    for (std::size_t v = 1; v <= map->size(); ++v) {
      const auto& k = map->key(static_cast<Var>(v));
      if (!k.is_aux()) os << "c " << k.to_string() << ' ' << v << '\n';
    }
  }
  os << "p cnf " << f.num_vars() << ' ' << f.num_clauses() << '\n';
  std::string line;
  for (std::size_t i = 0; i < f.num_clauses(); ++i) {
    line.clear();
    for (Literal l : f.clause(i)) {
      line += std::to_string(l);
      line += ' ';
    }
    line += "0\n";
    os << line;
  }
}

inline std::string to_dimacs(const CnfFormula& f, const VarMap* map = nullptr) {
  std::ostringstream os;
  write_dimacs(os, f, map);
  return os.str();
}

// Reads DIMACS CNF. Tautological clauses are dropped (they constrain nothing).
inline CnfFormula read_dimacs(std::istream& in) {
  CnfFormula f;
  std::string line;
  bool header = false;
  std::size_t declared = 0;
  std::size_t line_no = 0;
  std::vector<Literal> cur;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    if (line[i] == 'c') continue;
    if (line[i] == '%') break;
    std::istringstream ls(line.substr(i));
    if (line[i] == 'p') {
      std::string p, fmt;
      long long nv = -1, nc = -1;
      ls >> p >> fmt >> nv >> nc;
      if (header || fmt != "cnf" || nv < 0 || nc < 0)
        throw ParseError(line_no, i + 1, "bad DIMACS header");
      header = true;
      f.ensure_vars(static_cast<std::int32_t>(nv));
      declared = static_cast<std::size_t>(nc);
      continue;
    }
    if (!header) throw ParseError(line_no, i + 1, "clause before DIMACS header");
    long long l = 0;
    while (ls >> l) {
      if (l == 0) {
        if (cur.empty()) throw ParseError(line_no, i + 1, "empty clause");
        std::vector<Literal> sorted = cur;
        std::sort(sorted.begin(), sorted.end());
        bool taut = false;
        for (Literal x : sorted)
          if (x > 0 && std::binary_search(sorted.begin(), sorted.end(), -x)) taut = true;
        if (!taut) f.add_clause(cur);
        cur.clear();
      } else {
        if (std::llabs(l) > f.num_vars())
          throw ParseError(line_no, i + 1, "literal " + std::to_string(l) + " out of range");
        cur.push_back(static_cast<Literal>(l));
      }
    }
    if (!ls.eof()) throw ParseError(line_no, i + 1, "unexpected token in clause");
  }
  if (!header) throw ParseError(line_no ? line_no : 1, 1, "missing DIMACS header");
  if (!cur.empty()) throw ParseError(line_no, 1, "unterminated clause");
  (void)declared;
  return f;
}

}  // namespace qpomdp
