#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"

namespace qpomdp {

struct Cell {
  std::int32_t x = 0;
  std::int32_t y = 0;  // y grows southwards
  auto operator<=>(const Cell&) const = default;
};

namespace detail {

// Incremental model assembly with named states and observations. Repeated
// successors in one row are merged.
class ModelBuilder {
 public:
  explicit ModelBuilder(std::vector<std::string> actions) { d_.actions = std::move(actions); }

  StateId state(const std::string& name, const std::string& obs) {
    auto [it, fresh] = states_.emplace(name, static_cast<StateId>(d_.states.size()));
    if (fresh) {
      d_.states.push_back(name);
      d_.obs_of.push_back(observation(obs));
      rows_.emplace_back(d_.actions.size());
    }
    return it->second;
  }

  void add(StateId s, ActionId a, StateId t, double pr) {
    if (pr <= 0) return;
    rows_[s][a][t] += pr;
  }

  Pomdp finish(StateId initial, StateId goal) {
    d_.initial = initial;
    d_.goal = goal;
    d_.trans.assign(d_.states.size() * d_.actions.size(), {});
    for (StateId s = 0; s < d_.states.size(); ++s)
      for (ActionId a = 0; a < d_.actions.size(); ++a)
        for (auto [t, pr] : rows_[s][a]) d_.trans[s * d_.actions.size() + a].push_back({t, pr});
    return Pomdp::create(std::move(d_));
  }

 private:
  ObsId observation(const std::string& name) {
    auto [it, fresh] = obs_.emplace(name, static_cast<ObsId>(d_.observations.size()));
    if (fresh) d_.observations.push_back(name);
    return it->second;
  }

  PomdpDraft d_;
  std::unordered_map<std::string, StateId> states_;
  std::unordered_map<std::string, ObsId> obs_;
  std::vector<std::vector<std::map<StateId, double>>> rows_;
};

inline std::string cell_name(Cell c) { return std::to_string(c.x) + "_" + std::to_string(c.y); }

// N, E, S, W
inline constexpr std::array<Cell, 4> kDirs{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};
inline constexpr std::array<char, 4> kDirNames{'N', 'E', 'S', 'W'};

}  // namespace detail

// ---------------------------------------------------------------- Hallway

struct HallwayParams {
  std::int32_t width = 3;
  std::int32_t height = 3;
  std::set<Cell> barriers;
  std::set<Cell> traps;
  Cell goal{1, 2};
  std::vector<Cell> initial{{0, 0}, {1, 0}};
  double fail = 0.1;
};

inline void check(const HallwayParams& p) {
  if (p.width < 1 || p.height < 1) throw ModelError("grid must be at least 1x1");
  auto inside = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < p.width && c.y < p.height; };
  if (!(p.fail > 0 && p.fail < 1)) throw ModelError("failure probability must lie in (0,1)");
  if (!inside(p.goal)) throw ModelError("goal outside the grid");
  if (p.barriers.count(p.goal) || p.traps.count(p.goal)) throw ModelError("goal on a barrier or trap");
  if (p.initial.empty()) throw ModelError("initial region is empty");
  for (Cell c : p.initial)
    if (!inside(c) || p.barriers.count(c) || p.traps.count(c))
      throw ModelError("initial cell " + detail::cell_name(c) + " is not free");
  for (const auto* set : {&p.barriers, &p.traps})
    for (Cell c : *set)
      if (!inside(c)) throw ModelError("cell " + detail::cell_name(c) + " outside the grid");
}

// States are (cell, heading) for every free cell. Observations are the walls
// in front, right, behind and left. Traps look like open floor.
inline Pomdp gen_hallway(const HallwayParams& hp) {
  check(hp);
  using detail::kDirNames;
  using detail::kDirs;
  auto inside = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < hp.width && c.y < hp.height; };
  auto wall = [&](Cell c) { return !inside(c) || hp.barriers.count(c) > 0; };
  auto step = [](Cell c, int d) { return Cell{c.x + kDirs[d].x, c.y + kDirs[d].y}; };

  detail::ModelBuilder b({"forward", "turn_left", "turn_right"});
  const StateId init = b.state("start", "start");
  auto pose = [&](Cell c, int d) {
    std::string obs = "w";
    for (int r = 0; r < 4; ++r) obs += wall(step(c, (d + r) % 4)) ? '1' : '0';
    return b.state("c" + detail::cell_name(c) + "_" + kDirNames[d], obs);
  };
  const StateId lose = b.state("lose", "lost");
  const StateId goal = b.state("goal", "goal");

  for (std::int32_t y = 0; y < hp.height; ++y)
    for (std::int32_t x = 0; x < hp.width; ++x) {
      const Cell c{x, y};
      if (wall(c) || hp.traps.count(c)) continue;
      for (int d = 0; d < 4; ++d) {
        const StateId s = pose(c, d);
        if (c == hp.goal) {
          for (ActionId a = 0; a < 3; ++a) b.add(s, a, goal, 1.0);
          continue;
        }
        const Cell f = step(c, d);
        StateId fwd = s;
        if (hp.traps.count(f))
          fwd = lose;
        else if (!wall(f))
          fwd = pose(f, d);
        b.add(s, 0, fwd, 1.0 - hp.fail);
        b.add(s, 0, s, hp.fail);
        b.add(s, 1, pose(c, (d + 3) % 4), 1.0 - hp.fail);
        b.add(s, 1, s, hp.fail);
        b.add(s, 2, pose(c, (d + 1) % 4), 1.0 - hp.fail);
        b.add(s, 2, s, hp.fail);
      }
    }
  const double share = 1.0 / static_cast<double>(hp.initial.size());
  for (ActionId a = 0; a < 3; ++a) {
    for (Cell c : hp.initial) b.add(init, a, c == hp.goal ? goal : pose(c, 2), share);
    b.add(lose, a, lose, 1.0);
    b.add(goal, a, goal, 1.0);
  }
  return b.finish(init, goal);
}

// ---------------------------------------------------------------- RockSample

enum class RockType { kUnknown, kGood, kBad };

struct RockSampleParams {
  std::int32_t n = 2;
  std::vector<Cell> rocks;       // defaults to a fixed layout when empty
  std::vector<RockType> types;   // defaults to all unknown
  std::int32_t min_good = 2;     // only typings with this many good rocks are possible
  Cell start{0, 0};
};

inline std::vector<Cell> default_rock_layout(std::int32_t n) {
  static const std::vector<Cell> order{{1, 1}, {1, 0}, {2, 2}, {0, 2}, {2, 0}, {2, 1}, {1, 2}, {0, 1}};
  if (n < 0 || n > static_cast<std::int32_t>(order.size())) throw ModelError("rock count out of range");
  return {order.begin(), order.begin() + n};
}

// 3x3 grid. The rover sees its position and the type of a rock on its cell.
// A state holds position, rock typing and which good rock, if any, currently
// holds a sample; a second good sample ends in the goal.
inline Pomdp gen_rocksample(RockSampleParams rp) {
  constexpr std::int32_t kSide = 3;
  if (rp.n < 2) throw ModelError("RockSample needs at least two rocks");
  if (rp.n > 12) throw ModelError("too many rocks");
  if (rp.rocks.empty()) rp.rocks = default_rock_layout(rp.n);
  if (rp.types.empty()) rp.types.assign(static_cast<std::size_t>(rp.n), RockType::kUnknown);
  if (static_cast<std::int32_t>(rp.rocks.size()) != rp.n || static_cast<std::int32_t>(rp.types.size()) != rp.n)
    throw ModelError("rock positions and types must list n entries");
  auto inside = [](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < kSide && c.y < kSide; };
  if (!inside(rp.start)) throw ModelError("start outside the grid");
  std::map<Cell, std::int32_t> rock_at;
  for (std::int32_t i = 0; i < rp.n; ++i) {
    if (!inside(rp.rocks[i])) throw ModelError("rock outside the grid");
    if (!rock_at.emplace(rp.rocks[i], i).second) throw ModelError("rock positions must be distinct");
  }

  std::vector<std::uint32_t> typings;  // bit i set = rock i good
  for (std::uint32_t t = 0; t < (1u << rp.n); ++t) {
    bool ok = std::popcount(t) >= rp.min_good;
    for (std::int32_t i = 0; i < rp.n && ok; ++i) {
      const bool good = t >> i & 1u;
      if ((rp.types[i] == RockType::kGood && !good) || (rp.types[i] == RockType::kBad && good)) ok = false;
    }
    if (ok) typings.push_back(t);
  }
  if (typings.empty()) throw ModelError("no rock typing satisfies the constraints");

  detail::ModelBuilder b({"north", "east", "south", "west", "sample"});
  const StateId init = b.state("start", "start");
  const StateId lose = b.state("lose", "lost");
  const StateId goal = b.state("goal", "goal");
  auto obs_at = [&](Cell c, std::uint32_t t) {
    std::string o = "p" + detail::cell_name(c);
    if (auto it = rock_at.find(c); it != rock_at.end()) o += (t >> it->second & 1u) ? "_good" : "_bad";
    return o;
  };
  // held = index of the good rock holding a sample, or -1
  auto node = [&](Cell c, std::uint32_t t, std::int32_t held) {
    std::string name = "r" + detail::cell_name(c) + "_t";
    for (std::int32_t i = 0; i < rp.n; ++i) name += (t >> i & 1u) ? 'g' : 'b';
    name += held < 0 ? std::string("_none") : "_s" + std::to_string(held);
    return b.state(name, obs_at(c, t));
  };

  for (std::uint32_t t : typings)
    for (std::int32_t held = -1; held < rp.n; ++held) {
      if (held >= 0 && !(t >> held & 1u)) continue;
      for (std::int32_t y = 0; y < kSide; ++y)
        for (std::int32_t x = 0; x < kSide; ++x) {
          const Cell c{x, y};
          const StateId s = node(c, t, held);
          for (int d = 0; d < 4; ++d) {
            const Cell f{c.x + detail::kDirs[d].x, c.y + detail::kDirs[d].y};
            b.add(s, static_cast<ActionId>(d), inside(f) ? node(f, t, held) : s, 1.0);
          }
          const auto it = rock_at.find(c);
          if (it == rock_at.end()) {
            b.add(s, 4, s, 1.0);
          } else if (!(t >> it->second & 1u)) {
            b.add(s, 4, lose, 1.0);
          } else if (held == it->second) {
            b.add(s, 4, s, 0.5);
            b.add(s, 4, node(c, t, -1), 0.5);
          } else if (held >= 0) {
            b.add(s, 4, goal, 1.0);
          } else {
            b.add(s, 4, node(c, t, it->second), 1.0);
          }
        }
    }
  const double share = 1.0 / static_cast<double>(typings.size());
  for (ActionId a = 0; a < 5; ++a) {
    for (std::uint32_t t : typings) b.add(init, a, node(rp.start, t, -1), share);
    b.add(lose, a, lose, 1.0);
    b.add(goal, a, goal, 1.0);
  }
  return b.finish(init, goal);
}

// ---------------------------------------------------------------- Escape

struct EscapeParams {
  std::int32_t n = 3;
  Cell agent{2, 2};
  Cell robot{0, 0};
  double escape = 0.1;  // per-step probability of the safe exit to the goal
};

inline void check(const EscapeParams& p) {
  if (p.n < 3) throw ModelError("Escape grid side must be at least 3");
  auto inside = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < p.n && c.y < p.n; };
  if (!inside(p.agent) || !inside(p.robot)) throw ModelError("initial cell outside the grid");
  if (p.agent == p.robot) throw ModelError("robot and agent must start apart");
  if (!(p.escape > 0 && p.escape < 1)) throw ModelError("escape probability must lie in (0,1)");
}

// The robot moves first, deterministically, and stays put when it walks into
// a wall. Then the agent steps to a uniformly chosen neighbouring cell. The
// robot is captured when both end on one cell or swap cells. Avoiding capture
// forever becomes reachability through a fixed exit probability taken from
// every safe state.
inline Pomdp gen_escape(const EscapeParams& ep) {
  check(ep);
  const std::int32_t n = ep.n;
  auto inside = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < n && c.y < n; };
  auto step = [](Cell c, int d) { return Cell{c.x + detail::kDirs[d].x, c.y + detail::kDirs[d].y}; };

  detail::ModelBuilder b({"north", "east", "south", "west"});
  auto obs_of = [&](Cell r, Cell g) {
    std::string o = "w";
    for (int d = 0; d < 4; ++d) o += inside(step(r, d)) ? '0' : '1';
    o += "_";
    char seen = '0';
    for (int d = 0; d < 4; ++d)
      if (step(r, d) == g) seen = detail::kDirNames[d];
    return o + seen;
  };
  auto node = [&](Cell r, Cell g) {
    return b.state("r" + detail::cell_name(r) + "_a" + detail::cell_name(g), obs_of(r, g));
  };
  const StateId init = node(ep.robot, ep.agent);
  const StateId caught = b.state("caught", "caught");
  const StateId goal = b.state("goal", "goal");

  for (std::int32_t ry = 0; ry < n; ++ry)
    for (std::int32_t rx = 0; rx < n; ++rx)
      for (std::int32_t gy = 0; gy < n; ++gy)
        for (std::int32_t gx = 0; gx < n; ++gx) {
          const Cell r{rx, ry}, g{gx, gy};
          if (r == g) continue;
          const StateId s = node(r, g);
          for (int a = 0; a < 4; ++a) {
            const Cell r2 = inside(step(r, a)) ? step(r, a) : r;
            b.add(s, static_cast<ActionId>(a), goal, ep.escape);
            const double rest = 1.0 - ep.escape;
            if (r2 == g) {
              b.add(s, static_cast<ActionId>(a), caught, rest);
              continue;
            }
            std::vector<Cell> moves;
            for (int d = 0; d < 4; ++d)
              if (inside(step(g, d))) moves.push_back(step(g, d));
            for (Cell g2 : moves) {
              const double pr = rest / static_cast<double>(moves.size());
              const bool swap = g2 == r && r2 == g;
              b.add(s, static_cast<ActionId>(a), (g2 == r2 || swap) ? caught : node(r2, g2), pr);
            }
          }
        }
  for (ActionId a = 0; a < 4; ++a) {
    b.add(caught, a, caught, 1.0);
    b.add(goal, a, goal, 1.0);
  }
  return b.finish(init, goal);
}

}  // namespace qpomdp
