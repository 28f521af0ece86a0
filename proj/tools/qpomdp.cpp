// Command-line front end: solve, encode, verify, gen, baseline.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qpomdp/qpomdp.hpp"

namespace {

using namespace qpomdp;

constexpr int kExitError = 3;
constexpr int kExitSolverError = 4;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

Cell parse_cell(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error("expected x,y but got '" + s + "'");
  try {
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error("expected x,y but got '" + s + "'");
  }
}

// "x,y;x,y;..."
std::vector<Cell> parse_cells(const std::string& s) {
  std::vector<Cell> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(parse_cell(item));
  return out;
}

struct Common {
  std::string pomdp;
  bool strict = false;
  Pomdp load() const { return parse_pomdp(slurp(pomdp), {strict}); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Almost-sure reachability for POMDPs via SAT"};
  app.require_subcommand(1);

  // solve
  Common solve_in;
  SolveConfig cfg;
  int mu = 0;
  int k = 0;
  std::vector<int> schedule;
  std::string backend = "embedded";
  std::string strategy_out, report_out;
  bool forward_only = false;
  auto* solve_cmd = app.add_subcommand("solve", "search for a winning small-memory strategy");
  solve_cmd->add_option("--pomdp", solve_in.pomdp, "model file")->required();
  solve_cmd->add_flag("--strict", solve_in.strict, "reject a non-absorbing goal instead of repairing it");
  auto* mu_opt = solve_cmd->add_option("--mu", mu, "fixed memory size");
  solve_cmd->add_option("--mu-max", cfg.mu_max, "search memory sizes 1..N")->excludes(mu_opt);
  auto* k_opt = solve_cmd->add_option("--k", k, "single path-length bound");
  solve_cmd->add_option("--k-schedule", schedule, "explicit bounds, comma separated")
      ->delimiter(',')
      ->excludes(k_opt);
  solve_cmd->add_flag("--deterministic", cfg.deterministic, "singleton supports only");
  solve_cmd->add_flag("--memoryless", cfg.memoryless, "one action support per observation");
  solve_cmd->add_flag("--forward-only", forward_only, "omit the reverse half of path definitions");
  solve_cmd->add_option("--backend", backend, "embedded or external:<command>");
  solve_cmd->add_option("--seed", cfg.seed, "solver seed");
  solve_cmd->add_option("--conflict-budget", cfg.conflict_budget, "give up after N conflicts per call");
  solve_cmd->add_option("--out", strategy_out, "write the strategy here");
  solve_cmd->add_option("--json-report", report_out, "write a JSON report here");

  // encode
  Common enc_in;
  EncodeParams ep;
  bool enc_memoryless = false, enc_forward_only = false;
  std::string dimacs_out;
  auto* enc_cmd = app.add_subcommand("encode", "write the formula in DIMACS");
  enc_cmd->add_option("--pomdp", enc_in.pomdp, "model file")->required();
  enc_cmd->add_flag("--strict", enc_in.strict, "reject a non-absorbing goal");
  enc_cmd->add_option("--k", ep.k, "path-length bound")->required();
  enc_cmd->add_option("--mu", ep.mu, "memory size");
  enc_cmd->add_flag("--memoryless", enc_memoryless, "observation-based encoding");
  enc_cmd->add_flag("--deterministic", ep.deterministic, "add exactly-one constraints");
  enc_cmd->add_flag("--forward-only", enc_forward_only, "omit the reverse half of path definitions");
  enc_cmd->add_option("--dimacs-out,--out", dimacs_out, "output file (default stdout)");

  // verify
  Common ver_in;
  std::string strategy_path;
  auto* ver_cmd = app.add_subcommand("verify", "check a strategy file against a model");
  ver_cmd->add_option("--pomdp", ver_in.pomdp, "model file")->required();
  ver_cmd->add_flag("--strict", ver_in.strict, "reject a non-absorbing goal");
  ver_cmd->add_option("--strategy", strategy_path, "strategy file")->required();

  // baseline
  Common base_in;
  std::size_t node_cap = std::size_t{1} << 22;
  std::string dump_out;
  auto* base_cmd = app.add_subcommand("baseline", "explicit belief-support algorithm");
  base_cmd->add_option("--pomdp", base_in.pomdp, "model file")->required();
  base_cmd->add_flag("--strict", base_in.strict, "reject a non-absorbing goal");
  base_cmd->add_option("--node-cap", node_cap, "give up beyond this many belief supports");
  base_cmd->add_option("--dump", dump_out, "write the belief-support MDP here");

  // gen
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "generate a benchmark model");
  gen_cmd->require_subcommand(1);
  gen_cmd->add_option("--out", gen_out, "output file (default stdout)");
  gen_cmd->fallthrough();

  HallwayParams hp;
  std::string hw_goal, hw_init, hw_barriers, hw_traps;
  auto* hw_cmd = gen_cmd->add_subcommand("hallway", "grid navigation with heading");
  hw_cmd->add_option("--width", hp.width);
  hw_cmd->add_option("--height", hp.height);
  hw_cmd->add_option("--goal", hw_goal, "x,y");
  hw_cmd->add_option("--init", hw_init, "x,y;x,y;...");
  hw_cmd->add_option("--barriers", hw_barriers, "x,y;x,y;...");
  hw_cmd->add_option("--traps", hw_traps, "x,y;x,y;...");
  hw_cmd->add_option("--fail", hp.fail, "action failure probability");

  EscapeParams xp;
  std::string x_robot, x_agent;
  auto* esc_cmd = gen_cmd->add_subcommand("escape", "avoid a randomly moving agent");
  esc_cmd->add_option("--n", xp.n, "grid side");
  esc_cmd->add_option("--robot", x_robot, "x,y");
  esc_cmd->add_option("--agent", x_agent, "x,y");
  esc_cmd->add_option("--escape", xp.escape, "per-step exit probability");

  RockSampleParams rp;
  std::string rs_rocks, rs_types, rs_start;
  auto* rs_cmd = gen_cmd->add_subcommand("rocksample", "collect two good samples");
  rs_cmd->add_option("--n", rp.n, "rock count");
  rs_cmd->add_option("--rocks", rs_rocks, "x,y;x,y;...");
  rs_cmd->add_option("--types", rs_types, "one of g, b, u per rock, e.g. gbu");
  rs_cmd->add_option("--min-good", rp.min_good, "fewest good rocks in any typing");
  rs_cmd->add_option("--start", rs_start, "x,y");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      const Pomdp p = solve_in.load();
      if (*mu_opt) cfg.mu = mu;
      if (k > 0) cfg.k_schedule = {k};
      if (!schedule.empty()) cfg.k_schedule.assign(schedule.begin(), schedule.end());
      if (*k_opt && k < 1) throw Error("k must be at least 1");
      cfg.backend = Backend::parse(backend);
      cfg.reverse_implications = !forward_only;
      const SolveReport rep = solve(p, cfg);
      for (MemId m : rep.refuted)
        if (rep.verdict != Verdict::kNoStrategy || m != rep.mu) std::cout << "NO-STRATEGY(" << m << ")\n";
      std::cout << rep.summary() << '\n';
      if (rep.strategy) {
        const std::string text = to_text(p, *rep.strategy);
        if (!strategy_out.empty()) emit(strategy_out, text);
      }
      if (!report_out.empty()) emit(report_out, to_json(rep).dump(2) + "\n");
      return exit_code(rep.verdict);
    }
    if (*enc_cmd) {
      const Pomdp p = enc_in.load();
      ep.strategy_class = enc_memoryless ? StrategyClass::kMemoryless : StrategyClass::kSmallMemory;
      ep.reverse_implications = !enc_forward_only;
      const Encoding e = encode(p, ep);
      emit(dimacs_out, to_dimacs(e.cnf, &e.vars));
      std::cerr << "vars " << e.cnf.num_vars() << " clauses " << e.cnf.num_clauses() << '\n';
      return 0;
    }
    if (*ver_cmd) {
      const Pomdp p = ver_in.load();
      const auto sigma = parse_strategy(slurp(strategy_path), p);
      const auto r = verify_almost_sure(p, sigma);
      if (r.winning) {
        std::cout << "WINNING\n";
        return 0;
      }
      std::cout << "NOT-WINNING counterexample (" << p.state_name(r.counterexample->state) << ", m"
                << r.counterexample->memory << ")\n";
      return 1;
    }
    if (*base_cmd) {
      const Pomdp p = base_in.load();
      const auto m = build_belief_support(p, node_cap);
      const auto win = mdp_almost_sure_reach(p, m);
      if (!dump_out.empty()) {
        std::ostringstream os;
        write_belief_support(os, p, m);
        emit(dump_out, os.str());
      }
      std::cout << (win[0] ? "WINNING" : "NOT-WINNING") << " (" << m.nodes.size()
                << " belief supports)\n";
      return win[0] ? 0 : 1;
    }
    if (*gen_cmd) {
      Pomdp p = [&] {
        if (*hw_cmd) {
          if (!hw_goal.empty()) hp.goal = parse_cell(hw_goal);
          if (!hw_init.empty()) hp.initial = parse_cells(hw_init);
          for (Cell c : parse_cells(hw_barriers)) hp.barriers.insert(c);
          for (Cell c : parse_cells(hw_traps)) hp.traps.insert(c);
          return gen_hallway(hp);
        }
        if (*esc_cmd) {
          if (!x_robot.empty()) xp.robot = parse_cell(x_robot);
          if (!x_agent.empty()) xp.agent = parse_cell(x_agent);
          return gen_escape(xp);
        }
        if (!rs_rocks.empty()) rp.rocks = parse_cells(rs_rocks);
        if (!rs_start.empty()) rp.start = parse_cell(rs_start);
        for (char c : rs_types) {
          if (c == 'g') rp.types.push_back(RockType::kGood);
          else if (c == 'b') rp.types.push_back(RockType::kBad);
          else if (c == 'u') rp.types.push_back(RockType::kUnknown);
          else throw Error(std::string("unknown rock type '") + c + "'");
        }
        return gen_rocksample(rp);
      }();
      emit(gen_out, to_text(p));
      return 0;
    }
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
