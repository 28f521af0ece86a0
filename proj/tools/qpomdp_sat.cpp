// DIMACS in, SAT-competition answer out. Exit 10 on SAT, 20 on UNSAT.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qpomdp/cnf.hpp"
#include "qpomdp/sat/cdcl.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Embedded CDCL solver on a DIMACS file"};
  std::string path;
  qpomdp::sat::Options opts;
  app.add_option("file", path, "DIMACS CNF file")->required();
  app.add_option("--seed", opts.seed, "random seed");
  app.add_option("--conflict-budget", opts.conflict_budget, "give up after N conflicts");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "c cannot open " << path << '\n';
      return 1;
    }
    const auto f = qpomdp::read_dimacs(in);
    const auto out = qpomdp::solve_embedded(f, opts);
    switch (out.status) {
      case qpomdp::SatStatus::kSat: {
        std::cout << "s SATISFIABLE\n";
        std::string line = "v";
        for (qpomdp::Var v = 1; v <= f.num_vars(); ++v) {
          line += ' ' + std::to_string(out.model[v] ? v : -v);
          if (line.size() > 70) {
            std::cout << line << '\n';
            line = "v";
          }
        }
        std::cout << line << " 0\n";
        return 10;
      }
      case qpomdp::SatStatus::kUnsat:
        std::cout << "s UNSATISFIABLE\n";
        return 20;
      case qpomdp::SatStatus::kUnknown:
        std::cout << "s UNKNOWN\n";
        return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "c error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
