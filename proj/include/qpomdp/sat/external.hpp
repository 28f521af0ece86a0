#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "qpomdp/cnf.hpp"
#include "qpomdp/error.hpp"
#include "qpomdp/sat/outcome.hpp"

namespace qpomdp {

// Parses SAT-competition output ("s ..." status line, "v ..." model lines)
// for a formula over num_vars variables.
inline SatOutcome parse_competition_output(std::string_view text, std::int32_t num_vars) {
  SatOutcome out;
  bool have_status = false;
  bool terminated = false;
  std::vector<signed char> seen(static_cast<std::size_t>(num_vars) + 1, 0);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == 's') {
      if (line.find("UNSATISFIABLE") != std::string::npos)
        out.status = SatStatus::kUnsat;
      else if (line.find("SATISFIABLE") != std::string::npos)
        out.status = SatStatus::kSat;
      else if (line.find("UNKNOWN") != std::string::npos)
        out.status = SatStatus::kUnknown;
      else
        throw SolverError("unparsable status line: " + line);
      have_status = true;
    } else if (line[0] == 'v') {
      std::istringstream ls(line.substr(1));
      long long l = 0;
      while (ls >> l) {
        if (l == 0) {
          terminated = true;
          continue;
        }
        const long long v = l < 0 ? -l : l;
        if (v > num_vars) throw SolverError("model mentions variable " + std::to_string(v));
        seen[static_cast<std::size_t>(v)] = l > 0 ? 1 : -1;
      }
      if (!ls.eof()) throw SolverError("unparsable model line: " + line);
    }
  }
  if (!have_status) throw SolverError("solver output has no status line");
  if (out.status == SatStatus::kSat) {
    for (std::int32_t v = 1; v <= num_vars; ++v)
      if (seen[static_cast<std::size_t>(v)] == 0)
        throw SolverError("model incomplete: variable " + std::to_string(v) + " missing");
    if (!terminated) throw SolverError("model incomplete: missing terminating 0");
    out.model.assign(static_cast<std::size_t>(num_vars) + 1, false);
    for (std::int32_t v = 1; v <= num_vars; ++v) out.model[v] = seen[v] > 0;
  }
  return out;
}

namespace detail {

inline std::filesystem::path temp_cnf_path() {
  static std::atomic<unsigned> counter{0};
  return std::filesystem::temp_directory_path() /
         ("qpomdp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".cnf");
}

}  // namespace detail

// Runs an external DIMACS solver. In the command template "{}" is replaced by
// the formula path; without it the path is appended. The returned model is
// re-validated against the formula.
inline SatOutcome solve_external(const CnfFormula& f, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto path = detail::temp_cnf_path();
  {
    std::ofstream os(path);
    if (!os) throw SolverError("cannot write " + path.string());
    write_dimacs(os, f);
  }
  std::string cmd = command;
  if (auto pos = cmd.find("{}"); pos != std::string::npos)
    cmd.replace(pos, 2, path.string());
  else
    cmd += " " + path.string();

  std::string output;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(path);
    throw SolverError("cannot start solver: " + cmd);
  }
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = ::pclose(pipe);
  std::error_code ec;
  std::filesystem::remove(path, ec);

  if (status == -1) throw SolverError("solver process failed: " + cmd);
  if (WIFSIGNALED(status)) throw SolverError("solver killed by signal: " + cmd);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (code != 0 && code != 10 && code != 20)
    throw SolverError("solver exited with status " + std::to_string(code) + ": " + cmd);

  SatOutcome out = parse_competition_output(output, f.num_vars());
  if (out.sat()) {
    if (auto bad = first_falsified_clause(f, out.model))
      throw SolverError("model fails validation: clause " + std::to_string(*bad) +
                        " is falsified");
  }
  out.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace qpomdp
