#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace cpstest::sat {

// DIMACS-style literals: +v / -v, variables 1..num_vars.
using Lit = int;
using Clause = std::vector<Lit>;

struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;

  int new_var() { return ++num_vars; }
  void add_clause(Clause c);

  // Clause well-formedness: nonzero literals within num_vars.
  void check() const;
};

struct Assignment {
  std::vector<bool> values;  // index 1..num_vars

  bool value(int var) const { return values[static_cast<std::size_t>(var)]; }
};

// True iff every clause has a literal satisfied by `a`. Kept trivially
// simple on purpose: it is the independent check applied to every sat
// answer.
bool verify(const Cnf& cnf, const Assignment& a);

// Conflict-driven solver: unit propagation with two watched literals,
// first-UIP clause learning with backjumping, Luby restarts (base 64
// conflicts) and a deterministic activity heuristic.
std::optional<Assignment> solve(const Cnf& cnf);

}  // namespace cpstest::sat
