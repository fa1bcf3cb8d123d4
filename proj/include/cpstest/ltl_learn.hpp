#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpstest/abstraction.hpp"
#include "cpstest/ltl.hpp"
#include "cpstest/sat.hpp"

namespace cpstest::ltlsat {

struct TraceSample {
  std::vector<abstraction::LabeledTrace> positives;
  std::vector<abstraction::LabeledTrace> negatives;
  std::vector<std::string> atom_names;

  // Nonempty traces, disjoint letter sequences, shared predicate set.
  void check() const;
};

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

// CNF whose models are the syntax DAGs with at most n nodes (children
// point strictly downward, node n is the root) that hold at position 0 of
// every positive trace and fail at position 0 of every negative one.
// Returns the encoding together with the variable layout needed to decode.
struct Encoding {
  sat::Cnf cnf;
  int size = 0;
  int num_ops = 0;
  // var ids
  int label_base = 0;  // x[i][op] = label_base + (i-1)*num_ops + op
  int left_base = 0;   // l[i][j] = left_base + pair_index(i, j)
  int right_base = 0;
};

Encoding encode(int n, const TraceSample& sample);

// Reads the structural variables back into a formula and verifies it
// against the sample; inconsistent structures raise DecodeError.
ltl::FormulaPtr decode(const sat::Assignment& a, const Encoding& enc,
                       const TraceSample& sample);

// Smallest-size-first search: first satisfiable n in 1..max_size wins.
std::optional<ltl::FormulaPtr> learn_minimal(const TraceSample& sample,
                                             int max_size);

// Direct finite-trace check used by the decode post-verification.
bool consistent_with(const ltl::FormulaPtr& f, const TraceSample& sample);

}  // namespace cpstest::ltlsat
