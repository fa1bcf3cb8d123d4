#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpstest/abstraction.hpp"
#include "cpstest/ltl.hpp"

namespace cpstest::monitor {

enum class Classification { kViolated, kSatisfied, kPending };

const char* to_string(Classification c);

// One step of formula progression against a letter; result canonicalized.
// Residue false means the prefix read so far is a bad prefix; residue true
// means every extension satisfies the formula.
ltl::FormulaPtr progress(const ltl::FormulaPtr& f, std::uint64_t letter);

Classification classify(const ltl::FormulaPtr& residue);

// Deterministic automaton over progression residues, built lazily. State
// identity is the canonical formula text. Thread-safe: insertion is
// insert-if-absent under a mutex, so concurrent monitor_run calls merge.
class MonitorAutomaton {
 public:
  explicit MonitorAutomaton(const ltl::FormulaPtr& phi);

  int initial_state() const { return 0; }
  int state_of(const ltl::FormulaPtr& residue);  // interns
  int transition(int state, std::uint64_t letter);  // progress + intern

  Classification classification(int state) const;
  const ltl::FormulaPtr& residue(int state) const;
  std::string state_text(int state) const;

  int num_states() const;
  // (from, letter, to) triples in insertion-independent sorted order.
  std::vector<std::tuple<int, std::uint64_t, int>> transitions() const;

  std::string to_dot() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ltl::FormulaPtr> residues_;
  std::vector<Classification> classes_;
  std::map<std::string, int> index_;  // canonical text -> state
  std::map<std::pair<int, std::uint64_t>, int> transitions_;
};

struct MonitorRunResult {
  int final_state = 0;
  Classification final_class = Classification::kPending;
  std::vector<int> visited_states;  // in visit order, including initial
  std::vector<std::tuple<int, std::uint64_t, int>> visited_transitions;
};

// Folds progress over the letters from the initial state, recording every
// state and transition; stops early once violated or satisfied.
MonitorRunResult monitor_run(MonitorAutomaton& m,
                             const std::vector<std::uint64_t>& letters);

class StateExplosion : public std::runtime_error {
 public:
  StateExplosion(std::string what, std::vector<std::string> partial)
      : std::runtime_error(std::move(what)), partial_states(std::move(partial)) {}
  std::vector<std::string> partial_states;
};

struct ReachableSet {
  std::vector<std::string> states;  // canonical residue texts
  std::vector<std::tuple<std::string, std::uint64_t, std::string>> transitions;
};

// Breadth-first closure of progress over all 2^num_predicates letters up
// to max_depth; the denominator for coverage. Throws StateExplosion with
// the partial set when the state cap is exceeded.
ReachableSet reachable_state_bound(const ltl::FormulaPtr& phi,
                                   int num_predicates, int max_depth,
                                   std::size_t state_cap = 10000);

}  // namespace cpstest::monitor
