#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpstest/abstraction.hpp"
#include "cpstest/dsl.hpp"
#include "cpstest/ltl.hpp"
#include "cpstest/monitor.hpp"
#include "cpstest/sim.hpp"
#include "cpstest/util.hpp"

namespace cpstest::fuzz {

struct FuzzInput {
  dsl::Scenario scenario;
  std::vector<sim::Event> word;

  // Stable content hash (canonical scenario text + event texts).
  std::uint64_t hash() const;
};

enum class Traversal { kDfs, kBfs, kRandomWalk };

const char* to_string(Traversal t);
Traversal traversal_from_string(const std::string& s);

// Mutation operators, each with a weight in FuzzConfig::weights:
//   perturb_numeric, flip_enum, insert_event, delete_event,
//   replace_event, swap_events
std::map<std::string, double> default_mutation_weights();

struct FuzzConfig {
  std::uint64_t budget_execs = 1000;
  std::uint64_t rng_seed = 1;
  Traversal traversal = Traversal::kRandomWalk;
  std::map<std::string, double> weights = default_mutation_weights();
  bool stop_on_first = false;
  int monitor_depth = 10;
  // Event kinds mutations may introduce; actor ids come from the scenario.
  std::vector<sim::EventKind> allowed_events{
      sim::EventKind::kNone, sim::EventKind::kNpcBrake,
      sim::EventKind::kPedCross, sim::EventKind::kRainOn,
      sim::EventKind::kRainOff};

  void check() const;
};

struct CorpusEntry {
  FuzzInput input;
  std::size_t novelty = 0;             // new states+transitions at commit
  std::uint64_t discovery_iteration = 0;
  std::uint64_t input_hash = 0;
  int final_depth = 0;                 // progression steps in its run
  std::vector<int> path_states;        // monitor states along its run
};

struct Counterexample {
  FuzzInput input;
  std::uint64_t discovery_iteration = 0;
  std::uint64_t input_hash = 0;
  std::vector<std::string> residue_path;  // initial .. violated, canonical
};

struct CoverageMap {
  std::set<int> states_hit;
  std::set<std::tuple<int, std::uint64_t, int>> transitions_hit;
};

struct FuzzReport {
  FuzzConfig config;
  std::string formula_text;
  std::uint64_t executions = 0;
  std::uint64_t skipped = 0;
  double states_pct = 0.0;
  double transitions_pct = 0.0;
  std::size_t states_hit = 0;
  std::size_t states_total = 0;
  std::size_t transitions_hit = 0;
  std::size_t transitions_total = 0;
  std::vector<Counterexample> counterexamples;

  std::string to_json() const;
};

// Applies exactly one weighted-random operator; retries up to 8 times
// until the result passes semantic validation, else returns the input
// unchanged. `alphabet` lists the events insert/replace may introduce.
FuzzInput mutate(const FuzzInput& input, Rng& rng,
                 const std::map<std::string, double>& weights,
                 const std::vector<sim::Event>& alphabet, int max_steps);

// Selection policies over the corpus (see FuzzConfig::traversal):
// dfs favors the deepest final residue, bfs the entry nearest an
// unexplored monitor transition, random_walk samples uniformly. Ties
// break by discovery iteration, then input hash.
const CorpusEntry& select_next(const std::vector<CorpusEntry>& corpus,
                               const monitor::MonitorAutomaton& m,
                               const std::set<std::uint64_t>& observed_letters,
                               Traversal traversal, Rng& rng);

class ReplayMismatch : public std::runtime_error {
 public:
  explicit ReplayMismatch(const std::string& what)
      : std::runtime_error(what) {}
};

struct ReplayResult {
  sim::Trace trace;
  std::vector<std::string> residue_path;
  monitor::Classification final_class = monitor::Classification::kPending;
};

ReplayResult replay(const FuzzInput& input, const ltl::FormulaPtr& phi,
                    const abstraction::PredicateSet& predicates,
                    const sim::SimConfig& sim_cfg);

// Coverage-guided loop: seeds execute first, then select-mutate-execute
// until the budget is spent (or the first counterexample with
// stop_on_first). Executions run in `workers` threads in fixed logical
// batches with results committed in iteration order, so the report is
// byte-identical for any worker count. Every reported counterexample is
// replay-verified before the report is returned.
FuzzReport fuzz(const std::vector<FuzzInput>& seed_corpus,
                const ltl::FormulaPtr& phi,
                const abstraction::PredicateSet& predicates,
                const FuzzConfig& cfg, const sim::SimConfig& sim_cfg,
                int workers = 1);

}  // namespace cpstest::fuzz
