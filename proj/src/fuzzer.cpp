#include "cpstest/fuzzer.hpp"

#include <algorithm>
#include <limits>
#include <thread>

#include "json.hpp"

namespace cpstest::fuzz {

namespace {
constexpr std::size_t kBatchSize = 16;  // fixed; workers only split batches
}

std::uint64_t FuzzInput::hash() const {
  std::string blob = dsl::serialize_scenario(scenario);
  blob += '\n';
  for (const auto& e : word) {
    blob += sim::to_string(e);
    blob += ',';
  }
  return fnv1a64(blob);
}

const char* to_string(Traversal t) {
  switch (t) {
    case Traversal::kDfs: return "dfs";
    case Traversal::kBfs: return "bfs";
    case Traversal::kRandomWalk: return "random_walk";
  }
  return "?";
}

Traversal traversal_from_string(const std::string& s) {
  if (s == "dfs") return Traversal::kDfs;
  if (s == "bfs") return Traversal::kBfs;
  if (s == "random_walk") return Traversal::kRandomWalk;
  throw std::invalid_argument("unknown traversal '" + s + "'");
}

std::map<std::string, double> default_mutation_weights() {
  return {{"perturb_numeric", 3.0}, {"flip_enum", 1.0},
          {"insert_event", 2.0},    {"delete_event", 1.0},
          {"replace_event", 2.0},   {"swap_events", 1.0}};
}

void FuzzConfig::check() const {
  if (budget_execs < 1) {
    throw std::invalid_argument("fuzz budget must be >= 1");
  }
  double total = 0.0;
  for (const auto& [name, w] : weights) {
    if (w < 0) throw std::invalid_argument("mutation weight must be >= 0");
    total += w;
  }
  if (total <= 0) {
    throw std::invalid_argument("mutation weights must not all be zero");
  }
}

namespace {

// Mutable numeric slots, addressed uniformly for the perturb operator.
struct NumericSlot {
  double* value = nullptr;
  int* int_value = nullptr;
  double min = 0.0;
  double max = dsl::kRoadLength;
};

std::vector<NumericSlot> numeric_slots(dsl::Scenario& s) {
  std::vector<NumericSlot> slots;
  auto add = [&](double* v, double lo, double hi) {
    slots.push_back({v, nullptr, lo, hi});
  };
  add(&s.actors.ego.start_position, 0.0, dsl::kRoadLength);
  add(&s.actors.ego.start_speed, 0.0, dsl::kMaxSpeed);
  for (auto& v : s.actors.vehicles) {
    add(&v.start_position, 0.0, dsl::kRoadLength);
    add(&v.start_speed, 0.0, dsl::kMaxSpeed);
    if (v.behavior != dsl::NpcBehaviorKind::kCruise) {
      slots.push_back({nullptr, &v.behavior_step, 0.0, 300.0});
    }
  }
  for (auto& p : s.actors.pedestrians) {
    add(&p.crossing_position, 0.0, dsl::kRoadLength);
    add(&p.trigger_distance, 0.1, dsl::kRoadLength);
  }
  for (auto& sign : s.road.signs) {
    add(&sign.position, 0.0, dsl::kRoadLength);
    if (sign.kind == dsl::SignKind::kSpeedLimit) {
      add(&sign.limit, 0.1, dsl::kMaxSpeed);
    }
  }
  for (auto& m : s.road.markers) {
    if (m.kind == dsl::MarkerKind::kCrosswalk) {
      add(&m.position, 0.0, dsl::kRoadLength);
    }
  }
  auto add_clauses = [&](std::vector<dsl::OracleClause>& clauses) {
    for (auto& c : clauses) {
      if (c.kind == dsl::OracleKind::kStopAtSign) {
        add(&c.value, 0.0, dsl::kRoadLength);
      } else if (c.kind == dsl::OracleKind::kSpeedBelow) {
        add(&c.value, 0.1, dsl::kMaxSpeed);
      }
    }
  };
  add_clauses(s.oracle.longitudinal);
  add_clauses(s.oracle.lateral);
  return slots;
}

// Enum fields mutations may flip. Controller kind, fault kind, behavior
// kind, sign kind and oracle clause kinds stay fixed: flipping those
// changes the scenario's semantic family, not a parameter of it.
enum class EnumField { kWeather, kTimeOfDay, kRoadType };

bool apply_operator(const std::string& op, FuzzInput& input, Rng& rng,
                    const std::vector<sim::Event>& alphabet, int max_steps) {
  if (op == "perturb_numeric") {
    auto slots = numeric_slots(input.scenario);
    if (slots.empty()) return false;
    NumericSlot& slot = slots[rng.next_below(slots.size())];
    double factor = rng.next_bool() ? 1.1 : 0.9;
    if (slot.value) {
      *slot.value = std::clamp(*slot.value * factor, slot.min, slot.max);
    } else {
      double next = std::clamp(std::round(*slot.int_value * factor),
                               slot.min, slot.max);
      *slot.int_value = static_cast<int>(next);
    }
    return true;
  }
  if (op == "flip_enum") {
    const EnumField fields[] = {EnumField::kWeather, EnumField::kTimeOfDay,
                                EnumField::kRoadType};
    switch (fields[rng.next_below(3)]) {
      case EnumField::kWeather: {
        const dsl::Weather all[] = {dsl::Weather::kClear, dsl::Weather::kRain,
                                    dsl::Weather::kFog};
        dsl::Weather cur = input.scenario.environment.weather;
        dsl::Weather next = all[rng.next_below(3)];
        while (next == cur) next = all[rng.next_below(3)];
        input.scenario.environment.weather = next;
        break;
      }
      case EnumField::kTimeOfDay:
        input.scenario.environment.time_of_day =
            input.scenario.environment.time_of_day == dsl::TimeOfDay::kDay
                ? dsl::TimeOfDay::kNight
                : dsl::TimeOfDay::kDay;
        break;
      case EnumField::kRoadType:
        input.scenario.road.road_type =
            input.scenario.road.road_type == dsl::RoadType::kStraight
                ? dsl::RoadType::kIntersection
                : dsl::RoadType::kStraight;
        break;
    }
    return true;
  }
  if (op == "insert_event") {
    if (alphabet.empty()) return false;
    if (static_cast<int>(input.word.size()) + 1 > max_steps) return false;
    std::size_t pos = rng.next_below(input.word.size() + 1);
    sim::Event e = alphabet[rng.next_below(alphabet.size())];
    input.word.insert(input.word.begin() + pos, e);
    return true;
  }
  if (op == "delete_event") {
    if (input.word.empty()) return false;
    input.word.erase(input.word.begin() + rng.next_below(input.word.size()));
    return true;
  }
  if (op == "replace_event") {
    if (input.word.empty() || alphabet.empty()) return false;
    std::size_t pos = rng.next_below(input.word.size());
    input.word[pos] = alphabet[rng.next_below(alphabet.size())];
    return true;
  }
  if (op == "swap_events") {
    if (input.word.size() < 2) return false;
    std::size_t a = rng.next_below(input.word.size());
    std::size_t b = rng.next_below(input.word.size());
    while (b == a) b = rng.next_below(input.word.size());
    std::swap(input.word[a], input.word[b]);
    return true;
  }
  throw std::invalid_argument("unknown mutation operator '" + op + "'");
}

std::string pick_weighted(const std::map<std::string, double>& weights,
                          Rng& rng) {
  double total = 0.0;
  for (const auto& [name, w] : weights) total += w;
  double target = rng.next_double() * total;
  for (const auto& [name, w] : weights) {
    target -= w;
    if (target < 0) return name;
  }
  return weights.rbegin()->first;
}

}  // namespace

FuzzInput mutate(const FuzzInput& input, Rng& rng,
                 const std::map<std::string, double>& weights,
                 const std::vector<sim::Event>& alphabet, int max_steps) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    FuzzInput candidate = input;
    std::string op = pick_weighted(weights, rng);
    if (!apply_operator(op, candidate, rng, alphabet, max_steps)) continue;
    if (dsl::validate_semantic(candidate.scenario).valid()) return candidate;
  }
  return input;
}

const CorpusEntry& select_next(const std::vector<CorpusEntry>& corpus,
                               const monitor::MonitorAutomaton& m,
                               const std::set<std::uint64_t>& observed_letters,
                               Traversal traversal, Rng& rng) {
  if (corpus.empty()) {
    throw std::invalid_argument("select_next: corpus is empty");
  }
  if (traversal == Traversal::kRandomWalk) {
    return corpus[rng.next_below(corpus.size())];
  }

  auto better = [](const CorpusEntry& a, long long score_a,
                   const CorpusEntry& b, long long score_b) {
    if (score_a != score_b) return score_a > score_b;
    if (a.discovery_iteration != b.discovery_iteration) {
      return a.discovery_iteration < b.discovery_iteration;
    }
    return a.input_hash < b.input_hash;
  };

  const CorpusEntry* best = nullptr;
  long long best_score = std::numeric_limits<long long>::min();
  for (const CorpusEntry& e : corpus) {
    long long score;
    if (traversal == Traversal::kDfs) {
      score = e.final_depth;
    } else {
      // bfs: smallest depth (along the entry's own path) of a state with
      // an observed letter not yet followed; entries with none rank last.
      auto known = m.transitions();
      std::set<std::pair<int, std::uint64_t>> taken;
      for (const auto& [from, letter, to] : known) taken.insert({from, letter});
      long long frontier = std::numeric_limits<long long>::max();
      for (std::size_t depth = 0; depth < e.path_states.size(); ++depth) {
        int state = e.path_states[depth];
        if (m.classification(state) != monitor::Classification::kPending) {
          continue;
        }
        for (std::uint64_t letter : observed_letters) {
          if (!taken.count({state, letter})) {
            frontier = static_cast<long long>(depth);
            break;
          }
        }
        if (frontier != std::numeric_limits<long long>::max()) break;
      }
      score = frontier == std::numeric_limits<long long>::max()
                  ? std::numeric_limits<long long>::min() + 1
                  : -frontier;
    }
    if (!best || better(e, score, *best, best_score)) {
      best = &e;
      best_score = score;
    }
  }
  return *best;
}

ReplayResult replay(const FuzzInput& input, const ltl::FormulaPtr& phi,
                    const abstraction::PredicateSet& predicates,
                    const sim::SimConfig& sim_cfg) {
  auto [trace, verdict] = sim::run(input.scenario, input.word, sim_cfg);
  auto labeled =
      abstraction::abstract_trace(trace, input.scenario, predicates, verdict,
                                  sim_cfg);
  monitor::MonitorAutomaton m(phi);
  auto run_result = monitor::monitor_run(m, labeled.letters);
  ReplayResult result;
  result.trace = std::move(trace);
  for (int s : run_result.visited_states) {
    result.residue_path.push_back(m.state_text(s));
  }
  result.final_class = run_result.final_class;
  return result;
}

namespace {

struct ExecOutcome {
  bool ok = false;
  std::string error;
  FuzzInput input;
  std::vector<std::uint64_t> letters;
};

}  // namespace

FuzzReport fuzz(const std::vector<FuzzInput>& seed_corpus,
                const ltl::FormulaPtr& phi,
                const abstraction::PredicateSet& predicates,
                const FuzzConfig& cfg, const sim::SimConfig& sim_cfg,
                int workers) {
  cfg.check();
  if (seed_corpus.empty()) {
    throw std::invalid_argument("fuzz: seed corpus is empty");
  }
  if (workers < 1) workers = 1;

  monitor::MonitorAutomaton mon(phi);
  CoverageMap coverage;
  std::vector<CorpusEntry> corpus;
  std::set<std::uint64_t> corpus_hashes;
  std::vector<Counterexample> counterexamples;
  std::set<std::string> counterexample_paths;
  std::set<std::uint64_t> observed_letters;

  FuzzReport report;
  report.config = cfg;
  report.formula_text = ltl::to_text(ltl::canonical(phi));

  std::uint64_t iteration = 0;
  bool stop = false;

  auto plan_input = [&](std::uint64_t iter) -> FuzzInput {
    if (iter < seed_corpus.size()) return seed_corpus[iter];
    Rng rng(Rng::derive(cfg.rng_seed, iter));
    const CorpusEntry& parent =
        select_next(corpus, mon, observed_letters, cfg.traversal, rng);
    auto full_alphabet = sim::event_alphabet(parent.input.scenario);
    std::vector<sim::Event> alphabet;
    for (const auto& e : full_alphabet) {
      if (std::find(cfg.allowed_events.begin(), cfg.allowed_events.end(),
                    e.kind) != cfg.allowed_events.end()) {
        alphabet.push_back(e);
      }
    }
    return mutate(parent.input, rng, cfg.weights, alphabet, sim_cfg.max_steps);
  };

  auto execute = [&](FuzzInput input) -> ExecOutcome {
    ExecOutcome out;
    out.input = std::move(input);
    try {
      auto [trace, verdict] = sim::run(out.input.scenario, out.input.word,
                                       sim_cfg);
      auto labeled = abstraction::abstract_trace(trace, out.input.scenario,
                                                 predicates, verdict, sim_cfg);
      out.letters = std::move(labeled.letters);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  };

  while (!stop && iteration < cfg.budget_execs) {
    std::size_t batch = std::min<std::uint64_t>(
        kBatchSize, cfg.budget_execs - iteration);
    // Seeds must commit before mutation planning can select them.
    if (iteration < seed_corpus.size()) {
      batch = std::min<std::size_t>(batch, seed_corpus.size() - iteration);
    }

    std::vector<FuzzInput> planned;
    planned.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      planned.push_back(plan_input(iteration + b));
    }

    std::vector<ExecOutcome> outcomes(batch);
    if (workers == 1 || batch == 1) {
      for (std::size_t b = 0; b < batch; ++b) {
        outcomes[b] = execute(std::move(planned[b]));
      }
    } else {
      std::vector<std::thread> pool;
      std::size_t stride = workers;
      for (std::size_t w = 0; w < static_cast<std::size_t>(workers); ++w) {
        pool.emplace_back([&, w]() {
          for (std::size_t b = w; b < batch; b += stride) {
            outcomes[b] = execute(std::move(planned[b]));
          }
        });
      }
      for (auto& t : pool) t.join();
    }

    // Commit in iteration order: coverage, corpus and counterexamples all
    // see results in the same sequence regardless of worker count.
    for (std::size_t b = 0; b < batch && !stop; ++b) {
      std::uint64_t iter = iteration + b;
      ExecOutcome& out = outcomes[b];
      ++report.executions;
      if (!out.ok) {
        ++report.skipped;
        continue;
      }
      auto run_result = monitor::monitor_run(mon, out.letters);
      for (std::uint64_t letter : out.letters) observed_letters.insert(letter);

      std::size_t novelty = 0;
      for (int s : run_result.visited_states) {
        if (coverage.states_hit.insert(s).second) ++novelty;
      }
      for (const auto& t : run_result.visited_transitions) {
        if (coverage.transitions_hit.insert(t).second) ++novelty;
      }

      std::uint64_t input_hash = out.input.hash();
      if (novelty > 0 && !corpus_hashes.count(input_hash)) {
        CorpusEntry entry;
        entry.input = out.input;
        entry.novelty = novelty;
        entry.discovery_iteration = iter;
        entry.input_hash = input_hash;
        entry.final_depth =
            static_cast<int>(run_result.visited_transitions.size());
        entry.path_states = run_result.visited_states;
        corpus.push_back(std::move(entry));
        corpus_hashes.insert(input_hash);
      }

      if (run_result.final_class == monitor::Classification::kViolated) {
        Counterexample cex;
        cex.input = out.input;
        cex.discovery_iteration = iter;
        cex.input_hash = input_hash;
        for (int s : run_result.visited_states) {
          cex.residue_path.push_back(mon.state_text(s));
        }
        std::string path_key;
        for (const auto& s : cex.residue_path) {
          path_key += s;
          path_key += '\x1f';
        }
        // Diversity rule: retain counterexamples with distinct residue
        // paths; duplicates of an already-recorded path are dropped.
        if (counterexample_paths.insert(path_key).second) {
          counterexamples.push_back(std::move(cex));
        }
        if (cfg.stop_on_first) stop = true;
      }
    }
    iteration += batch;
  }

  // Post-pass: every reported counterexample must replay to a violated
  // residue along the recorded path.
  for (const auto& cex : counterexamples) {
    ReplayResult r = replay(cex.input, phi, predicates, sim_cfg);
    if (r.final_class != monitor::Classification::kViolated ||
        r.residue_path != cex.residue_path) {
      throw ReplayMismatch("counterexample from iteration " +
                           std::to_string(cex.discovery_iteration) +
                           " does not replay to its recorded path");
    }
  }

  std::sort(counterexamples.begin(), counterexamples.end(),
            [](const Counterexample& a, const Counterexample& b) {
              if (a.discovery_iteration != b.discovery_iteration) {
                return a.discovery_iteration < b.discovery_iteration;
              }
              return a.input_hash < b.input_hash;
            });
  report.counterexamples = std::move(counterexamples);

  monitor::ReachableSet reachable = monitor::reachable_state_bound(
      phi, abstraction::PredicateSet::kCount, cfg.monitor_depth);
  std::set<std::string> reachable_states(reachable.states.begin(),
                                         reachable.states.end());
  std::set<std::tuple<std::string, std::uint64_t, std::string>>
      reachable_transitions(reachable.transitions.begin(),
                            reachable.transitions.end());
  std::size_t states_in_bound = 0;
  for (int s : coverage.states_hit) {
    if (reachable_states.count(mon.state_text(s))) ++states_in_bound;
  }
  std::size_t transitions_in_bound = 0;
  for (const auto& [from, letter, to] : coverage.transitions_hit) {
    if (reachable_transitions.count(
            {mon.state_text(from), letter, mon.state_text(to)})) {
      ++transitions_in_bound;
    }
  }
  report.states_hit = states_in_bound;
  report.states_total = reachable.states.size();
  report.transitions_hit = transitions_in_bound;
  report.transitions_total = reachable.transitions.size();
  report.states_pct =
      report.states_total == 0
          ? 0.0
          : 100.0 * static_cast<double>(states_in_bound) / report.states_total;
  report.transitions_pct = report.transitions_total == 0
                               ? 0.0
                               : 100.0 * static_cast<double>(transitions_in_bound) /
                                     report.transitions_total;
  return report;
}

std::string FuzzReport::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  nlohmann::ordered_json jc;
  jc["budget_execs"] = config.budget_execs;
  jc["rng_seed"] = config.rng_seed;
  jc["traversal"] = to_string(config.traversal);
  jc["weights"] = config.weights;
  jc["stop_on_first"] = config.stop_on_first;
  jc["monitor_depth"] = config.monitor_depth;
  nlohmann::ordered_json kinds = nlohmann::ordered_json::array();
  for (auto k : config.allowed_events) {
    kinds.push_back(sim::to_string(sim::Event{k, k == sim::EventKind::kNpcBrake ||
                                                     k == sim::EventKind::kPedCross
                                                 ? "*"
                                                 : ""}));
  }
  jc["allowed_events"] = kinds;
  j["config"] = std::move(jc);
  j["formula"] = formula_text;
  j["coverage"] = {{"states_pct", states_pct},
                   {"transitions_pct", transitions_pct},
                   {"states_hit", states_hit},
                   {"states_total", states_total},
                   {"transitions_hit", transitions_hit},
                   {"transitions_total", transitions_total}};
  j["executions"] = executions;
  j["skipped"] = skipped;
  j["counterexamples"] = nlohmann::ordered_json::array();
  for (const auto& cex : counterexamples) {
    nlohmann::ordered_json jx;
    jx["iteration"] = cex.discovery_iteration;
    jx["scenario"] = dsl::serialize_scenario(cex.input.scenario);
    nlohmann::ordered_json word = nlohmann::ordered_json::array();
    for (const auto& e : cex.input.word) word.push_back(sim::to_string(e));
    jx["word"] = std::move(word);
    jx["path"] = cex.residue_path;
    j["counterexamples"].push_back(std::move(jx));
  }
  return j.dump(2);
}

}  // namespace cpstest::fuzz
