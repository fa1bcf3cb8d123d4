#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cpstest/llm.hpp"
#include "cpstest/lstar.hpp"
#include "cpstest/ltl_learn.hpp"
#include "cpstest/util.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace cpstest::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void say(const GlobalOptions& g, const std::string& message) {
  if (!g.quiet) std::cout << message << "\n";
}

// Provenance wrapper shared by all artifacts.
nlohmann::ordered_json artifact_base(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["config"] = nlohmann::ordered_json::parse(cfg.to_json());
  j["rng_seed"] = cfg.rng_seed;
  return j;
}

std::vector<sim::Event> parse_events_csv(const std::string& csv) {
  std::vector<sim::Event> events;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (!token.empty()) events.push_back(sim::parse_event(token));
  }
  return events;
}

std::vector<fs::path> sorted_files(const std::string& dir,
                                   const std::string& extension) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(dir + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

dsl::Scenario load_scenario(const std::string& path) {
  return dsl::parse_scenario(read_file(path));
}

// Seeds: one .scn per input; an optional sidecar <stem>.events file holds
// a comma-separated event word.
std::vector<fuzz::FuzzInput> load_seed_inputs(const std::string& dir) {
  std::vector<fuzz::FuzzInput> seeds;
  for (const auto& path : sorted_files(dir, ".scn")) {
    fuzz::FuzzInput input;
    input.scenario = load_scenario(path.string());
    fs::path sidecar = path;
    sidecar.replace_extension(".events");
    if (fs::exists(sidecar)) {
      input.word = parse_events_csv(read_file(sidecar.string()));
    }
    seeds.push_back(std::move(input));
  }
  return seeds;
}

}  // namespace

FormulaArtifact load_formula_artifact(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  FormulaArtifact art;
  art.predicates.speed_limit = j.at("speed_limit").get<double>();
  art.formula = ltl::from_json(j.at("formula").dump(),
                               art.predicates.names());
  return art;
}

std::string formula_artifact_json(const ltl::FormulaPtr& f,
                                  const abstraction::PredicateSet& p,
                                  const PipelineConfig& cfg) {
  nlohmann::ordered_json j = artifact_base(cfg);
  j["text"] = ltl::to_text(f);
  j["predicates"] = p.names();
  j["speed_limit"] = p.speed_limit;
  j["formula"] = nlohmann::ordered_json::parse(ltl::to_json(f));
  return j.dump(2);
}

int cmd_parse(const std::string& scn_path,
              const std::optional<std::string>& out_path,
              const GlobalOptions& g) {
  try {
    dsl::Scenario s = load_scenario(scn_path);
    std::string canonical = dsl::serialize_scenario(s);
    if (out_path) write_file(*out_path, canonical);
    say(g, "parsed scenario '" + s.name + "'");
    return kExitOk;
  } catch (const dsl::ParseError& e) {
    std::cerr << scn_path << ":" << e.line() << ":" << e.column() << ": "
              << e.what() << "\n";
    return kExitFindings;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_validate(const std::string& scn_path, bool dry_run,
                 const std::optional<std::string>& out_path,
                 const GlobalOptions& g) {
  try {
    dsl::ValidationReport report;
    try {
      dsl::Scenario s = load_scenario(scn_path);
      report = dsl::validate_scenario(s, dry_run);
    } catch (const dsl::ParseError& e) {
      dsl::Diagnostic d;
      d.stage = dsl::Stage::kSyntax;
      d.severity = dsl::Severity::kError;
      d.message = e.what();
      d.span.line = e.line();
      d.span.column = e.column();
      report.diagnostics.push_back(std::move(d));
    }
    if (out_path) write_file(*out_path, report.to_json());
    for (const auto& d : report.diagnostics) {
      say(g, scn_path + ":" + std::to_string(d.span.line) + ": " + d.message);
    }
    say(g, report.valid() ? "valid" : "invalid");
    return report.valid() ? kExitOk : kExitFindings;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_simulate(const std::string& scn_path, const std::string& events_csv,
                 const std::optional<std::string>& out_path,
                 const GlobalOptions& g) {
  try {
    dsl::Scenario s = load_scenario(scn_path);
    auto word = parse_events_csv(events_csv);
    auto [trace, verdict] = sim::run(s, word, g.config.sim);
    if (out_path) write_file(*out_path, trace.to_json());
    if (verdict.pass()) {
      say(g, "verdict: pass (" + std::to_string(trace.states.size()) +
                 " states)");
      return kExitOk;
    }
    for (const auto& v : verdict.violated_clauses) {
      say(g, "violated: " + dsl::to_string(v.clause) + " at step " +
                 std::to_string(v.first_violation_step));
    }
    return kExitFindings;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_gen(const std::string& rules_path, int count,
            const std::string& out_dir, const std::string& provider_kind,
            const std::optional<std::string>& script_path,
            const GlobalOptions& g) {
  try {
    llm::GenerationJob job;
    job.rule_text = read_file(rules_path);
    job.count = count > 0 ? count : g.config.llm_count;
    job.max_repair_rounds = g.config.llm_max_repair_rounds;

    std::unique_ptr<llm::Provider> provider;
    if (provider_kind == "mock") {
      if (!script_path) {
        throw std::runtime_error("--provider mock requires --script");
      }
      provider = std::make_unique<llm::MockProvider>(
          llm::MockProvider::from_script_json(read_file(*script_path)));
    } else if (provider_kind == "http") {
      provider =
          std::make_unique<llm::HttpProvider>(llm::HttpProvider::from_environment());
    } else {
      throw std::runtime_error("unknown provider '" + provider_kind + "'");
    }

    llm::GenerationResult result = llm::generate_scenarios(job, *provider);
    for (std::size_t i = 0; i < result.accepted.size(); ++i) {
      const auto& [scenario, prov] = result.accepted[i];
      write_file(out_dir + "/" + scenario.name + ".scn",
                 dsl::serialize_scenario(scenario));
    }
    write_file(out_dir + "/generation.json", result.to_json());
    say(g, "accepted " + std::to_string(result.accepted.size()) + ", rejected " +
               std::to_string(result.rejected.size()));
    if (result.provider_error) {
      std::cerr << "provider error: " << *result.provider_error << "\n";
      return kExitError;
    }
    return result.accepted.empty() ? kExitFindings : kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

namespace {

lstar::LearnResult learn_dfa_for_scenario(
    const dsl::Scenario& scenario, const std::vector<sim::Event>& alphabet,
    const PipelineConfig& cfg, std::map<lstar::Word, bool>* cache_in_out) {
  auto member = [&scenario, &alphabet, &cfg](const lstar::Word& w) {
    std::vector<sim::Event> word;
    word.reserve(w.size());
    for (int sym : w) word.push_back(alphabet[sym]);
    auto [trace, verdict] = sim::run(scenario, word, cfg.sim);
    return verdict.pass();
  };
  lstar::CachingTeacher teacher(member);
  teacher.set_equivalent([&teacher, &cfg](const lstar::Dfa& hyp) {
    return lstar::random_word_equivalence(
        hyp, [&teacher](const lstar::Word& w) { return teacher.member(w); },
        cfg.eq_budget, cfg.eq_max_len, cfg.rng_seed);
  });
  if (cache_in_out) teacher.preload(*cache_in_out);
  lstar::LearnResult result =
      lstar::learn(teacher, static_cast<int>(alphabet.size()), cfg.max_rounds);
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    result.dfa.symbol_names.push_back(sim::to_string(alphabet[i]));
  }
  if (cache_in_out) *cache_in_out = teacher.cache();
  return result;
}

}  // namespace

int cmd_learn_dfa(const std::string& scn_path,
                  const std::optional<std::string>& alphabet_csv,
                  const std::optional<std::string>& out_path,
                  const std::optional<std::string>& cache_path,
                  const GlobalOptions& g) {
  try {
    dsl::Scenario s = load_scenario(scn_path);
    std::vector<sim::Event> alphabet = alphabet_csv
                                           ? parse_events_csv(*alphabet_csv)
                                           : sim::event_alphabet(s);

    std::map<lstar::Word, bool> cache;
    if (cache_path && fs::exists(*cache_path)) {
      nlohmann::json j = nlohmann::json::parse(read_file(*cache_path));
      for (const auto& entry : j) {
        cache[entry.at("word").get<lstar::Word>()] =
            entry.at("member").get<bool>();
      }
    }

    lstar::LearnResult result =
        learn_dfa_for_scenario(s, alphabet, g.config, &cache);

    if (cache_path) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& [w, b] : cache) {
        j.push_back({{"word", w}, {"member", b}});
      }
      write_file(*cache_path, j.dump(2));
    }
    if (out_path) {
      nlohmann::ordered_json j = artifact_base(g.config);
      j["scenario"] = s.name;
      j["converged"] = result.converged;
      j["rounds"] = result.rounds;
      j["membership_queries"] = result.membership_queries;
      j["dfa"] = nlohmann::ordered_json::parse(result.dfa.to_json());
      write_file(*out_path, j.dump(2));
    }
    say(g, "learned " + std::to_string(result.dfa.num_states) +
               "-state DFA in " + std::to_string(result.rounds) + " round(s), " +
               std::to_string(result.membership_queries) +
               " membership queries" +
               (result.converged ? "" : " (budget exhausted)"));
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

namespace {

ltlsat::TraceSample load_trace_sample(const std::string& pos_dir,
                                      const std::string& neg_dir) {
  ltlsat::TraceSample sample;
  for (const auto& path : sorted_files(pos_dir, ".json")) {
    sample.positives.push_back(
        abstraction::LabeledTrace::from_json(read_file(path.string())));
  }
  for (const auto& path : sorted_files(neg_dir, ".json")) {
    sample.negatives.push_back(
        abstraction::LabeledTrace::from_json(read_file(path.string())));
  }
  abstraction::PredicateSet p;
  if (!sample.positives.empty()) p = sample.positives[0].predicates;
  else if (!sample.negatives.empty()) p = sample.negatives[0].predicates;
  sample.atom_names = p.names();
  return sample;
}

}  // namespace

int cmd_learn_ltl(const std::string& pos_dir, const std::string& neg_dir,
                  int max_size, const std::optional<std::string>& out_path,
                  const GlobalOptions& g) {
  try {
    ltlsat::TraceSample sample = load_trace_sample(pos_dir, neg_dir);
    if (sample.positives.empty() || sample.negatives.empty()) {
      std::cerr << "stage learn-ltl: need at least one positive and one "
                   "negative trace (NoSeparator)\n";
      return kExitError;
    }
    int budget = max_size > 0 ? max_size : g.config.max_formula_size;
    auto formula = ltlsat::learn_minimal(sample, budget);
    if (!formula) {
      std::cerr << "stage learn-ltl: no separating formula up to size "
                << budget << " (NoSeparator)\n";
      return kExitError;
    }
    abstraction::PredicateSet p;
    if (!sample.positives.empty()) p = sample.positives[0].predicates;
    if (out_path) {
      write_file(*out_path, formula_artifact_json(*formula, p, g.config));
    }
    say(g, "learned formula: " + ltl::to_text(*formula));
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_monitor_check(const std::string& formula_path,
                      const std::string& trace_path,
                      const std::string& scn_path, const GlobalOptions& g) {
  try {
    FormulaArtifact art = load_formula_artifact(formula_path);
    dsl::Scenario s = load_scenario(scn_path);
    sim::Trace trace = sim::Trace::from_json(read_file(trace_path));
    sim::Verdict verdict = sim::evaluate_oracles(trace, s, g.config.sim);
    auto labeled = abstraction::abstract_trace(trace, s, art.predicates,
                                               verdict, g.config.sim);
    monitor::MonitorAutomaton m(art.formula);
    auto result = monitor::monitor_run(m, labeled.letters);
    say(g, std::string("final: ") + monitor::to_string(result.final_class) +
               " (" + m.state_text(result.final_state) + ") after " +
               std::to_string(result.visited_transitions.size()) + " step(s)");
    return result.final_class == monitor::Classification::kViolated
               ? kExitFindings
               : kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_fuzz(const std::string& seeds_dir, const std::string& formula_path,
             const std::optional<std::string>& out_path, int jobs,
             const GlobalOptions& g) {
  try {
    auto seeds = load_seed_inputs(seeds_dir);
    if (seeds.empty()) {
      std::cerr << "error: no .scn seeds in " << seeds_dir << "\n";
      return kExitError;
    }
    FormulaArtifact art = load_formula_artifact(formula_path);
    fuzz::FuzzReport report = fuzz::fuzz(seeds, art.formula, art.predicates,
                                         g.config.fuzz, g.config.sim, jobs);
    if (out_path) write_file(*out_path, report.to_json());
    say(g, std::to_string(report.executions) + " executions, " +
               std::to_string(report.counterexamples.size()) +
               " counterexample(s), state coverage " +
               std::to_string(report.states_pct) + "%");
    return report.counterexamples.empty() ? kExitOk : kExitFindings;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_pipeline(const std::string& scn_dir,
                 const std::optional<std::string>& rules_path,
                 const std::optional<std::string>& formula_path,
                 const std::string& out_dir,
                 const std::optional<std::string>& script_path, int jobs,
                 const GlobalOptions& g) {
  std::string stage = "setup";
  try {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/seeds");

    // Stage: generate (optional) — LLM candidates become extra seeds.
    if (rules_path) {
      stage = "generate";
      int rc = cmd_gen(*rules_path, g.config.llm_count, out_dir + "/seeds",
                       script_path ? "mock" : "http", script_path, g);
      if (rc == kExitError) return kExitError;
    }
    for (const auto& path : sorted_files(scn_dir, ".scn")) {
      fs::copy_file(path, out_dir + "/seeds/" + path.filename().string(),
                    fs::copy_options::overwrite_existing);
      fs::path sidecar = path;
      sidecar.replace_extension(".events");
      if (fs::exists(sidecar)) {
        fs::copy_file(sidecar,
                      out_dir + "/seeds/" + sidecar.filename().string(),
                      fs::copy_options::overwrite_existing);
      }
    }

    stage = "validate";
    auto seeds = load_seed_inputs(out_dir + "/seeds");
    if (seeds.empty()) {
      std::cerr << "stage validate: no seed scenarios\n";
      return kExitError;
    }
    for (const auto& seed : seeds) {
      auto report = dsl::validate_scenario(seed.scenario, true);
      if (!report.valid()) {
        std::cerr << "stage validate: seed '" << seed.scenario.name
                  << "' is invalid\n";
        return kExitError;
      }
    }

    // Stage: simulate/label — sampled event words, verdict-labeled traces.
    stage = "simulate";
    abstraction::PredicateSet predicates =
        abstraction::PredicateSet::for_scenario(seeds[0].scenario);
    ltlsat::TraceSample sample;
    sample.atom_names = predicates.names();
    Rng rng(g.config.rng_seed);
    int pos_index = 0, neg_index = 0;
    for (const auto& seed : seeds) {
      auto alphabet = sim::event_alphabet(seed.scenario);
      for (int i = 0; i < g.config.sample_words; ++i) {
        std::vector<sim::Event> word;
        int len = static_cast<int>(rng.next_below(g.config.sample_word_len + 1));
        for (int k = 0; k < len; ++k) {
          word.push_back(alphabet[rng.next_below(alphabet.size())]);
        }
        auto [trace, verdict] = sim::run(seed.scenario, word, g.config.sim);
        auto labeled = abstraction::abstract_trace(trace, seed.scenario,
                                                   predicates, verdict,
                                                   g.config.sim);
        if (labeled.label == abstraction::Label::kPositive) {
          write_file(out_dir + "/traces/pos/trace_" +
                         std::to_string(pos_index++) + ".json",
                     labeled.to_json());
          sample.positives.push_back(std::move(labeled));
        } else {
          write_file(out_dir + "/traces/neg/trace_" +
                         std::to_string(neg_index++) + ".json",
                     labeled.to_json());
          sample.negatives.push_back(std::move(labeled));
        }
      }
    }

    // Deduplicate letter sequences that appear on both sides (the sampler
    // can produce the same abstract trace from different words).
    stage = "learn-ltl";
    {
      auto same_letters = [](const abstraction::LabeledTrace& a,
                             const abstraction::LabeledTrace& b) {
        return a.letters == b.letters;
      };
      auto& neg = sample.negatives;
      neg.erase(std::remove_if(neg.begin(), neg.end(),
                               [&](const abstraction::LabeledTrace& n) {
                                 return std::any_of(
                                     sample.positives.begin(),
                                     sample.positives.end(),
                                     [&](const auto& p) {
                                       return same_letters(p, n);
                                     });
                               }),
                neg.end());
    }

    stage = "learn-dfa";
    {
      auto alphabet = sim::event_alphabet(seeds[0].scenario);
      lstar::LearnResult result =
          learn_dfa_for_scenario(seeds[0].scenario, alphabet, g.config,
                                 nullptr);
      nlohmann::ordered_json j = artifact_base(g.config);
      j["scenario"] = seeds[0].scenario.name;
      j["converged"] = result.converged;
      j["rounds"] = result.rounds;
      j["membership_queries"] = result.membership_queries;
      j["dfa"] = nlohmann::ordered_json::parse(result.dfa.to_json());
      write_file(out_dir + "/dfa.json", j.dump(2));
      say(g, "pipeline: learned " + std::to_string(result.dfa.num_states) +
                 "-state DFA for '" + seeds[0].scenario.name + "'");
    }

    stage = "learn-ltl";
    ltl::FormulaPtr phi;
    if (formula_path) {
      FormulaArtifact art = load_formula_artifact(*formula_path);
      phi = art.formula;
      predicates = art.predicates;
    } else {
      if (sample.positives.empty() || sample.negatives.empty()) {
        std::cerr << "stage learn-ltl: need both positive and negative "
                     "traces to learn a formula; pass --formula for clean "
                     "families (NoSeparator)\n";
        return kExitError;
      }
      auto learned =
          ltlsat::learn_minimal(sample, g.config.max_formula_size);
      if (!learned) {
        std::cerr << "stage learn-ltl: no separating formula up to size "
                  << g.config.max_formula_size << " (NoSeparator)\n";
        return kExitError;
      }
      phi = *learned;
      say(g, "pipeline: learned formula " + ltl::to_text(phi));
    }
    write_file(out_dir + "/formula.json",
               formula_artifact_json(phi, predicates, g.config));

    stage = "fuzz";
    fuzz::FuzzReport report =
        fuzz::fuzz(seeds, phi, predicates, g.config.fuzz, g.config.sim, jobs);
    write_file(out_dir + "/report.json", report.to_json());
    say(g, "pipeline: " + std::to_string(report.executions) + " executions, " +
               std::to_string(report.counterexamples.size()) +
               " counterexample(s)");
    return report.counterexamples.empty() ? kExitOk : kExitFindings;
  } catch (const std::exception& e) {
    std::cerr << "stage " << stage << ": " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_export_dot(const std::optional<std::string>& dfa_path,
                   const std::optional<std::string>& formula_path, int depth,
                   const std::string& out_path, const GlobalOptions& g) {
  try {
    if (static_cast<bool>(dfa_path) == static_cast<bool>(formula_path)) {
      std::cerr << "error: pass exactly one of --dfa or --formula\n";
      return kExitError;
    }
    if (dfa_path) {
      nlohmann::json j = nlohmann::json::parse(read_file(*dfa_path));
      lstar::Dfa dfa = lstar::Dfa::from_json(
          j.contains("dfa") ? j.at("dfa").dump() : j.dump());
      write_file(out_path, dfa.to_dot());
    } else {
      FormulaArtifact art = load_formula_artifact(*formula_path);
      // Materialize the monitor graph up to the requested depth.
      monitor::MonitorAutomaton m(art.formula);
      std::vector<std::pair<int, int>> frontier{{0, 0}};
      for (std::size_t head = 0; head < frontier.size(); ++head) {
        auto [state, d] = frontier[head];
        if (d >= depth) continue;
        if (m.classification(state) != monitor::Classification::kPending) {
          continue;
        }
        for (std::uint64_t letter = 0;
             letter < (1ull << abstraction::PredicateSet::kCount); ++letter) {
          int before = m.num_states();
          int target = m.transition(state, letter);
          if (target >= before) frontier.push_back({target, d + 1});
        }
      }
      write_file(out_path, m.to_dot());
    }
    say(g, "wrote " + out_path);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace cpstest::cli
