#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "cpstest/lstar.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cpstest;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cpstest_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) {
    fs::path p = path / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    out << content;
    return p.string();
  }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kCleanScenario = R"(scenario clean_family {
  environment { weather: clear; time_of_day: day; }
  road { type: straight; }
  actors {
    ego { start_position: 0.0; start_speed: 10.0; controller: rule_follower; }
    vehicle lead {
      start_position: 100.0; start_speed: 10.0; behavior: cruise;
    }
  }
  oracle { longitudinal: [no_collision]; }
})";

const char* kFaultedScenario = R"(scenario faulted_family {
  environment { weather: clear; time_of_day: day; }
  road { type: straight; }
  actors {
    ego {
      start_position: 0.0; start_speed: 10.0;
      controller: faulted(ignore_lead_vehicle);
    }
    vehicle lead {
      start_position: 100.0; start_speed: 10.0; behavior: cruise;
    }
  }
  oracle { longitudinal: [no_collision]; }
})";

std::string no_collision_formula_json(const cli::PipelineConfig& cfg) {
  dsl::OracleClause c;
  c.kind = dsl::OracleKind::kNoCollision;
  abstraction::PredicateSet p;
  return cli::formula_artifact_json(abstraction::formula_for_clause(c, p), p,
                                    cfg);
}

cli::GlobalOptions quiet_options() {
  cli::GlobalOptions g;
  g.quiet = true;
  return g;
}

}  // namespace

TEST_CASE("parse and validate exit codes") {
  TempDir dir;
  auto g = quiet_options();
  auto good = dir.file("good.scn", kCleanScenario);
  auto bad_syntax = dir.file("bad.scn", "scenario x { oracle { } }");
  auto bad_semantic = dir.file(
      "sem.scn",
      "scenario x { environment { } road { } actors { } oracle { "
      "longitudinal: [stop_at_sign(0.5)]; } }");

  CHECK(cli::cmd_parse(good, std::nullopt, g) == cli::kExitOk);
  CHECK(cli::cmd_parse(bad_syntax, std::nullopt, g) == cli::kExitFindings);
  CHECK(cli::cmd_parse(dir / "missing.scn", std::nullopt, g) ==
        cli::kExitError);

  auto report_path = dir / "report.json";
  CHECK(cli::cmd_validate(good, true, report_path, g) == cli::kExitOk);
  CHECK(nlohmann::json::parse(slurp(report_path)).at("verdict") == "valid");
  CHECK(cli::cmd_validate(bad_semantic, false, report_path, g) ==
        cli::kExitFindings);
  CHECK(nlohmann::json::parse(slurp(report_path)).at("verdict") == "invalid");
  CHECK(cli::cmd_validate(bad_syntax, false, report_path, g) ==
        cli::kExitFindings);
  auto j = nlohmann::json::parse(slurp(report_path));
  CHECK(j.at("diagnostics")[0].at("stage") == "syntax");
}

TEST_CASE("simulate writes the trace artifact") {
  TempDir dir;
  auto g = quiet_options();
  auto scn = dir.file("s.scn", kCleanScenario);
  auto out = dir / "trace.json";
  CHECK(cli::cmd_simulate(scn, "NONE,NPC_BRAKE(lead)", out, g) == cli::kExitOk);
  auto trace = sim::Trace::from_json(slurp(out));
  CHECK(trace.scenario_ref == "clean_family");
  CHECK(trace.states.size() == 301);
}

TEST_CASE("monitor-check distinguishes pending from violated") {
  TempDir dir;
  auto g = quiet_options();
  auto formula = dir.file("formula.json", no_collision_formula_json(g.config));

  auto clean = dir.file("clean.scn", kCleanScenario);
  auto clean_trace = dir / "clean_trace.json";
  REQUIRE(cli::cmd_simulate(clean, "", clean_trace, g) == cli::kExitOk);
  CHECK(cli::cmd_monitor_check(formula, clean_trace, clean, g) == cli::kExitOk);

  auto faulted = dir.file("faulted.scn", kFaultedScenario);
  auto crash_trace = dir / "crash_trace.json";
  REQUIRE(cli::cmd_simulate(faulted, "NPC_BRAKE(lead)", crash_trace, g) ==
          cli::kExitFindings);
  CHECK(cli::cmd_monitor_check(formula, crash_trace, faulted, g) ==
        cli::kExitFindings);
}

TEST_CASE("gen with the mock provider is hermetic") {
  TempDir dir;
  auto g = quiet_options();
  auto rules = dir.file("rules.txt", "Stop at stop signs.");
  nlohmann::json script = nlohmann::json::array();
  script.push_back(kCleanScenario);
  auto script_path = dir.file("script.json", script.dump());
  auto out_dir = dir / "seeds";
  g.config.llm_count = 1;
  CHECK(cli::cmd_gen(rules, 1, out_dir, "mock", script_path, g) ==
        cli::kExitOk);
  CHECK(fs::exists(fs::path(out_dir) / "clean_family.scn"));
  CHECK(fs::exists(fs::path(out_dir) / "generation.json"));
}

TEST_CASE("learn-dfa persists artifact and membership cache") {
  TempDir dir;
  auto g = quiet_options();
  g.config.eq_budget = 200;
  g.config.eq_max_len = 4;
  auto scn = dir.file("s.scn", kFaultedScenario);
  auto out = dir / "dfa.json";
  auto cache = dir / "cache.json";
  CHECK(cli::cmd_learn_dfa(scn, std::string("NONE,NPC_BRAKE(lead)"), out,
                           cache, g) == cli::kExitOk);
  auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("dfa").at("states").get<int>() >= 2);
  CHECK(j.at("tool_version") == kToolVersion);
  CHECK(fs::exists(cache));
  // Re-running with the cache loads and answers identically.
  CHECK(cli::cmd_learn_dfa(scn, std::string("NONE,NPC_BRAKE(lead)"), out,
                           cache, g) == cli::kExitOk);
}

TEST_CASE("learn-ltl stages and byte-reproducibility") {
  TempDir dir;
  auto g = quiet_options();

  // Build labeled traces from the faulted family: braking event leads to a
  // crash, no event stays clean.
  auto scenario = dsl::parse_scenario(kFaultedScenario);
  abstraction::PredicateSet p;
  sim::SimConfig cfg;
  auto run_labeled = [&](const std::vector<sim::Event>& word) {
    auto [trace, verdict] = sim::run(scenario, word, cfg);
    return abstraction::abstract_trace(trace, scenario, p, verdict, cfg);
  };
  dir.file("pos/t0.json", run_labeled({}).to_json());
  dir.file("pos/t1.json",
           run_labeled({{sim::EventKind::kRainOn, ""}}).to_json());
  dir.file("neg/t0.json",
           run_labeled({{sim::EventKind::kNpcBrake, "lead"}}).to_json());

  auto out = dir / "formula.json";
  CHECK(cli::cmd_learn_ltl(dir / "pos", dir / "neg", 3, out, g) ==
        cli::kExitOk);
  std::string first = slurp(out);
  auto art = cli::load_formula_artifact(out);
  CHECK(ltl::to_text(art.formula).find("collision") != std::string::npos);

  // Re-running the stage from the same persisted inputs is byte-identical.
  CHECK(cli::cmd_learn_ltl(dir / "pos", dir / "neg", 3, out, g) ==
        cli::kExitOk);
  CHECK(slurp(out) == first);

  // Empty negative directory surfaces NoSeparator as an operational error.
  fs::create_directories(fs::path(dir / "empty_neg"));
  CHECK(cli::cmd_learn_ltl(dir / "pos", dir / "empty_neg", 3, out, g) ==
        cli::kExitError);
}

TEST_CASE("fuzz command and exit codes") {
  TempDir dir;
  auto g = quiet_options();
  g.config.fuzz.budget_execs = 200;
  g.config.fuzz.rng_seed = 5;
  g.config.fuzz.allowed_events = {sim::EventKind::kNone,
                                  sim::EventKind::kNpcBrake};
  auto formula = dir.file("formula.json", no_collision_formula_json(g.config));

  fs::create_directories(fs::path(dir / "clean_seeds"));
  dir.file("clean_seeds/a.scn", kCleanScenario);
  auto report = dir / "report.json";
  CHECK(cli::cmd_fuzz(dir / "clean_seeds", formula, report, 1, g) ==
        cli::kExitOk);
  auto j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("counterexamples").empty());

  fs::create_directories(fs::path(dir / "bad_seeds"));
  dir.file("bad_seeds/a.scn", kFaultedScenario);
  dir.file("bad_seeds/a.events", "NPC_BRAKE(lead)");
  CHECK(cli::cmd_fuzz(dir / "bad_seeds", formula, report, 1, g) ==
        cli::kExitFindings);
  auto j2 = nlohmann::json::parse(slurp(report));
  CHECK_FALSE(j2.at("counterexamples").empty());
}

TEST_CASE("pipeline exit codes: clean 0, violations 2, missing formula 1") {
  auto g = quiet_options();
  g.config.fuzz.budget_execs = 150;
  g.config.fuzz.rng_seed = 11;
  g.config.fuzz.allowed_events = {sim::EventKind::kNone,
                                  sim::EventKind::kNpcBrake};
  g.config.sample_words = 6;
  g.config.sample_word_len = 2;
  g.config.eq_budget = 100;
  g.config.eq_max_len = 4;

  SUBCASE("clean family with a provided formula exits 0") {
    TempDir dir;
    fs::create_directories(fs::path(dir / "scn"));
    dir.file("scn/clean.scn", kCleanScenario);
    auto formula = dir.file("formula.json",
                            no_collision_formula_json(g.config));
    int rc = cli::cmd_pipeline(dir / "scn", std::nullopt, formula,
                               dir / "out", std::nullopt, 1, g);
    CHECK(rc == cli::kExitOk);
    CHECK(fs::exists(fs::path(dir / "out") / "dfa.json"));
    CHECK(fs::exists(fs::path(dir / "out") / "report.json"));
  }

  SUBCASE("faulted family exits 2 and learns its own formula") {
    TempDir dir;
    fs::create_directories(fs::path(dir / "scn"));
    dir.file("scn/faulted.scn", kFaultedScenario);
    int rc = cli::cmd_pipeline(dir / "scn", std::nullopt, std::nullopt,
                               dir / "out", std::nullopt, 1, g);
    CHECK(rc == cli::kExitFindings);
    CHECK(fs::exists(fs::path(dir / "out") / "formula.json"));
    auto report = nlohmann::json::parse(
        slurp((fs::path(dir / "out") / "report.json").string()));
    CHECK_FALSE(report.at("counterexamples").empty());
  }

  SUBCASE("clean family without a formula exits 1 at stage learn-ltl") {
    TempDir dir;
    fs::create_directories(fs::path(dir / "scn"));
    dir.file("scn/clean.scn", kCleanScenario);
    int rc = cli::cmd_pipeline(dir / "scn", std::nullopt, std::nullopt,
                               dir / "out", std::nullopt, 1, g);
    CHECK(rc == cli::kExitError);
  }
}

TEST_CASE("export-dot") {
  TempDir dir;
  auto g = quiet_options();

  lstar::Dfa universal;
  universal.num_states = 1;
  universal.initial = 0;
  universal.accepting = {0};
  universal.transitions = {{0, 0}};
  universal.symbol_names = {"a", "b"};
  auto dfa_path = dir.file("dfa.json", universal.to_json());
  auto out = dir / "dfa.dot";
  CHECK(cli::cmd_export_dot(dfa_path, std::nullopt, 10, out, g) ==
        cli::kExitOk);
  std::string dot = slurp(out);
  CHECK(dot.find("s0 -> s0 [label=\"a\"]") != std::string::npos);
  CHECK(dot.find("s0 -> s0 [label=\"b\"]") != std::string::npos);

  auto formula = dir.file("formula.json", no_collision_formula_json(g.config));
  auto mout = dir / "monitor.dot";
  CHECK(cli::cmd_export_dot(std::nullopt, formula, 6, mout, g) ==
        cli::kExitOk);
  std::string mdot = slurp(mout);
  CHECK(mdot.find("peripheries=2") != std::string::npos);

  CHECK(cli::cmd_export_dot(std::nullopt, std::nullopt, 6, out, g) ==
        cli::kExitError);
}

TEST_CASE("pipeline config parsing") {
  auto cfg = cli::PipelineConfig::from_text(
      "[simulator]\nmax_steps = 120\n# comment\n[fuzz]\nbudget = 42\n"
      "traversal = dfs\nweight_insert_event = 5.0\n[llm]\ncount = 2\n");
  CHECK(cfg.sim.max_steps == 120);
  CHECK(cfg.fuzz.budget_execs == 42);
  CHECK(cfg.fuzz.traversal == fuzz::Traversal::kDfs);
  CHECK(cfg.fuzz.weights.at("insert_event") == 5.0);
  CHECK(cfg.llm_count == 2);

  CHECK_THROWS_WITH_AS(cli::PipelineConfig::from_text("[nope]\n"),
                       doctest::Contains("unknown section"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(cli::PipelineConfig::from_text("[fuzz]\nbad_key = 1\n"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      cli::PipelineConfig::from_text("[fuzz]\nweight_nothing = 1\n"),
      doctest::Contains("unknown mutation operator"), std::runtime_error);

  // The resolved config echo covers every section.
  auto j = nlohmann::json::parse(cfg.to_json());
  for (const char* section : {"simulator", "lstar", "sat", "fuzz", "llm"}) {
    CHECK(j.contains(section));
  }
}
