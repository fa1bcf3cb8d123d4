#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace cpstest;

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based testing toolkit: scenario DSL, deterministic "
               "traffic simulator, model learning and coverage-guided "
               "property fuzzing"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> rng_seed;
  bool quiet = false;
  app.add_option("--config", config_path, "pipeline config file (INI)");
  app.add_option("--rng-seed", rng_seed, "override all RNG seeds");
  app.add_flag("--quiet", quiet, "suppress progress output");

  std::string scn_path, events_csv, rules_path, out_dir, provider = "mock";
  std::string pos_dir, neg_dir, formula_path, trace_path, seeds_dir, scn_dir;
  std::optional<std::string> out_path, alphabet_csv, cache_path, script_path;
  std::optional<std::string> opt_rules, opt_formula, dfa_path, formula_opt;
  bool dry_run = false;
  bool stop_on_first = false;
  int count = 0, max_size = 0, jobs = 1, depth = 10;
  std::optional<std::uint64_t> budget;
  std::optional<std::string> traversal;

  auto* parse_cmd = app.add_subcommand("parse", "parse a .scn file");
  parse_cmd->add_option("file", scn_path, "scenario file")->required();
  parse_cmd->add_option("--out", out_path, "write canonical form here");

  auto* validate_cmd =
      app.add_subcommand("validate", "validate a .scn file (semantic stages)");
  validate_cmd->add_option("file", scn_path, "scenario file")->required();
  validate_cmd->add_flag("--dry-run", dry_run, "also run the simulator stage");
  validate_cmd->add_option("--out", out_path, "write the JSON report here");

  auto* simulate_cmd =
      app.add_subcommand("simulate", "execute a scenario under an event word");
  simulate_cmd->add_option("file", scn_path, "scenario file")->required();
  simulate_cmd->add_option("--events", events_csv,
                           "comma-separated events, e.g. NONE,NPC_BRAKE(npc1)");
  simulate_cmd->add_option("--out", out_path, "write the trace JSON here");

  auto* gen_cmd =
      app.add_subcommand("gen", "draft scenarios from rule text via a provider");
  gen_cmd->add_option("--rules", rules_path, "rule text file")->required();
  gen_cmd->add_option("-n", count, "number of scenarios");
  gen_cmd->add_option("--out", out_dir, "output directory")->required();
  gen_cmd->add_option("--provider", provider, "mock | http");
  gen_cmd->add_option("--script", script_path, "mock replies (JSON array)");

  auto* learn_dfa_cmd =
      app.add_subcommand("learn-dfa", "active DFA learning against the simulator");
  learn_dfa_cmd->add_option("file", scn_path, "scenario file")->required();
  learn_dfa_cmd->add_option("--alphabet", alphabet_csv,
                            "event alphabet (comma-separated)");
  learn_dfa_cmd->add_option("--eq-budget", budget, "equivalence sample budget");
  learn_dfa_cmd->add_option("--out", out_path, "write the DFA JSON here");
  learn_dfa_cmd->add_option("--cache", cache_path,
                            "membership cache file (read/write)");

  auto* learn_ltl_cmd =
      app.add_subcommand("learn-ltl", "SAT-learn a minimal LTLf separator");
  learn_ltl_cmd->add_option("--pos", pos_dir, "positive trace dir")->required();
  learn_ltl_cmd->add_option("--neg", neg_dir, "negative trace dir")->required();
  learn_ltl_cmd->add_option("--max-size", max_size, "largest formula size");
  learn_ltl_cmd->add_option("--out", out_path, "write the formula JSON here");

  auto* monitor_cmd =
      app.add_subcommand("monitor-check", "progress a formula over a trace");
  monitor_cmd->add_option("--formula", formula_path, "formula JSON")->required();
  monitor_cmd->add_option("--trace", trace_path, "trace JSON")->required();
  monitor_cmd->add_option("--scenario", scn_path, "scenario file")->required();

  auto* fuzz_cmd =
      app.add_subcommand("fuzz", "coverage-guided fuzzing against a formula");
  fuzz_cmd->add_option("--seeds", seeds_dir, "seed directory")->required();
  fuzz_cmd->add_option("--formula", formula_path, "formula JSON")->required();
  fuzz_cmd->add_option("--budget", budget, "execution budget");
  fuzz_cmd->add_option("--traversal", traversal, "dfs | bfs | random_walk");
  fuzz_cmd->add_flag("--stop-on-first", stop_on_first,
                     "stop at the first counterexample");
  fuzz_cmd->add_option("--jobs", jobs, "worker threads");
  fuzz_cmd->add_option("--out", out_path, "write the report JSON here");

  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "generate -> simulate -> learn -> fuzz");
  pipeline_cmd->add_option("scn_dir", scn_dir, "seed scenario directory")
      ->required();
  pipeline_cmd->add_option("--rules", opt_rules, "rule text for generation");
  pipeline_cmd->add_option("--formula", opt_formula,
                           "use this formula instead of learning one");
  pipeline_cmd->add_option("--out", out_dir, "artifact directory")->required();
  pipeline_cmd->add_option("--script", script_path,
                           "mock provider replies (JSON array)");
  pipeline_cmd->add_option("--jobs", jobs, "fuzzing worker threads");

  auto* export_cmd = app.add_subcommand("export-dot", "render DFA or monitor");
  export_cmd->add_option("--dfa", dfa_path, "DFA JSON");
  export_cmd->add_option("--formula", formula_opt, "formula JSON");
  export_cmd->add_option("--depth", depth, "monitor unfolding depth");
  export_cmd->add_option("--out", out_path, "output DOT file")->required();

  CLI11_PARSE(app, argc, argv);

  cli::GlobalOptions g;
  try {
    if (config_path) {
      g.config = cli::PipelineConfig::from_file(*config_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitError;
  }
  g.quiet = quiet;
  if (rng_seed) {
    g.config.rng_seed = *rng_seed;
    g.config.fuzz.rng_seed = *rng_seed;
  }
  if (budget && fuzz_cmd->parsed()) g.config.fuzz.budget_execs = *budget;
  if (budget && learn_dfa_cmd->parsed()) {
    g.config.eq_budget = static_cast<int>(*budget);
  }
  if (traversal) {
    g.config.fuzz.traversal = fuzz::traversal_from_string(*traversal);
  }
  if (stop_on_first) g.config.fuzz.stop_on_first = true;

  if (parse_cmd->parsed()) return cli::cmd_parse(scn_path, out_path, g);
  if (validate_cmd->parsed()) {
    return cli::cmd_validate(scn_path, dry_run, out_path, g);
  }
  if (simulate_cmd->parsed()) {
    return cli::cmd_simulate(scn_path, events_csv, out_path, g);
  }
  if (gen_cmd->parsed()) {
    return cli::cmd_gen(rules_path, count, out_dir, provider, script_path, g);
  }
  if (learn_dfa_cmd->parsed()) {
    return cli::cmd_learn_dfa(scn_path, alphabet_csv, out_path, cache_path, g);
  }
  if (learn_ltl_cmd->parsed()) {
    return cli::cmd_learn_ltl(pos_dir, neg_dir, max_size, out_path, g);
  }
  if (monitor_cmd->parsed()) {
    return cli::cmd_monitor_check(formula_path, trace_path, scn_path, g);
  }
  if (fuzz_cmd->parsed()) {
    return cli::cmd_fuzz(seeds_dir, formula_path, out_path, jobs, g);
  }
  if (pipeline_cmd->parsed()) {
    return cli::cmd_pipeline(scn_dir, opt_rules, opt_formula, out_dir,
                             script_path, jobs, g);
  }
  if (export_cmd->parsed()) {
    return cli::cmd_export_dot(dfa_path, formula_opt, depth, *out_path, g);
  }
  return cli::kExitError;
}
