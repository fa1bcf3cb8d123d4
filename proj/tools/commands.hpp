#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace cpstest::cli {

// Exit code contract, shared by every subcommand:
//   0  success / property clean
//   1  operational error (bad input, missing file, stage failure)
//   2  findings (validation errors, monitor violation, counterexamples)
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFindings = 2;

struct GlobalOptions {
  PipelineConfig config;
  bool quiet = false;
};

int cmd_parse(const std::string& scn_path,
              const std::optional<std::string>& out_path,
              const GlobalOptions& g);

int cmd_validate(const std::string& scn_path, bool dry_run,
                 const std::optional<std::string>& out_path,
                 const GlobalOptions& g);

int cmd_simulate(const std::string& scn_path, const std::string& events_csv,
                 const std::optional<std::string>& out_path,
                 const GlobalOptions& g);

int cmd_gen(const std::string& rules_path, int count,
            const std::string& out_dir, const std::string& provider_kind,
            const std::optional<std::string>& script_path,
            const GlobalOptions& g);

int cmd_learn_dfa(const std::string& scn_path,
                  const std::optional<std::string>& alphabet_csv,
                  const std::optional<std::string>& out_path,
                  const std::optional<std::string>& cache_path,
                  const GlobalOptions& g);

int cmd_learn_ltl(const std::string& pos_dir, const std::string& neg_dir,
                  int max_size, const std::optional<std::string>& out_path,
                  const GlobalOptions& g);

int cmd_monitor_check(const std::string& formula_path,
                      const std::string& trace_path,
                      const std::string& scn_path, const GlobalOptions& g);

int cmd_fuzz(const std::string& seeds_dir, const std::string& formula_path,
             const std::optional<std::string>& out_path, int jobs,
             const GlobalOptions& g);

int cmd_pipeline(const std::string& scn_dir,
                 const std::optional<std::string>& rules_path,
                 const std::optional<std::string>& formula_path,
                 const std::string& out_dir,
                 const std::optional<std::string>& script_path, int jobs,
                 const GlobalOptions& g);

int cmd_export_dot(const std::optional<std::string>& dfa_path,
                   const std::optional<std::string>& formula_path, int depth,
                   const std::string& out_path, const GlobalOptions& g);

// Formula artifact helpers shared by learn-ltl, monitor-check, fuzz and
// the pipeline: the JSON carries the AST, its text form, the predicate
// names and the speeding threshold.
struct FormulaArtifact {
  ltl::FormulaPtr formula;
  abstraction::PredicateSet predicates;
};

FormulaArtifact load_formula_artifact(const std::string& path);
std::string formula_artifact_json(const ltl::FormulaPtr& f,
                                  const abstraction::PredicateSet& p,
                                  const PipelineConfig& cfg);

}  // namespace cpstest::cli
