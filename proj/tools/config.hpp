#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "cpstest/fuzzer.hpp"
#include "cpstest/sim.hpp"

namespace cpstest::cli {

// Plain-text config: INI-style sections [simulator] [lstar] [sat] [fuzz]
// [llm], `key = value` lines, `#` comments. Unknown sections or keys are
// hard errors. Flags override file values, file values override defaults;
// the fully resolved config is echoed into every artifact.
struct PipelineConfig {
  // [simulator]
  sim::SimConfig sim;
  int sample_words = 16;     // event words sampled per scenario for labeling
  int sample_word_len = 4;

  // [lstar]
  int eq_budget = 2000;
  int eq_max_len = 12;
  int max_rounds = 64;

  // [sat]
  int max_formula_size = 6;

  // [fuzz]
  fuzz::FuzzConfig fuzz;

  // [llm]
  int llm_count = 5;
  int llm_max_repair_rounds = 3;

  std::uint64_t rng_seed = 1;

  static PipelineConfig from_file(const std::string& path);
  static PipelineConfig from_text(const std::string& text);

  // Echo of every resolved value, embedded into artifacts for provenance.
  std::string to_json() const;
};

}  // namespace cpstest::cli
