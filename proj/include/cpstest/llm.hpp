#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpstest/dsl.hpp"

namespace cpstest::llm {

inline constexpr const char* kPromptTemplateVersion = "prompt-v1";

struct CompletionParams {
  int max_tokens = 1024;
  double temperature = 0.7;
};

class ProviderError : public std::runtime_error {
 public:
  explicit ProviderError(const std::string& what) : std::runtime_error(what) {}
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const std::string& prompt,
                               const CompletionParams& params) = 0;
};

// Scripted provider: replies come from a fixed list, consumed in order.
// Running past the end raises ProviderError. The whole test suite runs on
// this; no network involved.
class MockProvider : public Provider {
 public:
  explicit MockProvider(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}

  static MockProvider from_script_json(const std::string& json_text);

  std::string complete(const std::string& prompt,
                       const CompletionParams& params) override;

  std::size_t consumed() const { return next_; }

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

// JSON-over-HTTP adapter: POST {prompt, max_tokens, temperature} to the
// configured endpoint, response {text}. Endpoint/credentials come from
// CPSTEST_LLM_ENDPOINT, CPSTEST_LLM_API_KEY, CPSTEST_LLM_MODEL. Retries 3
// times with exponential backoff starting at 1 s.
class HttpProvider : public Provider {
 public:
  struct Options {
    std::string endpoint;  // http://host:port/path
    std::string api_key;
    std::string model;
    int max_attempts = 3;
    int initial_backoff_ms = 1000;
  };

  explicit HttpProvider(Options options) : options_(std::move(options)) {}

  // Reads the CPSTEST_LLM_* environment variables.
  static HttpProvider from_environment();

  std::string complete(const std::string& prompt,
                       const CompletionParams& params) override;

 private:
  Options options_;
};

struct GenerationJob {
  std::string rule_text;
  int count = 1;
  int max_repair_rounds = 3;
};

struct Provenance {
  std::string template_version;
  std::vector<std::string> raw_texts;  // one per round, first is original
  int repair_rounds = 0;
};

struct GenerationResult {
  std::vector<std::pair<dsl::Scenario, Provenance>> accepted;
  std::vector<std::pair<std::string, dsl::ValidationReport>> rejected;
  std::optional<std::string> provider_error;  // set when the job aborted

  std::string to_json() const;
};

// Deterministic prompt: embeds the rule text verbatim, the grammar
// reference, and the number of scenarios wanted.
std::string build_prompt(const std::string& rule_text,
                         const std::string& grammar_doc, int n);

std::string build_repair_prompt(const std::string& previous_text,
                                const dsl::ValidationReport& report,
                                const std::string& grammar_doc);

// One completion per candidate, each pushed through parse -> semantic
// validation -> dry run; failures get up to max_repair_rounds repair
// completions (temperature 0) with the diagnostics embedded. Candidates
// that still fail land in `rejected` with their final report.
GenerationResult generate_scenarios(const GenerationJob& job,
                                    Provider& provider);

}  // namespace cpstest::llm
