#include "cpstest/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "cpstest/util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cpstest::llm {

MockProvider MockProvider::from_script_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_array()) {
    throw ProviderError("mock script must be a JSON array of reply strings");
  }
  std::vector<std::string> replies;
  for (const auto& r : j) replies.push_back(r.get<std::string>());
  return MockProvider(std::move(replies));
}

std::string MockProvider::complete(const std::string&,
                                   const CompletionParams&) {
  if (next_ >= replies_.size()) {
    throw ProviderError("mock provider script exhausted after " +
                        std::to_string(replies_.size()) + " replies");
  }
  return replies_[next_++];
}

HttpProvider HttpProvider::from_environment() {
  Options opts;
  const char* endpoint = std::getenv("CPSTEST_LLM_ENDPOINT");
  if (!endpoint) {
    throw ProviderError("CPSTEST_LLM_ENDPOINT is not set");
  }
  opts.endpoint = endpoint;
  if (const char* key = std::getenv("CPSTEST_LLM_API_KEY")) opts.api_key = key;
  if (const char* model = std::getenv("CPSTEST_LLM_MODEL")) opts.model = model;
  return HttpProvider(std::move(opts));
}

std::string HttpProvider::complete(const std::string& prompt,
                                   const CompletionParams& params) {
  // Split endpoint into host and path.
  std::string url = options_.endpoint;
  std::string scheme_sep = "://";
  auto scheme_pos = url.find(scheme_sep);
  if (scheme_pos == std::string::npos) {
    throw ProviderError("endpoint must include a scheme: " + url);
  }
  auto path_pos = url.find('/', scheme_pos + scheme_sep.size());
  std::string host = path_pos == std::string::npos
                         ? url
                         : url.substr(0, path_pos);
  std::string path = path_pos == std::string::npos ? "/" : url.substr(path_pos);

  nlohmann::json body;
  body["prompt"] = prompt;
  body["max_tokens"] = params.max_tokens;
  body["temperature"] = params.temperature;
  if (!options_.model.empty()) body["model"] = options_.model;

  std::string last_error;
  int backoff_ms = options_.initial_backoff_ms;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    httplib::Client client(host);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "connection failed";
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body).at("text").get<std::string>();
    } catch (const std::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
    }
  }
  throw ProviderError("provider unreachable after " +
                      std::to_string(options_.max_attempts) +
                      " attempts: " + last_error);
}

std::string build_prompt(const std::string& rule_text,
                         const std::string& grammar_doc, int n) {
  if (rule_text.empty() || grammar_doc.empty() || n < 1) {
    throw std::invalid_argument("build_prompt: inputs must be nonempty");
  }
  std::ostringstream out;
  out << "[" << kPromptTemplateVersion << "]\n";
  out << "You write driving test scenarios in a small scenario language.\n";
  out << "Produce exactly " << n
      << " scenario(s), each a single complete `scenario` block and nothing "
         "else.\n\n";
  out << "The scenarios must exercise the following traffic rule:\n";
  out << "--- rule ---\n" << rule_text << "\n--- end rule ---\n\n";
  out << "Language reference:\n" << grammar_doc << "\n";
  return out.str();
}

std::string build_repair_prompt(const std::string& previous_text,
                                const dsl::ValidationReport& report,
                                const std::string& grammar_doc) {
  std::ostringstream out;
  out << "[" << kPromptTemplateVersion << "]\n";
  out << "The scenario below was rejected. Fix it and reply with the "
         "corrected scenario block only.\n\n";
  out << "Problems found:\n";
  for (const auto& d : report.diagnostics) {
    const char* stage = d.stage == dsl::Stage::kSyntax     ? "syntax"
                        : d.stage == dsl::Stage::kSemantic ? "semantic"
                                                           : "dry_run";
    out << "- [" << stage << "] line " << d.span.line << ": " << d.message
        << "\n";
  }
  out << "\nRejected scenario:\n" << previous_text << "\n\n";
  out << "Language reference:\n" << grammar_doc << "\n";
  return out.str();
}

namespace {

// Stage 1 parse, stage 2 semantic, stage 3 dry run; all failures as data.
dsl::ValidationReport validate_candidate(const std::string& text,
                                         std::optional<dsl::Scenario>* parsed) {
  dsl::ValidationReport report;
  try {
    dsl::Scenario s = dsl::parse_scenario(text);
    *parsed = s;
  } catch (const dsl::ParseError& e) {
    dsl::Diagnostic d;
    d.stage = dsl::Stage::kSyntax;
    d.severity = dsl::Severity::kError;
    d.message = e.what();
    d.span.line = e.line();
    d.span.column = e.column();
    report.diagnostics.push_back(std::move(d));
    return report;
  }
  return dsl::validate_scenario(**parsed, /*run_dry=*/true);
}

}  // namespace

GenerationResult generate_scenarios(const GenerationJob& job,
                                    Provider& provider) {
  if (job.count < 1 || job.rule_text.empty()) {
    throw std::invalid_argument("generate_scenarios: bad job");
  }
  const std::string& grammar = dsl::grammar_reference();
  GenerationResult result;

  for (int candidate = 0; candidate < job.count; ++candidate) {
    Provenance prov;
    prov.template_version = kPromptTemplateVersion;

    std::string text;
    try {
      text = provider.complete(build_prompt(job.rule_text, grammar, 1),
                               {1024, 0.7});
    } catch (const ProviderError& e) {
      result.provider_error = e.what();
      return result;  // abort with partial results
    }

    dsl::ValidationReport report;
    std::optional<dsl::Scenario> parsed;
    bool accepted = false;
    for (int round = 0; round <= job.max_repair_rounds; ++round) {
      prov.raw_texts.push_back(text);
      prov.repair_rounds = round;
      parsed.reset();
      report = validate_candidate(text, &parsed);
      if (report.valid() && parsed) {
        result.accepted.emplace_back(std::move(*parsed), prov);
        accepted = true;
        break;
      }
      if (round == job.max_repair_rounds) break;
      try {
        text = provider.complete(build_repair_prompt(text, report, grammar),
                                 {1024, 0.0});
      } catch (const ProviderError& e) {
        result.provider_error = e.what();
        result.rejected.emplace_back(text, std::move(report));
        return result;
      }
    }
    if (!accepted) {
      result.rejected.emplace_back(prov.raw_texts.back(), std::move(report));
    }
  }
  return result;
}

std::string GenerationResult::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["accepted"] = nlohmann::ordered_json::array();
  for (const auto& [scenario, prov] : accepted) {
    nlohmann::ordered_json ja;
    ja["name"] = scenario.name;
    ja["scenario"] = dsl::serialize_scenario(scenario);
    ja["template_version"] = prov.template_version;
    ja["repair_rounds"] = prov.repair_rounds;
    ja["raw_texts"] = prov.raw_texts;
    j["accepted"].push_back(std::move(ja));
  }
  j["rejected"] = nlohmann::ordered_json::array();
  for (const auto& [text, report] : rejected) {
    nlohmann::ordered_json jr;
    jr["raw_text"] = text;
    jr["report"] = nlohmann::ordered_json::parse(report.to_json());
    j["rejected"].push_back(std::move(jr));
  }
  if (provider_error) j["provider_error"] = *provider_error;
  return j.dump(2);
}

}  // namespace cpstest::llm
