#include "config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cpstest::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& what, int line) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " +
                           what);
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

PipelineConfig PipelineConfig::from_text(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad("malformed section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "simulator" && section != "lstar" && section != "sat" &&
          section != "fuzz" && section != "llm") {
        bad("unknown section '" + section + "'", line_no);
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) bad("expected key = value", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) bad("key outside any section", line_no);

    auto as_double = [&]() { return std::stod(value); };
    auto as_int = [&]() { return std::stoi(value); };
    auto as_u64 = [&]() { return std::stoull(value); };
    auto as_bool = [&]() {
      if (value == "true") return true;
      if (value == "false") return false;
      bad("expected true/false", line_no);
    };

    if (section == "simulator") {
      if (key == "dt") cfg.sim.dt = as_double();
      else if (key == "max_steps") cfg.sim.max_steps = as_int();
      else if (key == "comfortable_decel") cfg.sim.comfortable_decel = as_double();
      else if (key == "collision_gap") cfg.sim.collision_gap = as_double();
      else if (key == "stop_zone") cfg.sim.stop_zone = as_double();
      else if (key == "sample_words") cfg.sample_words = as_int();
      else if (key == "sample_word_len") cfg.sample_word_len = as_int();
      else bad("unknown key '" + key + "' in [simulator]", line_no);
    } else if (section == "lstar") {
      if (key == "eq_budget") cfg.eq_budget = as_int();
      else if (key == "eq_max_len") cfg.eq_max_len = as_int();
      else if (key == "max_rounds") cfg.max_rounds = as_int();
      else bad("unknown key '" + key + "' in [lstar]", line_no);
    } else if (section == "sat") {
      if (key == "max_size") cfg.max_formula_size = as_int();
      else bad("unknown key '" + key + "' in [sat]", line_no);
    } else if (section == "fuzz") {
      if (key == "budget") cfg.fuzz.budget_execs = as_u64();
      else if (key == "rng_seed") cfg.fuzz.rng_seed = as_u64();
      else if (key == "traversal") cfg.fuzz.traversal = fuzz::traversal_from_string(value);
      else if (key == "stop_on_first") cfg.fuzz.stop_on_first = as_bool();
      else if (key == "monitor_depth") cfg.fuzz.monitor_depth = as_int();
      else if (key.rfind("weight_", 0) == 0) {
        std::string op = key.substr(7);
        if (!cfg.fuzz.weights.count(op)) {
          bad("unknown mutation operator '" + op + "'", line_no);
        }
        cfg.fuzz.weights[op] = as_double();
      } else {
        bad("unknown key '" + key + "' in [fuzz]", line_no);
      }
    } else if (section == "llm") {
      if (key == "count") cfg.llm_count = as_int();
      else if (key == "max_repair_rounds") cfg.llm_max_repair_rounds = as_int();
      else bad("unknown key '" + key + "' in [llm]", line_no);
    }
  }
  return cfg;
}

std::string PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["simulator"] = {{"dt", sim.dt},
                    {"max_steps", sim.max_steps},
                    {"comfortable_decel", sim.comfortable_decel},
                    {"collision_gap", sim.collision_gap},
                    {"stop_zone", sim.stop_zone},
                    {"sample_words", sample_words},
                    {"sample_word_len", sample_word_len}};
  j["lstar"] = {{"eq_budget", eq_budget},
                {"eq_max_len", eq_max_len},
                {"max_rounds", max_rounds}};
  j["sat"] = {{"max_size", max_formula_size}};
  j["fuzz"] = {{"budget", fuzz.budget_execs},
               {"rng_seed", fuzz.rng_seed},
               {"traversal", fuzz::to_string(fuzz.traversal)},
               {"stop_on_first", fuzz.stop_on_first},
               {"monitor_depth", fuzz.monitor_depth},
               {"weights", fuzz.weights}};
  j["llm"] = {{"count", llm_count},
              {"max_repair_rounds", llm_max_repair_rounds}};
  j["rng_seed"] = rng_seed;
  return j.dump(2);
}

}  // namespace cpstest::cli
