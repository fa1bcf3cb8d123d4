#include "cpstest/monitor.hpp"

#include <deque>
#include <sstream>

namespace cpstest::monitor {

const char* to_string(Classification c) {
  switch (c) {
    case Classification::kViolated: return "violated";
    case Classification::kSatisfied: return "satisfied";
    case Classification::kPending: return "pending";
  }
  return "?";
}

namespace {

ltl::FormulaPtr prog(const ltl::FormulaPtr& f, std::uint64_t letter) {
  using namespace ltl;
  switch (f->op) {
    case Op::kTrue:
    case Op::kFalse:
      return f;
    case Op::kAtom:
      return ((letter >> f->atom) & 1u) ? f_true() : f_false();
    case Op::kNot:
      return negate(prog(f->left, letter));
    case Op::kAnd:
      return conj(prog(f->left, letter), prog(f->right, letter));
    case Op::kOr:
      return disj(prog(f->left, letter), prog(f->right, letter));
    case Op::kNext:
      return f->left;
    case Op::kEventually:
      return disj(prog(f->left, letter), f);
    case Op::kGlobally:
      return conj(prog(f->left, letter), f);
    case Op::kUntil:
      return disj(prog(f->right, letter),
                  conj(prog(f->left, letter), f));
  }
  return f;
}

}  // namespace

ltl::FormulaPtr progress(const ltl::FormulaPtr& f, std::uint64_t letter) {
  return ltl::canonical(prog(f, letter));
}

Classification classify(const ltl::FormulaPtr& residue) {
  if (ltl::is_false(residue)) return Classification::kViolated;
  if (ltl::is_true(residue)) return Classification::kSatisfied;
  return Classification::kPending;
}

MonitorAutomaton::MonitorAutomaton(const ltl::FormulaPtr& phi) {
  state_of(ltl::canonical(phi));
}

int MonitorAutomaton::state_of(const ltl::FormulaPtr& residue) {
  std::string key = ltl::to_text(residue);
  std::lock_guard lock(mutex_);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(residues_.size());
  residues_.push_back(residue);
  classes_.push_back(classify(residue));
  index_.emplace(std::move(key), id);
  return id;
}

int MonitorAutomaton::transition(int state, std::uint64_t letter) {
  {
    std::lock_guard lock(mutex_);
    auto it = transitions_.find({state, letter});
    if (it != transitions_.end()) return it->second;
  }
  ltl::FormulaPtr source;
  {
    std::lock_guard lock(mutex_);
    source = residues_[state];
  }
  int target = state_of(progress(source, letter));
  std::lock_guard lock(mutex_);
  transitions_.emplace(std::make_pair(state, letter), target);
  return target;
}

Classification MonitorAutomaton::classification(int state) const {
  std::lock_guard lock(mutex_);
  return classes_[state];
}

const ltl::FormulaPtr& MonitorAutomaton::residue(int state) const {
  std::lock_guard lock(mutex_);
  return residues_[state];
}

std::string MonitorAutomaton::state_text(int state) const {
  std::lock_guard lock(mutex_);
  return ltl::to_text(residues_[state]);
}

int MonitorAutomaton::num_states() const {
  std::lock_guard lock(mutex_);
  return static_cast<int>(residues_.size());
}

std::vector<std::tuple<int, std::uint64_t, int>> MonitorAutomaton::transitions()
    const {
  std::lock_guard lock(mutex_);
  std::vector<std::tuple<int, std::uint64_t, int>> out;
  out.reserve(transitions_.size());
  for (const auto& [key, target] : transitions_) {
    out.emplace_back(key.first, key.second, target);
  }
  return out;
}

std::string MonitorAutomaton::to_dot() const {
  std::lock_guard lock(mutex_);
  std::ostringstream out;
  out << "digraph monitor {\n  rankdir=LR;\n";
  for (std::size_t s = 0; s < residues_.size(); ++s) {
    out << "  s" << s << " [label=\"" << ltl::to_text(residues_[s]) << "\"";
    if (classes_[s] == Classification::kViolated) out << ", peripheries=2";
    out << "];\n";
  }
  for (const auto& [key, target] : transitions_) {
    std::ostringstream label;
    label << std::hex << key.second;
    out << "  s" << key.first << " -> s" << target << " [label=\"0x"
        << label.str() << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

MonitorRunResult monitor_run(MonitorAutomaton& m,
                             const std::vector<std::uint64_t>& letters) {
  MonitorRunResult result;
  int state = m.initial_state();
  result.visited_states.push_back(state);
  for (std::uint64_t letter : letters) {
    if (m.classification(state) != Classification::kPending) break;
    int next = m.transition(state, letter);
    result.visited_transitions.emplace_back(state, letter, next);
    result.visited_states.push_back(next);
    state = next;
  }
  result.final_state = state;
  result.final_class = m.classification(state);
  return result;
}

ReachableSet reachable_state_bound(const ltl::FormulaPtr& phi,
                                   int num_predicates, int max_depth,
                                   std::size_t state_cap) {
  if (max_depth < 1) {
    throw std::invalid_argument("reachable_state_bound: max_depth must be >= 1");
  }
  const std::uint64_t num_letters = 1ull << num_predicates;

  MonitorAutomaton m(phi);
  std::deque<std::pair<int, int>> frontier;  // (state, depth)
  frontier.push_back({0, 0});
  auto partial = [&](std::size_t limit) {
    std::vector<std::string> states;
    for (int s = 0; s < m.num_states() && states.size() < limit; ++s) {
      states.push_back(m.state_text(s));
    }
    return states;
  };

  while (!frontier.empty()) {
    auto [state, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= max_depth) continue;
    if (m.classification(state) != Classification::kPending) continue;
    for (std::uint64_t letter = 0; letter < num_letters; ++letter) {
      int before = m.num_states();
      int target = m.transition(state, letter);
      if (static_cast<std::size_t>(m.num_states()) > state_cap) {
        throw StateExplosion("monitor reachable set exceeds cap",
                             partial(state_cap));
      }
      if (target >= before) frontier.push_back({target, depth + 1});
    }
  }

  ReachableSet set;
  set.states = partial(static_cast<std::size_t>(m.num_states()));
  for (const auto& [from, letter, to] : m.transitions()) {
    set.transitions.emplace_back(m.state_text(from), letter,
                                 m.state_text(to));
  }
  return set;
}

}  // namespace cpstest::monitor
