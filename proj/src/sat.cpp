#include "cpstest/sat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cpstest::sat {

void Cnf::add_clause(Clause c) { clauses.push_back(std::move(c)); }

void Cnf::check() const {
  for (const Clause& c : clauses) {
    for (Lit l : c) {
      if (l == 0 || std::abs(l) > num_vars) {
        throw std::invalid_argument("CNF literal out of range");
      }
    }
  }
}

bool verify(const Cnf& cnf, const Assignment& a) {
  if (a.values.size() != static_cast<std::size_t>(cnf.num_vars) + 1) {
    return false;
  }
  for (const Clause& c : cnf.clauses) {
    bool sat = false;
    for (Lit l : c) {
      bool v = a.values[static_cast<std::size_t>(std::abs(l))];
      if ((l > 0) == v) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

namespace {

// Literal encoding: variable v -> 2v (positive), 2v+1 (negative).
inline int lit_index(Lit l) {
  return l > 0 ? 2 * l : -2 * l + 1;
}

inline int lit_neg(int enc) { return enc ^ 1; }
inline int lit_var(int enc) { return enc >> 1; }
inline bool lit_sign(int enc) { return (enc & 1) != 0; }  // true = negated

enum : std::int8_t { kUndef = 0, kTrue = 1, kFalse = -1 };

// Luby sequence (1-based): 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
std::uint32_t luby(std::uint32_t i) {
  for (;;) {
    std::uint32_t k = 1;
    while (((1u << k) - 1) < i) ++k;
    if (((1u << k) - 1) == i) return 1u << (k - 1);
    i -= (1u << (k - 1)) - 1;
  }
}

class Solver {
 public:
  explicit Solver(const Cnf& cnf) : num_vars_(cnf.num_vars) {
    value_.assign(num_vars_ + 1, kUndef);
    level_.assign(num_vars_ + 1, 0);
    reason_.assign(num_vars_ + 1, -1);
    activity_.assign(num_vars_ + 1, 0.0);
    seen_.assign(num_vars_ + 1, 0);
    watches_.assign(2 * num_vars_ + 2, {});
    for (const Clause& c : cnf.clauses) {
      if (!add_clause(c)) {
        trivially_unsat_ = true;
        return;
      }
    }
  }

  std::optional<Assignment> solve() {
    if (trivially_unsat_) return std::nullopt;
    if (propagate() >= 0) return std::nullopt;

    std::uint32_t restart_count = 1;
    std::uint64_t conflict_budget = 64ull * luby(restart_count);
    std::uint64_t conflicts_here = 0;

    for (;;) {
      int confl = propagate();
      if (confl >= 0) {
        ++conflicts_here;
        if (decision_level() == 0) return std::nullopt;
        analyze_and_backjump(confl);
      } else {
        if (conflicts_here >= conflict_budget) {
          conflicts_here = 0;
          conflict_budget = 64ull * luby(++restart_count);
          backtrack_to(0);
          continue;
        }
        int var = pick_branch_var();
        if (var == 0) {
          Assignment a;
          a.values.assign(num_vars_ + 1, false);
          for (int v = 1; v <= num_vars_; ++v) a.values[v] = value_[v] == kTrue;
          return a;
        }
        trail_lim_.push_back(trail_.size());
        // Branch false first: decoders prefer sparse structural variables.
        enqueue(2 * var + 1, -1);
      }
    }
  }

 private:
  bool add_clause(const Clause& raw) {
    // Deduplicate and drop tautologies.
    std::vector<int> lits;
    for (Lit l : raw) lits.push_back(lit_index(l));
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 0; i + 1 < lits.size(); ++i) {
      if (lits[i + 1] == lit_neg(lits[i])) return true;  // tautology
    }
    if (lits.empty()) return false;
    if (lits.size() == 1) {
      // Unit at level 0.
      int enc = lits[0];
      if (value_of(enc) == kFalse) return false;
      if (value_of(enc) == kUndef) enqueue(enc, -1);
      return true;
    }
    int id = static_cast<int>(clauses_.size());
    clauses_.push_back(lits);
    watches_[lits[0]].push_back(id);
    watches_[lits[1]].push_back(id);
    return true;
  }

  std::int8_t value_of(int enc) const {
    std::int8_t v = value_[lit_var(enc)];
    if (v == kUndef) return kUndef;
    return lit_sign(enc) ? static_cast<std::int8_t>(-v) : v;
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(int enc, int reason) {
    int var = lit_var(enc);
    value_[var] = lit_sign(enc) ? kFalse : kTrue;
    level_[var] = decision_level();
    reason_[var] = reason;
    trail_.push_back(enc);
  }

  // Returns conflicting clause id or -1.
  int propagate() {
    while (qhead_ < trail_.size()) {
      int enc = trail_[qhead_++];
      int falsified = lit_neg(enc);
      auto& watch_list = watches_[falsified];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < watch_list.size(); ++i) {
        int id = watch_list[i];
        auto& c = clauses_[id];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        // c[1] == falsified now.
        if (value_of(c[0]) == kTrue) {
          watch_list[keep++] = id;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value_of(c[k]) != kFalse) {
            std::swap(c[1], c[k]);
            watches_[c[1]].push_back(id);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        watch_list[keep++] = id;
        if (value_of(c[0]) == kFalse) {
          // Conflict: restore untouched tail of the watch list.
          for (std::size_t k = i + 1; k < watch_list.size(); ++k) {
            watch_list[keep++] = watch_list[k];
          }
          watch_list.resize(keep);
          qhead_ = trail_.size();
          return id;
        }
        enqueue(c[0], id);
      }
      watch_list.resize(keep);
    }
    return -1;
  }

  void bump(int var) {
    activity_[var] += activity_inc_;
    if (activity_[var] > 1e100) {
      for (int v = 1; v <= num_vars_; ++v) activity_[v] *= 1e-100;
      activity_inc_ *= 1e-100;
    }
  }

  void analyze_and_backjump(int confl) {
    // First UIP.
    std::vector<int> learnt{0};  // slot 0 for the asserting literal
    int counter = 0;
    int enc = -1;
    std::size_t index = trail_.size();
    int btlevel = 0;

    int reason = confl;
    bool first = true;
    for (;;) {
      const auto& c = clauses_[reason];
      // For a reason clause, c[0] is the literal being resolved on.
      std::size_t start = first ? 0 : 1;
      first = false;
      for (std::size_t k = start; k < c.size(); ++k) {
        int q = c[k];
        int var = lit_var(q);
        if (!seen_[var] && level_[var] > 0) {
          seen_[var] = 1;
          bump(var);
          if (level_[var] == decision_level()) {
            ++counter;
          } else {
            learnt.push_back(q);
            btlevel = std::max(btlevel, level_[var]);
          }
        }
      }
      // Walk back the trail to the next marked literal.
      do {
        --index;
        enc = trail_[index];
      } while (!seen_[lit_var(enc)]);
      seen_[lit_var(enc)] = 0;
      --counter;
      if (counter == 0) break;
      reason = reason_[lit_var(enc)];
    }
    learnt[0] = lit_neg(enc);
    for (std::size_t k = 1; k < learnt.size(); ++k) seen_[lit_var(learnt[k])] = 0;

    activity_inc_ *= 1.0 / 0.95;

    backtrack_to(btlevel);
    if (learnt.size() == 1) {
      enqueue(learnt[0], -1);
      return;
    }
    // Watch the asserting literal and one literal from btlevel.
    for (std::size_t k = 2; k < learnt.size(); ++k) {
      if (level_[lit_var(learnt[k])] > level_[lit_var(learnt[1])]) {
        std::swap(learnt[1], learnt[k]);
      }
    }
    int id = static_cast<int>(clauses_.size());
    clauses_.push_back(learnt);
    watches_[learnt[0]].push_back(id);
    watches_[learnt[1]].push_back(id);
    enqueue(learnt[0], id);
  }

  void backtrack_to(int target_level) {
    while (decision_level() > target_level) {
      std::size_t limit = trail_lim_.back();
      trail_lim_.pop_back();
      while (trail_.size() > limit) {
        int var = lit_var(trail_.back());
        value_[var] = kUndef;
        reason_[var] = -1;
        trail_.pop_back();
      }
    }
    if (qhead_ > trail_.size()) qhead_ = trail_.size();
  }

  int pick_branch_var() {
    int best = 0;
    double best_activity = -1.0;
    for (int v = 1; v <= num_vars_; ++v) {
      if (value_[v] == kUndef && activity_[v] > best_activity) {
        best = v;
        best_activity = activity_[v];
      }
    }
    return best;
  }

  int num_vars_;
  bool trivially_unsat_ = false;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::int8_t> value_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<double> activity_;
  std::vector<char> seen_;
  std::vector<int> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  double activity_inc_ = 1.0;
};

}  // namespace

std::optional<Assignment> solve(const Cnf& cnf) {
  cnf.check();
  Solver solver(cnf);
  auto result = solver.solve();
  if (result && !verify(cnf, *result)) {
    throw std::logic_error("sat::solve produced an assignment that fails "
                           "verification");
  }
  return result;
}

}  // namespace cpstest::sat
