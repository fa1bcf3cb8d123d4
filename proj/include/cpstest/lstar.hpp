#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpstest::lstar {

// Words are sequences of symbol indices into an external alphabet.
using Word = std::vector<int>;

struct Dfa {
  int num_states = 0;
  int initial = 0;
  std::set<int> accepting;
  // transitions[state][symbol]
  std::vector<std::vector<int>> transitions;
  std::vector<std::string> symbol_names;  // optional, for export

  int alphabet_size() const {
    return transitions.empty() ? 0
                               : static_cast<int>(transitions[0].size());
  }

  std::string to_json() const;
  static Dfa from_json(const std::string& text);
  std::string to_dot() const;
};

bool dfa_accepts(const Dfa& d, const Word& w);

// Trims unreachable states, then Moore partition refinement.
Dfa minimize(const Dfa& d);

// Isomorphism after minimizing both sides (canonical BFS relabeling).
bool dfa_isomorphic(const Dfa& a, const Dfa& b);

class Teacher {
 public:
  virtual ~Teacher() = default;
  virtual bool member(const Word& w) = 0;
  virtual std::optional<Word> equivalent(const Dfa& hypothesis) = 0;
};

// Shortlex order; the canonical word order promised by the concurrency
// contract for merged membership results.
bool shortlex_less(const Word& a, const Word& b);

struct ObservationTable {
  int alphabet_size = 0;
  std::vector<Word> prefixes;  // S, shortlex-sorted, unique
  std::vector<Word> suffixes;  // E, shortlex-sorted, unique
  std::map<Word, bool> entries;

  bool has_prefix(const Word& w) const;
  std::vector<bool> row(const Word& prefix) const;
};

class TableError : public std::logic_error {
 public:
  explicit TableError(const std::string& what) : std::logic_error(what) {}
};

// Fills missing entries, then promotes unmatched S.Sigma rows into S and
// adds distinguishing suffixes until the table is closed and consistent.
// Only ever adds prefixes/suffixes.
void close_and_consistify(ObservationTable& tbl, Teacher& teacher);

bool is_closed(const ObservationTable& tbl, Word* witness = nullptr);
bool is_consistent(const ObservationTable& tbl, Word* new_suffix = nullptr);

// Throws TableError{NotClosed,NotConsistent} when the preconditions fail.
Dfa hypothesis_of(const ObservationTable& tbl);

struct LearnResult {
  Dfa dfa;
  bool converged = false;  // equivalence query returned no counterexample
  int rounds = 0;
  std::size_t membership_queries = 0;
};

// Classic Angluin: counterexamples are absorbed by adding all their
// prefixes to S. Gives up after max_rounds counterexamples and returns
// the best hypothesis with converged = false.
LearnResult learn(Teacher& teacher, int alphabet_size, int max_rounds = 64);

// Memoizes membership answers; cache can be exported/imported (the CLI
// persists it across invocations, a simulator query costs a full run).
class CachingTeacher : public Teacher {
 public:
  using MemberFn = std::function<bool(const Word&)>;
  using EquivalentFn = std::function<std::optional<Word>(const Dfa&)>;

  CachingTeacher(MemberFn member, EquivalentFn equivalent)
      : member_(std::move(member)), equivalent_(std::move(equivalent)) {}

  explicit CachingTeacher(MemberFn member) : member_(std::move(member)) {}

  void set_equivalent(EquivalentFn fn) { equivalent_ = std::move(fn); }

  bool member(const Word& w) override;
  std::optional<Word> equivalent(const Dfa& hypothesis) override;

  const std::map<Word, bool>& cache() const { return cache_; }
  void preload(const std::map<Word, bool>& entries);

 private:
  MemberFn member_;
  EquivalentFn equivalent_;
  std::map<Word, bool> cache_;
};

// Exhaustive equivalence up to word length max_len, realized as a BFS over
// the product automaton (same verdicts as enumerating all words, returns a
// shortest counterexample in shortlex order).
std::optional<Word> exhaustive_equivalence(const Dfa& hypothesis,
                                           const Dfa& target, int max_len);

// Random falsification: samples words with geometric length (continue
// probability 3/4, capped at max_len) and uniform symbols from a
// deterministic PRNG; first disagreement wins.
std::optional<Word> random_word_equivalence(
    const Dfa& hypothesis, const std::function<bool(const Word&)>& member,
    int budget, int max_len, std::uint64_t rng_seed);

}  // namespace cpstest::lstar
