#include "cpstest/lstar.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "cpstest/util.hpp"
#include "json.hpp"

namespace cpstest::lstar {

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

bool dfa_accepts(const Dfa& d, const Word& w) {
  int state = d.initial;
  for (int symbol : w) {
    state = d.transitions[state][symbol];
  }
  return d.accepting.count(state) > 0;
}

Dfa minimize(const Dfa& d) {
  const int sigma = d.alphabet_size();

  // Trim to reachable states.
  std::vector<int> remap(d.num_states, -1);
  std::vector<int> order;
  std::deque<int> queue{d.initial};
  remap[d.initial] = 0;
  order.push_back(d.initial);
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < sigma; ++a) {
      int t = d.transitions[s][a];
      if (remap[t] < 0) {
        remap[t] = static_cast<int>(order.size());
        order.push_back(t);
        queue.push_back(t);
      }
    }
  }

  const int n = static_cast<int>(order.size());
  std::vector<std::vector<int>> trans(n, std::vector<int>(sigma));
  std::vector<bool> acc(n, false);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < sigma; ++a) {
      trans[i][a] = remap[d.transitions[order[i]][a]];
    }
    acc[i] = d.accepting.count(order[i]) > 0;
  }

  // Moore refinement.
  std::vector<int> cls(n);
  for (int i = 0; i < n; ++i) cls[i] = acc[i] ? 1 : 0;
  for (;;) {
    std::map<std::vector<int>, int> signature_class;
    std::vector<int> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> signature{cls[i]};
      for (int a = 0; a < sigma; ++a) signature.push_back(cls[trans[i][a]]);
      auto [it, inserted] = signature_class.emplace(
          std::move(signature), static_cast<int>(signature_class.size()));
      next[i] = it->second;
    }
    if (next == cls) break;
    cls = next;
  }

  int num_classes = *std::max_element(cls.begin(), cls.end()) + 1;
  Dfa out;
  out.num_states = num_classes;
  out.initial = cls[0];
  out.transitions.assign(num_classes, std::vector<int>(sigma, 0));
  out.symbol_names = d.symbol_names;
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < sigma; ++a) out.transitions[cls[i]][a] = cls[trans[i][a]];
    if (acc[i]) out.accepting.insert(cls[i]);
  }
  return out;
}

namespace {

// Canonical state numbering by BFS visiting symbols in order; minimized
// DFAs are isomorphic iff their canonical tables match.
std::pair<std::vector<std::vector<int>>, std::vector<bool>> canonical_table(
    const Dfa& d) {
  const int sigma = d.alphabet_size();
  std::vector<int> remap(d.num_states, -1);
  std::vector<int> order{d.initial};
  remap[d.initial] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    int s = order[head];
    for (int a = 0; a < sigma; ++a) {
      int t = d.transitions[s][a];
      if (remap[t] < 0) {
        remap[t] = static_cast<int>(order.size());
        order.push_back(t);
      }
    }
  }
  std::vector<std::vector<int>> table(order.size(), std::vector<int>(sigma));
  std::vector<bool> acc(order.size(), false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int a = 0; a < sigma; ++a) {
      table[i][a] = remap[d.transitions[order[i]][a]];
    }
    acc[i] = d.accepting.count(order[i]) > 0;
  }
  return {table, acc};
}

}  // namespace

bool dfa_isomorphic(const Dfa& a, const Dfa& b) {
  if (a.alphabet_size() != b.alphabet_size()) return false;
  Dfa ma = minimize(a);
  Dfa mb = minimize(b);
  if (ma.num_states != mb.num_states) return false;
  return canonical_table(ma) == canonical_table(mb);
}

bool ObservationTable::has_prefix(const Word& w) const {
  return std::find(prefixes.begin(), prefixes.end(), w) != prefixes.end();
}

std::vector<bool> ObservationTable::row(const Word& prefix) const {
  std::vector<bool> r;
  r.reserve(suffixes.size());
  for (const Word& e : suffixes) {
    Word w = prefix;
    w.insert(w.end(), e.begin(), e.end());
    auto it = entries.find(w);
    if (it == entries.end()) {
      throw TableError("observation table entry missing");
    }
    r.push_back(it->second);
  }
  return r;
}

namespace {

void insert_sorted(std::vector<Word>& words, const Word& w) {
  auto it = std::lower_bound(words.begin(), words.end(), w, shortlex_less);
  if (it == words.end() || *it != w) words.insert(it, w);
}

void fill_entries(ObservationTable& tbl, Teacher& teacher) {
  auto ask = [&](const Word& w) {
    if (!tbl.entries.count(w)) tbl.entries[w] = teacher.member(w);
  };
  for (const Word& s : tbl.prefixes) {
    for (const Word& e : tbl.suffixes) {
      Word w = s;
      w.insert(w.end(), e.begin(), e.end());
      ask(w);
    }
    for (int a = 0; a < tbl.alphabet_size; ++a) {
      Word sa = s;
      sa.push_back(a);
      for (const Word& e : tbl.suffixes) {
        Word w = sa;
        w.insert(w.end(), e.begin(), e.end());
        ask(w);
      }
    }
  }
}

}  // namespace

bool is_closed(const ObservationTable& tbl, Word* witness) {
  std::set<std::vector<bool>> prefix_rows;
  for (const Word& s : tbl.prefixes) prefix_rows.insert(tbl.row(s));
  for (const Word& s : tbl.prefixes) {
    for (int a = 0; a < tbl.alphabet_size; ++a) {
      Word sa = s;
      sa.push_back(a);
      if (tbl.has_prefix(sa)) continue;
      if (!prefix_rows.count(tbl.row(sa))) {
        if (witness) *witness = sa;
        return false;
      }
    }
  }
  return true;
}

bool is_consistent(const ObservationTable& tbl, Word* new_suffix) {
  for (std::size_t i = 0; i < tbl.prefixes.size(); ++i) {
    for (std::size_t j = i + 1; j < tbl.prefixes.size(); ++j) {
      if (tbl.row(tbl.prefixes[i]) != tbl.row(tbl.prefixes[j])) continue;
      for (int a = 0; a < tbl.alphabet_size; ++a) {
        Word sa = tbl.prefixes[i];
        sa.push_back(a);
        Word ta = tbl.prefixes[j];
        ta.push_back(a);
        auto row_sa = tbl.row(sa);
        auto row_ta = tbl.row(ta);
        if (row_sa == row_ta) continue;
        for (std::size_t e = 0; e < tbl.suffixes.size(); ++e) {
          if (row_sa[e] != row_ta[e]) {
            if (new_suffix) {
              Word ae{a};
              ae.insert(ae.end(), tbl.suffixes[e].begin(),
                        tbl.suffixes[e].end());
              *new_suffix = ae;
            }
            return false;
          }
        }
      }
    }
  }
  return true;
}

void close_and_consistify(ObservationTable& tbl, Teacher& teacher) {
  if (tbl.prefixes.empty()) tbl.prefixes.push_back({});
  if (tbl.suffixes.empty()) tbl.suffixes.push_back({});
  fill_entries(tbl, teacher);
  for (;;) {
    Word witness;
    if (!is_closed(tbl, &witness)) {
      insert_sorted(tbl.prefixes, witness);
      fill_entries(tbl, teacher);
      continue;
    }
    Word suffix;
    if (!is_consistent(tbl, &suffix)) {
      insert_sorted(tbl.suffixes, suffix);
      fill_entries(tbl, teacher);
      continue;
    }
    return;
  }
}

Dfa hypothesis_of(const ObservationTable& tbl) {
  Word witness;
  if (!is_closed(tbl, &witness)) throw TableError("NotClosed");
  if (!is_consistent(tbl)) throw TableError("NotConsistent");

  // States are the distinct rows of S, numbered by first occurrence in
  // shortlex prefix order.
  std::map<std::vector<bool>, int> row_state;
  std::vector<const Word*> representative;
  for (const Word& s : tbl.prefixes) {
    auto row = tbl.row(s);
    if (!row_state.count(row)) {
      row_state.emplace(row, static_cast<int>(representative.size()));
      representative.push_back(&s);
    }
  }

  Dfa d;
  d.num_states = static_cast<int>(representative.size());
  d.initial = row_state.at(tbl.row(Word{}));
  d.transitions.assign(d.num_states, std::vector<int>(tbl.alphabet_size, 0));

  // The empty suffix is in E by construction; locate it for acceptance.
  std::size_t eps_index =
      std::find(tbl.suffixes.begin(), tbl.suffixes.end(), Word{}) -
      tbl.suffixes.begin();
  if (eps_index == tbl.suffixes.size()) {
    throw TableError("empty suffix missing from E");
  }

  for (std::size_t i = 0; i < representative.size(); ++i) {
    const Word& s = *representative[i];
    auto row = tbl.row(s);
    if (row[eps_index]) d.accepting.insert(static_cast<int>(i));
    for (int a = 0; a < tbl.alphabet_size; ++a) {
      Word sa = s;
      sa.push_back(a);
      d.transitions[i][a] = row_state.at(tbl.row(sa));
    }
  }
  return d;
}

LearnResult learn(Teacher& teacher, int alphabet_size, int max_rounds) {
  if (alphabet_size < 1) {
    throw std::invalid_argument("learn: alphabet must be nonempty");
  }
  if (max_rounds < 1) {
    throw std::invalid_argument("learn: max_rounds must be >= 1");
  }

  ObservationTable tbl;
  tbl.alphabet_size = alphabet_size;
  tbl.prefixes.push_back({});
  tbl.suffixes.push_back({});

  LearnResult result;
  for (int round = 1; round <= max_rounds; ++round) {
    close_and_consistify(tbl, teacher);
    result.dfa = hypothesis_of(tbl);
    result.rounds = round;
    result.membership_queries = tbl.entries.size();
    auto cex = teacher.equivalent(result.dfa);
    if (!cex) {
      result.converged = true;
      return result;
    }
    // Classic Angluin: all prefixes of the counterexample join S.
    for (std::size_t len = 0; len <= cex->size(); ++len) {
      insert_sorted(tbl.prefixes, Word(cex->begin(), cex->begin() + len));
    }
  }
  result.converged = false;
  return result;
}

bool CachingTeacher::member(const Word& w) {
  auto it = cache_.find(w);
  if (it != cache_.end()) return it->second;
  bool answer = member_(w);
  cache_.emplace(w, answer);
  return answer;
}

std::optional<Word> CachingTeacher::equivalent(const Dfa& hypothesis) {
  if (!equivalent_) {
    throw std::logic_error("CachingTeacher: no equivalence strategy set");
  }
  return equivalent_(hypothesis);
}

void CachingTeacher::preload(const std::map<Word, bool>& entries) {
  for (const auto& [w, b] : entries) cache_.emplace(w, b);
}

std::optional<Word> exhaustive_equivalence(const Dfa& hypothesis,
                                           const Dfa& target, int max_len) {
  // BFS over (hypothesis state, target state); symbols in index order so
  // the first disagreement found is the shortlex-least shortest one.
  const int sigma = target.alphabet_size();
  if (hypothesis.alphabet_size() != sigma) {
    throw std::invalid_argument("equivalence: alphabet mismatch");
  }
  struct Node {
    int h, t;
    Word path;
  };
  auto differs = [&](int h, int t) {
    return hypothesis.accepting.count(h) != target.accepting.count(t);
  };
  std::vector<bool> seen(
      static_cast<std::size_t>(hypothesis.num_states) * target.num_states,
      false);
  std::deque<Node> queue;
  queue.push_back({hypothesis.initial, target.initial, {}});
  seen[static_cast<std::size_t>(hypothesis.initial) * target.num_states +
       target.initial] = true;
  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    if (differs(node.h, node.t)) return node.path;
    if (static_cast<int>(node.path.size()) >= max_len) continue;
    for (int a = 0; a < sigma; ++a) {
      int h2 = hypothesis.transitions[node.h][a];
      int t2 = target.transitions[node.t][a];
      std::size_t key = static_cast<std::size_t>(h2) * target.num_states + t2;
      if (seen[key]) continue;
      seen[key] = true;
      Word path = node.path;
      path.push_back(a);
      queue.push_back({h2, t2, std::move(path)});
    }
  }
  return std::nullopt;
}

std::optional<Word> random_word_equivalence(
    const Dfa& hypothesis, const std::function<bool(const Word&)>& member,
    int budget, int max_len, std::uint64_t rng_seed) {
  if (budget < 1) {
    throw std::invalid_argument("random_word_equivalence: budget must be >= 1");
  }
  const int sigma = hypothesis.alphabet_size();
  Rng rng(rng_seed);
  for (int i = 0; i < budget; ++i) {
    Word w;
    while (static_cast<int>(w.size()) < max_len && rng.next_double() < 0.75) {
      w.push_back(static_cast<int>(rng.next_below(sigma)));
    }
    if (dfa_accepts(hypothesis, w) != member(w)) return w;
  }
  return std::nullopt;
}

std::string Dfa::to_json() const {
  nlohmann::ordered_json j;
  j["states"] = num_states;
  j["initial"] = initial;
  j["accepting"] = accepting;
  j["transitions"] = transitions;
  j["alphabet"] = symbol_names;
  return j.dump(2);
}

Dfa Dfa::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Dfa d;
  d.num_states = j.at("states").get<int>();
  d.initial = j.at("initial").get<int>();
  for (int s : j.at("accepting")) d.accepting.insert(s);
  d.transitions = j.at("transitions").get<std::vector<std::vector<int>>>();
  if (j.contains("alphabet")) {
    d.symbol_names = j.at("alphabet").get<std::vector<std::string>>();
  }
  return d;
}

std::string Dfa::to_dot() const {
  std::ostringstream out;
  out << "digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __start [shape=point];\n";
  out << "  __start -> s" << initial << ";\n";
  for (int s = 0; s < num_states; ++s) {
    out << "  s" << s << " [label=\"" << s << "\""
        << (accepting.count(s) ? ", shape=doublecircle" : "") << "];\n";
  }
  for (int s = 0; s < num_states; ++s) {
    for (std::size_t a = 0; a < transitions[s].size(); ++a) {
      std::string label = a < symbol_names.size()
                              ? symbol_names[a]
                              : std::to_string(a);
      out << "  s" << s << " -> s" << transitions[s][a] << " [label=\""
          << label << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace cpstest::lstar
