#include "cpstest/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace cpstest::ltl {

namespace {

FormulaPtr make(Op op, int atom_index, std::string name, FormulaPtr l,
                FormulaPtr r) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->atom = atom_index;
  f->atom_name = std::move(name);
  f->left = std::move(l);
  f->right = std::move(r);
  return f;
}

}  // namespace

FormulaPtr f_true() {
  static const FormulaPtr t = make(Op::kTrue, -1, "", nullptr, nullptr);
  return t;
}

FormulaPtr f_false() {
  static const FormulaPtr f = make(Op::kFalse, -1, "", nullptr, nullptr);
  return f;
}

FormulaPtr atom(int index, std::string name) {
  return make(Op::kAtom, index, std::move(name), nullptr, nullptr);
}

FormulaPtr negate(FormulaPtr f) {
  return make(Op::kNot, -1, "", std::move(f), nullptr);
}

FormulaPtr conj(FormulaPtr a, FormulaPtr b) {
  return make(Op::kAnd, -1, "", std::move(a), std::move(b));
}

FormulaPtr disj(FormulaPtr a, FormulaPtr b) {
  return make(Op::kOr, -1, "", std::move(a), std::move(b));
}

FormulaPtr next(FormulaPtr f) {
  return make(Op::kNext, -1, "", std::move(f), nullptr);
}

FormulaPtr eventually(FormulaPtr f) {
  return make(Op::kEventually, -1, "", std::move(f), nullptr);
}

FormulaPtr globally(FormulaPtr f) {
  return make(Op::kGlobally, -1, "", std::move(f), nullptr);
}

FormulaPtr until(FormulaPtr a, FormulaPtr b) {
  return make(Op::kUntil, -1, "", std::move(a), std::move(b));
}

bool is_true(const FormulaPtr& f) { return f && f->op == Op::kTrue; }
bool is_false(const FormulaPtr& f) { return f && f->op == Op::kFalse; }

int compare(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->op != b->op) return a->op < b->op ? -1 : 1;
  switch (a->op) {
    case Op::kTrue:
    case Op::kFalse:
      return 0;
    case Op::kAtom:
      if (a->atom != b->atom) return a->atom < b->atom ? -1 : 1;
      return a->atom_name.compare(b->atom_name);
    case Op::kNot:
    case Op::kNext:
    case Op::kEventually:
    case Op::kGlobally:
      return compare(a->left, b->left);
    case Op::kAnd:
    case Op::kOr:
    case Op::kUntil: {
      int c = compare(a->left, b->left);
      return c != 0 ? c : compare(a->right, b->right);
    }
  }
  return 0;
}

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
  return compare(a, b) == 0;
}

namespace {

void collect_operands(const FormulaPtr& f, Op op,
                      std::vector<FormulaPtr>& out) {
  if (f->op == op) {
    collect_operands(f->left, op, out);
    collect_operands(f->right, op, out);
  } else {
    out.push_back(f);
  }
}

bool contains_structural(const std::vector<FormulaPtr>& xs,
                         const FormulaPtr& f) {
  for (const auto& x : xs) {
    if (structurally_equal(x, f)) return true;
  }
  return false;
}

// Canonicalizes an n-ary and/or whose operands are already canonical.
FormulaPtr fold_nary(Op op, std::vector<FormulaPtr> operands) {
  const bool is_and = op == Op::kAnd;
  const FormulaPtr absorbing = is_and ? f_false() : f_true();
  const FormulaPtr neutral = is_and ? f_true() : f_false();
  const Op dual = is_and ? Op::kOr : Op::kAnd;

  std::vector<FormulaPtr> kept;
  for (auto& o : operands) {
    if (o->op == absorbing->op) return absorbing;
    if (o->op == neutral->op) continue;
    if (!contains_structural(kept, o)) kept.push_back(std::move(o));
  }
  if (kept.empty()) return neutral;

  // Complement pair: p and (not p) together collapse.
  for (const auto& o : kept) {
    if (o->op == Op::kNot && contains_structural(kept, o->left)) {
      return absorbing;
    }
  }

  // Absorption: inside an AND, drop any OR operand that already contains
  // another operand (dually for OR).
  std::vector<FormulaPtr> result;
  for (const auto& o : kept) {
    bool absorbed = false;
    if (o->op == dual) {
      std::vector<FormulaPtr> inner;
      collect_operands(o, dual, inner);
      for (const auto& other : kept) {
        if (other.get() == o.get()) continue;
        if (contains_structural(inner, other)) {
          absorbed = true;
          break;
        }
      }
    }
    if (!absorbed) result.push_back(o);
  }

  std::sort(result.begin(), result.end(),
            [](const FormulaPtr& a, const FormulaPtr& b) {
              return compare(a, b) < 0;
            });
  FormulaPtr acc = result[0];
  for (std::size_t i = 1; i < result.size(); ++i) {
    acc = make(op, -1, "", acc, result[i]);
  }
  return acc;
}

}  // namespace

FormulaPtr canonical(const FormulaPtr& f) {
  switch (f->op) {
    case Op::kTrue:
    case Op::kFalse:
    case Op::kAtom:
      return f;
    case Op::kNot: {
      FormulaPtr c = canonical(f->left);
      if (is_true(c)) return f_false();
      if (is_false(c)) return f_true();
      if (c->op == Op::kNot) return c->left;
      return negate(c);
    }
    case Op::kAnd:
    case Op::kOr: {
      std::vector<FormulaPtr> raw;
      collect_operands(f, f->op, raw);
      std::vector<FormulaPtr> operands;
      operands.reserve(raw.size());
      for (const auto& o : raw) operands.push_back(canonical(o));
      // Canonical children of the same connective flatten once more.
      std::vector<FormulaPtr> flat;
      for (const auto& o : operands) collect_operands(o, f->op, flat);
      return fold_nary(f->op, std::move(flat));
    }
    case Op::kNext: {
      FormulaPtr c = canonical(f->left);
      if (is_false(c)) return f_false();  // strong next of false never holds
      return next(c);
    }
    case Op::kEventually: {
      FormulaPtr c = canonical(f->left);
      if (is_true(c) || is_false(c)) return c;
      if (c->op == Op::kEventually) return c;
      return eventually(c);
    }
    case Op::kGlobally: {
      FormulaPtr c = canonical(f->left);
      if (is_true(c) || is_false(c)) return c;
      if (c->op == Op::kGlobally) return c;
      return globally(c);
    }
    case Op::kUntil: {
      FormulaPtr a = canonical(f->left);
      FormulaPtr b = canonical(f->right);
      if (is_true(b)) return f_true();
      if (is_false(b)) return f_false();
      if (is_false(a)) return b;
      if (is_true(a)) return eventually(b);
      return until(a, b);
    }
  }
  return f;
}

namespace {

void collect_nodes(const FormulaPtr& f, std::vector<FormulaPtr>& nodes) {
  if (!contains_structural(nodes, f)) nodes.push_back(f);
  if (f->left) collect_nodes(f->left, nodes);
  if (f->right) collect_nodes(f->right, nodes);
}

}  // namespace

int dag_size(const FormulaPtr& f) {
  std::vector<FormulaPtr> nodes;
  collect_nodes(f, nodes);
  return static_cast<int>(nodes.size());
}

namespace {

const std::vector<char>& eval_node(
    const Formula* f, const std::vector<std::uint64_t>& letters,
    std::unordered_map<const Formula*, std::vector<char>>& memo) {
  auto it = memo.find(f);
  if (it != memo.end()) return it->second;
  const std::size_t n = letters.size();
  std::vector<char> v(n, 0);
  switch (f->op) {
    case Op::kTrue:
      std::fill(v.begin(), v.end(), 1);
      break;
    case Op::kFalse:
      break;
    case Op::kAtom:
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = (letters[i] >> f->atom) & 1u;
      }
      break;
    case Op::kNot: {
      const auto& c = eval_node(f->left.get(), letters, memo);
      for (std::size_t i = 0; i < n; ++i) v[i] = !c[i];
      break;
    }
    case Op::kAnd: {
      const auto& a = eval_node(f->left.get(), letters, memo);
      const auto& b = eval_node(f->right.get(), letters, memo);
      for (std::size_t i = 0; i < n; ++i) v[i] = a[i] && b[i];
      break;
    }
    case Op::kOr: {
      const auto& a = eval_node(f->left.get(), letters, memo);
      const auto& b = eval_node(f->right.get(), letters, memo);
      for (std::size_t i = 0; i < n; ++i) v[i] = a[i] || b[i];
      break;
    }
    case Op::kNext: {
      const auto& c = eval_node(f->left.get(), letters, memo);
      for (std::size_t i = 0; i + 1 < n; ++i) v[i] = c[i + 1];
      break;
    }
    case Op::kEventually: {
      const auto& c = eval_node(f->left.get(), letters, memo);
      v[n - 1] = c[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) v[i] = c[i] || v[i + 1];
      break;
    }
    case Op::kGlobally: {
      const auto& c = eval_node(f->left.get(), letters, memo);
      v[n - 1] = c[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) v[i] = c[i] && v[i + 1];
      break;
    }
    case Op::kUntil: {
      const auto& a = eval_node(f->left.get(), letters, memo);
      const auto& b = eval_node(f->right.get(), letters, memo);
      v[n - 1] = b[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) v[i] = b[i] || (a[i] && v[i + 1]);
      break;
    }
  }
  return memo.emplace(f, std::move(v)).first->second;
}

}  // namespace

bool eval(const FormulaPtr& f, const std::vector<std::uint64_t>& letters,
          std::size_t i) {
  if (i >= letters.size()) {
    throw std::out_of_range("ltl::eval: position outside trace");
  }
  std::unordered_map<const Formula*, std::vector<char>> memo;
  return eval_node(f.get(), letters, memo)[i] != 0;
}

namespace {

bool atomic(const FormulaPtr& f) {
  return f->op == Op::kTrue || f->op == Op::kFalse || f->op == Op::kAtom;
}

void print(const FormulaPtr& f, std::ostream& out, bool parens_if_compound) {
  if (!atomic(f) && parens_if_compound) {
    out << "(";
    print(f, out, false);
    out << ")";
    return;
  }
  switch (f->op) {
    case Op::kTrue: out << "true"; break;
    case Op::kFalse: out << "false"; break;
    case Op::kAtom: out << f->atom_name; break;
    case Op::kNot:
      out << "not ";
      print(f->left, out, true);
      break;
    case Op::kNext:
      out << "X ";
      print(f->left, out, true);
      break;
    case Op::kEventually:
      out << "F ";
      print(f->left, out, true);
      break;
    case Op::kGlobally:
      out << "G ";
      print(f->left, out, true);
      break;
    case Op::kAnd:
    case Op::kOr:
    case Op::kUntil:
      out << (f->op == Op::kAnd ? "and " : f->op == Op::kOr ? "or " : "U ");
      print(f->left, out, true);
      out << " ";
      print(f->right, out, true);
      break;
  }
}

struct TextParser {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  const std::vector<std::string>* predicates;

  std::string peek() const { return pos < tokens.size() ? tokens[pos] : ""; }

  std::string take() {
    if (pos >= tokens.size()) {
      throw std::runtime_error("formula text ended unexpectedly");
    }
    return tokens[pos++];
  }

  void expect(const std::string& t) {
    std::string got = take();
    if (got != t) {
      throw std::runtime_error("expected '" + t + "', found '" + got + "'");
    }
  }

  FormulaPtr parse_expr() {
    std::string t = take();
    if (t == "(") {
      FormulaPtr f = parse_expr();
      expect(")");
      return f;
    }
    if (t == "true") return f_true();
    if (t == "false") return f_false();
    if (t == "not") return negate(parse_expr());
    if (t == "X") return next(parse_expr());
    if (t == "F") return eventually(parse_expr());
    if (t == "G") return globally(parse_expr());
    if (t == "and") {
      FormulaPtr a = parse_expr();
      return conj(std::move(a), parse_expr());
    }
    if (t == "or") {
      FormulaPtr a = parse_expr();
      return disj(std::move(a), parse_expr());
    }
    if (t == "U") {
      FormulaPtr a = parse_expr();
      return until(std::move(a), parse_expr());
    }
    for (std::size_t i = 0; i < predicates->size(); ++i) {
      if ((*predicates)[i] == t) return atom(static_cast<int>(i), t);
    }
    throw std::runtime_error("unknown predicate '" + t + "'");
  }
};

}  // namespace

std::string to_text(const FormulaPtr& f) {
  std::ostringstream out;
  print(f, out, false);
  return out.str();
}

FormulaPtr parse_text(const std::string& text,
                      const std::vector<std::string>& predicates) {
  TextParser p;
  p.predicates = &predicates;
  std::string tok;
  for (char c : text) {
    if (c == '(' || c == ')') {
      if (!tok.empty()) {
        p.tokens.push_back(tok);
        tok.clear();
      }
      p.tokens.push_back(std::string(1, c));
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) {
        p.tokens.push_back(tok);
        tok.clear();
      }
    } else {
      tok += c;
    }
  }
  if (!tok.empty()) p.tokens.push_back(tok);
  FormulaPtr f = p.parse_expr();
  if (p.pos != p.tokens.size()) {
    throw std::runtime_error("trailing tokens after formula");
  }
  return f;
}

namespace {

nlohmann::ordered_json json_of(const FormulaPtr& f) {
  nlohmann::ordered_json j;
  switch (f->op) {
    case Op::kTrue: j["op"] = "true"; break;
    case Op::kFalse: j["op"] = "false"; break;
    case Op::kAtom:
      j["op"] = "atom";
      j["name"] = f->atom_name;
      break;
    case Op::kNot:
      j["op"] = "not";
      j["child"] = json_of(f->left);
      break;
    case Op::kNext:
      j["op"] = "X";
      j["child"] = json_of(f->left);
      break;
    case Op::kEventually:
      j["op"] = "F";
      j["child"] = json_of(f->left);
      break;
    case Op::kGlobally:
      j["op"] = "G";
      j["child"] = json_of(f->left);
      break;
    case Op::kAnd:
    case Op::kOr:
    case Op::kUntil:
      j["op"] = f->op == Op::kAnd ? "and" : f->op == Op::kOr ? "or" : "U";
      j["left"] = json_of(f->left);
      j["right"] = json_of(f->right);
      break;
  }
  return j;
}

FormulaPtr formula_of(const nlohmann::json& j,
                      const std::vector<std::string>& predicates) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "true") return f_true();
  if (op == "false") return f_false();
  if (op == "atom") {
    const std::string name = j.at("name").get<std::string>();
    for (std::size_t i = 0; i < predicates.size(); ++i) {
      if (predicates[i] == name) return atom(static_cast<int>(i), name);
    }
    throw std::runtime_error("unknown predicate '" + name + "' in formula");
  }
  if (op == "not") return negate(formula_of(j.at("child"), predicates));
  if (op == "X") return next(formula_of(j.at("child"), predicates));
  if (op == "F") return eventually(formula_of(j.at("child"), predicates));
  if (op == "G") return globally(formula_of(j.at("child"), predicates));
  if (op == "and")
    return conj(formula_of(j.at("left"), predicates),
                formula_of(j.at("right"), predicates));
  if (op == "or")
    return disj(formula_of(j.at("left"), predicates),
                formula_of(j.at("right"), predicates));
  if (op == "U")
    return until(formula_of(j.at("left"), predicates),
                 formula_of(j.at("right"), predicates));
  throw std::runtime_error("unknown formula operator '" + op + "'");
}

}  // namespace

std::string to_json(const FormulaPtr& f) { return json_of(f).dump(2); }

FormulaPtr from_json(const std::string& json_text,
                     const std::vector<std::string>& predicates) {
  return formula_of(nlohmann::json::parse(json_text), predicates);
}

}  // namespace cpstest::ltl
