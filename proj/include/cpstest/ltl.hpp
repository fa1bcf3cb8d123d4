#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace cpstest::ltl {

enum class Op : std::uint8_t {
  kTrue,
  kFalse,
  kAtom,
  kNot,
  kAnd,
  kOr,
  kNext,       // strong next: false at the last position
  kEventually,
  kGlobally,
  kUntil
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable syntax tree with structural sharing. Atoms are indices into an
// external predicate set; `atom_name` is carried for printing only.
struct Formula {
  Op op = Op::kTrue;
  int atom = -1;
  std::string atom_name;
  FormulaPtr left;
  FormulaPtr right;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr atom(int index, std::string name);
FormulaPtr negate(FormulaPtr f);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
FormulaPtr next(FormulaPtr f);
FormulaPtr eventually(FormulaPtr f);
FormulaPtr globally(FormulaPtr f);
FormulaPtr until(FormulaPtr a, FormulaPtr b);

bool is_true(const FormulaPtr& f);
bool is_false(const FormulaPtr& f);

// Number of distinct subformulas (syntax-DAG nodes).
int dag_size(const FormulaPtr& f);

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b);

// Total order used to sort and deduplicate operands of and/or; doubles as
// the structural key behind residue identity.
int compare(const FormulaPtr& a, const FormulaPtr& b);

// Canonical form: constants folded, double negation removed, and/or
// flattened with operands sorted and deduplicated, complement pairs and
// absorption reduced. Idempotent: canonical(canonical(f)) == canonical(f).
FormulaPtr canonical(const FormulaPtr& f);

// Finite-trace semantics over letters given as predicate bitmasks, at
// position i. Evaluated by dynamic programming over (node, position).
bool eval(const FormulaPtr& f, const std::vector<std::uint64_t>& letters,
          std::size_t i);

// Prefix text form, e.g. "G (not collision)".
std::string to_text(const FormulaPtr& f);

// Parses the prefix text form; atom indices resolved via `predicates`
// (name -> index by position). Throws std::runtime_error on bad input.
FormulaPtr parse_text(const std::string& text,
                      const std::vector<std::string>& predicates);

std::string to_json(const FormulaPtr& f);
FormulaPtr from_json(const std::string& json_text,
                     const std::vector<std::string>& predicates);

}  // namespace cpstest::ltl
