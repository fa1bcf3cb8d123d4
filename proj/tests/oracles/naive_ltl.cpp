#include "naive_ltl.hpp"

namespace cpstest::test_oracles {

bool naive_eval(const ltl::FormulaPtr& f,
                const std::vector<std::uint64_t>& letters, std::size_t i) {
  using ltl::Op;
  const std::size_t n = letters.size();
  switch (f->op) {
    case Op::kTrue:
      return true;
    case Op::kFalse:
      return false;
    case Op::kAtom:
      return (letters[i] >> f->atom) & 1u;
    case Op::kNot:
      return !naive_eval(f->left, letters, i);
    case Op::kAnd:
      return naive_eval(f->left, letters, i) &&
             naive_eval(f->right, letters, i);
    case Op::kOr:
      return naive_eval(f->left, letters, i) ||
             naive_eval(f->right, letters, i);
    case Op::kNext:
      return i + 1 < n && naive_eval(f->left, letters, i + 1);
    case Op::kEventually:
      for (std::size_t j = i; j < n; ++j) {
        if (naive_eval(f->left, letters, j)) return true;
      }
      return false;
    case Op::kGlobally:
      for (std::size_t j = i; j < n; ++j) {
        if (!naive_eval(f->left, letters, j)) return false;
      }
      return true;
    case Op::kUntil:
      for (std::size_t j = i; j < n; ++j) {
        if (naive_eval(f->right, letters, j)) return true;
        if (!naive_eval(f->left, letters, j)) return false;
      }
      return false;
  }
  return false;
}

}  // namespace cpstest::test_oracles
