#include "cpstest/ltl_learn.hpp"

#include <algorithm>
#include <map>

namespace cpstest::ltlsat {

namespace {

// Label layout: atoms first, then the connectives.
enum ConnOffset { kNot = 0, kAnd, kOr, kNext, kEventually, kGlobally, kUntil };
constexpr int kNumConn = 7;

}  // namespace

void TraceSample::check() const {
  if (atom_names.empty()) {
    throw std::invalid_argument("TraceSample: no atoms");
  }
  auto check_traces = [&](const std::vector<abstraction::LabeledTrace>& ts) {
    for (const auto& t : ts) {
      if (t.letters.empty()) {
        throw std::invalid_argument("TraceSample: empty trace");
      }
      if (!positives.empty() && !(t.predicates == positives[0].predicates)) {
        throw std::invalid_argument(
            "TraceSample: traces disagree on the predicate set");
      }
    }
  };
  check_traces(positives);
  check_traces(negatives);
  for (const auto& p : positives) {
    for (const auto& n : negatives) {
      if (p.letters == n.letters) {
        throw std::invalid_argument(
            "TraceSample: a letter sequence appears both positive and "
            "negative");
      }
    }
  }
}

bool consistent_with(const ltl::FormulaPtr& f, const TraceSample& sample) {
  for (const auto& t : sample.positives) {
    if (!ltl::eval(f, t.letters, 0)) return false;
  }
  for (const auto& t : sample.negatives) {
    if (ltl::eval(f, t.letters, 0)) return false;
  }
  return true;
}

namespace {

struct Layout {
  int n = 0;
  int num_atoms = 0;
  int num_ops = 0;
  std::vector<const abstraction::LabeledTrace*> traces;
  std::vector<int> y_base;   // per trace: base var for y[i][k]
  std::vector<int> vl_base;  // per trace
  std::vector<int> vr_base;
  int label_base = 0;
  int left_base = 0;
  int right_base = 0;

  int x(int i, int op) const { return label_base + (i - 1) * num_ops + op; }
  // l/r pointers exist for i >= 2, j in [1, i-1].
  int pair_offset(int i, int j) const {
    return (i - 2) * (i - 1) / 2 + (j - 1);
  }
  int l(int i, int j) const { return left_base + pair_offset(i, j); }
  int r(int i, int j) const { return right_base + pair_offset(i, j); }
  int y(int t, int i, int k) const {
    int len = static_cast<int>(traces[t]->letters.size());
    return y_base[t] + (i - 1) * len + k;
  }
  int vl(int t, int i, int k) const {
    int len = static_cast<int>(traces[t]->letters.size());
    return vl_base[t] + (i - 2) * len + k;
  }
  int vr(int t, int i, int k) const {
    int len = static_cast<int>(traces[t]->letters.size());
    return vr_base[t] + (i - 2) * len + k;
  }
};

void exactly_one(sat::Cnf& cnf, const std::vector<int>& vars) {
  sat::Clause at_least;
  for (int v : vars) at_least.push_back(v);
  cnf.add_clause(at_least);
  for (std::size_t a = 0; a < vars.size(); ++a) {
    for (std::size_t b = a + 1; b < vars.size(); ++b) {
      cnf.add_clause({-vars[a], -vars[b]});
    }
  }
}

}  // namespace

Encoding encode(int n, const TraceSample& sample) {
  if (n < 1) throw std::invalid_argument("encode: size must be >= 1");
  sample.check();

  Layout lay;
  lay.n = n;
  lay.num_atoms = static_cast<int>(sample.atom_names.size());
  lay.num_ops = lay.num_atoms + kNumConn;
  for (const auto& t : sample.positives) lay.traces.push_back(&t);
  for (const auto& t : sample.negatives) lay.traces.push_back(&t);

  sat::Cnf cnf;
  auto reserve = [&](int count) {
    int base = cnf.num_vars + 1;
    cnf.num_vars += count;
    return base;
  };
  lay.label_base = reserve(n * lay.num_ops);
  int num_pairs = n < 2 ? 0 : (n - 1) * n / 2;  // sum over i=2..n of (i-1)
  lay.left_base = reserve(num_pairs);
  lay.right_base = reserve(num_pairs);
  for (const auto* t : lay.traces) {
    int len = static_cast<int>(t->letters.size());
    lay.y_base.push_back(reserve(n * len));
    lay.vl_base.push_back(n < 2 ? 0 : reserve((n - 1) * len));
    lay.vr_base.push_back(n < 2 ? 0 : reserve((n - 1) * len));
  }

  const int conn_base = lay.num_atoms;

  // Structure: every node has exactly one label; node 1 must be an atom;
  // nodes >= 2 have exactly one left and one right child below them.
  for (int i = 1; i <= n; ++i) {
    std::vector<int> labels;
    for (int op = 0; op < lay.num_ops; ++op) labels.push_back(lay.x(i, op));
    exactly_one(cnf, labels);
  }
  for (int c = 0; c < kNumConn; ++c) {
    cnf.add_clause({-lay.x(1, conn_base + c)});
  }
  for (int i = 2; i <= n; ++i) {
    std::vector<int> ls, rs;
    for (int j = 1; j < i; ++j) {
      ls.push_back(lay.l(i, j));
      rs.push_back(lay.r(i, j));
    }
    exactly_one(cnf, ls);
    exactly_one(cnf, rs);
  }

  for (std::size_t t = 0; t < lay.traces.size(); ++t) {
    const auto& letters = lay.traces[t]->letters;
    const int len = static_cast<int>(letters.size());

    // Child value linkage.
    for (int i = 2; i <= n; ++i) {
      for (int j = 1; j < i; ++j) {
        for (int k = 0; k < len; ++k) {
          cnf.add_clause({-lay.l(i, j), -lay.vl(t, i, k), lay.y(t, j, k)});
          cnf.add_clause({-lay.l(i, j), lay.vl(t, i, k), -lay.y(t, j, k)});
          cnf.add_clause({-lay.r(i, j), -lay.vr(t, i, k), lay.y(t, j, k)});
          cnf.add_clause({-lay.r(i, j), lay.vr(t, i, k), -lay.y(t, j, k)});
        }
      }
    }

    for (int i = 1; i <= n; ++i) {
      // Atom labels pin y to the trace bits.
      for (int p = 0; p < lay.num_atoms; ++p) {
        const int x = lay.x(i, p);
        for (int k = 0; k < len; ++k) {
          bool bit = (letters[k] >> p) & 1u;
          cnf.add_clause({-x, bit ? lay.y(t, i, k) : -lay.y(t, i, k)});
        }
      }
      if (i < 2) continue;

      const int x_not = lay.x(i, conn_base + kNot);
      const int x_and = lay.x(i, conn_base + kAnd);
      const int x_or = lay.x(i, conn_base + kOr);
      const int x_next = lay.x(i, conn_base + kNext);
      const int x_ev = lay.x(i, conn_base + kEventually);
      const int x_gl = lay.x(i, conn_base + kGlobally);
      const int x_un = lay.x(i, conn_base + kUntil);

      for (int k = 0; k < len; ++k) {
        const int y = lay.y(t, i, k);
        const int a = lay.vl(t, i, k);
        const int b = lay.vr(t, i, k);
        const bool last = k == len - 1;
        const int yn = last ? 0 : lay.y(t, i, k + 1);
        const int an = last ? 0 : lay.vl(t, i, k + 1);

        // not: y <-> !a
        cnf.add_clause({-x_not, -y, -a});
        cnf.add_clause({-x_not, y, a});
        // and: y <-> a & b
        cnf.add_clause({-x_and, -y, a});
        cnf.add_clause({-x_and, -y, b});
        cnf.add_clause({-x_and, y, -a, -b});
        // or: y <-> a | b
        cnf.add_clause({-x_or, y, -a});
        cnf.add_clause({-x_or, y, -b});
        cnf.add_clause({-x_or, -y, a, b});
        // X (strong): y <-> a@k+1, false at the end
        if (last) {
          cnf.add_clause({-x_next, -y});
        } else {
          cnf.add_clause({-x_next, -y, an});
          cnf.add_clause({-x_next, y, -an});
        }
        // F: y <-> a | y@k+1 (a at the end)
        if (last) {
          cnf.add_clause({-x_ev, -y, a});
          cnf.add_clause({-x_ev, y, -a});
        } else {
          cnf.add_clause({-x_ev, y, -a});
          cnf.add_clause({-x_ev, y, -yn});
          cnf.add_clause({-x_ev, -y, a, yn});
        }
        // G: y <-> a & y@k+1 (a at the end)
        if (last) {
          cnf.add_clause({-x_gl, -y, a});
          cnf.add_clause({-x_gl, y, -a});
        } else {
          cnf.add_clause({-x_gl, -y, a});
          cnf.add_clause({-x_gl, -y, yn});
          cnf.add_clause({-x_gl, y, -a, -yn});
        }
        // U: y <-> b | (a & y@k+1) (b at the end)
        if (last) {
          cnf.add_clause({-x_un, -y, b});
          cnf.add_clause({-x_un, y, -b});
        } else {
          cnf.add_clause({-x_un, y, -b});
          cnf.add_clause({-x_un, y, -a, -yn});
          cnf.add_clause({-x_un, -y, b, a});
          cnf.add_clause({-x_un, -y, b, yn});
        }
      }
    }

    // Root constraint: positives hold at position 0, negatives do not.
    const bool positive = t < sample.positives.size();
    cnf.add_clause({positive ? lay.y(t, n, 0) : -lay.y(t, n, 0)});
  }

  Encoding enc;
  enc.cnf = std::move(cnf);
  enc.size = n;
  enc.num_ops = lay.num_ops;
  enc.label_base = lay.label_base;
  enc.left_base = lay.left_base;
  enc.right_base = lay.right_base;
  return enc;
}

ltl::FormulaPtr decode(const sat::Assignment& a, const Encoding& enc,
                       const TraceSample& sample) {
  const int n = enc.size;
  const int num_atoms = static_cast<int>(sample.atom_names.size());
  const int conn_base = num_atoms;

  auto label_of = [&](int i) {
    int found = -1;
    for (int op = 0; op < enc.num_ops; ++op) {
      if (a.value(enc.label_base + (i - 1) * enc.num_ops + op)) {
        if (found >= 0) {
          throw DecodeError("node has two labels (encoding bug)");
        }
        found = op;
      }
    }
    if (found < 0) throw DecodeError("node has no label (encoding bug)");
    return found;
  };
  auto child_of = [&](int base, int i) {
    int found = -1;
    for (int j = 1; j < i; ++j) {
      int offset = (i - 2) * (i - 1) / 2 + (j - 1);
      if (a.value(base + offset)) {
        if (found >= 0) {
          throw DecodeError("node has two children (encoding bug)");
        }
        found = j;
      }
    }
    if (found < 0) throw DecodeError("node has no child (encoding bug)");
    return found;
  };

  std::vector<ltl::FormulaPtr> node(n + 1);
  for (int i = 1; i <= n; ++i) {
    int op = label_of(i);
    if (op < num_atoms) {
      node[i] = ltl::atom(op, sample.atom_names[op]);
      continue;
    }
    ltl::FormulaPtr l = node[child_of(enc.left_base, i)];
    switch (op - conn_base) {
      case kNot: node[i] = ltl::negate(l); break;
      case kAnd:
        node[i] = ltl::conj(l, node[child_of(enc.right_base, i)]);
        break;
      case kOr:
        node[i] = ltl::disj(l, node[child_of(enc.right_base, i)]);
        break;
      case kNext: node[i] = ltl::next(l); break;
      case kEventually: node[i] = ltl::eventually(l); break;
      case kGlobally: node[i] = ltl::globally(l); break;
      case kUntil:
        node[i] = ltl::until(l, node[child_of(enc.right_base, i)]);
        break;
      default:
        throw DecodeError("unknown operator label");
    }
  }

  ltl::FormulaPtr f = node[n];
  if (!consistent_with(f, sample)) {
    throw DecodeError("decoded formula fails the sample post-check: " +
                      ltl::to_text(f));
  }
  return f;
}

std::optional<ltl::FormulaPtr> learn_minimal(const TraceSample& sample,
                                             int max_size) {
  if (max_size < 1) {
    throw std::invalid_argument("learn_minimal: max_size must be >= 1");
  }
  sample.check();
  for (int n = 1; n <= max_size; ++n) {
    Encoding enc = encode(n, sample);
    if (auto model = sat::solve(enc.cnf)) {
      return decode(*model, enc, sample);
    }
  }
  return std::nullopt;
}

}  // namespace cpstest::ltlsat
