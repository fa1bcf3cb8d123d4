#include <stdexcept>

#include "brute_sat.hpp"
#include "cpstest/sat.hpp"
#include "cpstest/util.hpp"
#include "doctest.h"

using namespace cpstest;

TEST_CASE("unit propagation chain") {
  sat::Cnf cnf;
  cnf.num_vars = 2;
  cnf.add_clause({1});
  cnf.add_clause({-1, 2});
  auto model = sat::solve(cnf);
  REQUIRE(model.has_value());
  CHECK(model->value(1));
  CHECK(model->value(2));
}

TEST_CASE("contradictory units are unsat") {
  sat::Cnf cnf;
  cnf.num_vars = 1;
  cnf.add_clause({1});
  cnf.add_clause({-1});
  CHECK_FALSE(sat::solve(cnf).has_value());
}

TEST_CASE("empty clause is unsat, empty formula is sat") {
  sat::Cnf empty_clause;
  empty_clause.num_vars = 1;
  empty_clause.add_clause({});
  CHECK_FALSE(sat::solve(empty_clause).has_value());

  sat::Cnf no_clauses;
  no_clauses.num_vars = 3;
  auto model = sat::solve(no_clauses);
  CHECK(model.has_value());
}

TEST_CASE("verifier rejects assignments that miss a clause") {
  sat::Cnf cnf;
  cnf.num_vars = 2;
  cnf.add_clause({1, 2});
  sat::Assignment a;
  a.values = {false, false, false};  // slot 0 unused
  CHECK_FALSE(sat::verify(cnf, a));
  a.values = {false, true, false};
  CHECK(sat::verify(cnf, a));
}

TEST_CASE("random 3-CNFs agree with brute force") {
  Rng rng(99);
  int sat_count = 0, unsat_count = 0;
  for (int trial = 0; trial < 120; ++trial) {
    sat::Cnf cnf;
    cnf.num_vars = 6 + static_cast<int>(rng.next_below(11));  // 6..16
    int clauses = 10 + static_cast<int>(rng.next_below(61));
    for (int c = 0; c < clauses; ++c) {
      sat::Clause clause;
      for (int k = 0; k < 3; ++k) {
        int var = 1 + static_cast<int>(rng.next_below(cnf.num_vars));
        clause.push_back(rng.next_bool() ? var : -var);
      }
      cnf.add_clause(clause);
    }
    auto model = sat::solve(cnf);
    bool brute = test_oracles::brute_force_satisfiable(cnf);
    CHECK(model.has_value() == brute);
    if (model) {
      CHECK(sat::verify(cnf, *model));
      ++sat_count;
    } else {
      ++unsat_count;
    }
  }
  // The mix should exercise both answers.
  CHECK(sat_count > 10);
  CHECK(unsat_count > 10);
}

TEST_CASE("malformed literals are rejected") {
  sat::Cnf cnf;
  cnf.num_vars = 2;
  cnf.add_clause({3});
  CHECK_THROWS_AS(sat::solve(cnf), std::invalid_argument);
}

TEST_CASE("solver is deterministic") {
  Rng rng(5);
  sat::Cnf cnf;
  cnf.num_vars = 12;
  for (int c = 0; c < 40; ++c) {
    sat::Clause clause;
    for (int k = 0; k < 3; ++k) {
      int var = 1 + static_cast<int>(rng.next_below(12));
      clause.push_back(rng.next_bool() ? var : -var);
    }
    cnf.add_clause(clause);
  }
  auto a = sat::solve(cnf);
  auto b = sat::solve(cnf);
  REQUIRE(a.has_value() == b.has_value());
  if (a) CHECK(a->values == b->values);
}
