#pragma once

#include <cstdint>
#include <vector>

#include "cpstest/ltl.hpp"

namespace cpstest::test_oracles {

// Direct recursive finite-trace semantics, no sharing, no DP. This is the
// reference the production evaluator is checked against, so keep it as
// close to the textbook definitions as possible.
bool naive_eval(const ltl::FormulaPtr& f,
                const std::vector<std::uint64_t>& letters, std::size_t i);

}  // namespace cpstest::test_oracles
