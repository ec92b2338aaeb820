#pragma once

#include <functional>
#include <random>
#include <string>

#include "goalnet/guard.hpp"

namespace goalnet::testing {

// Random AST, depth <= max_depth, any node kind. Not necessarily well typed.
GuardExpr random_guard_tree(std::mt19937_64& rng, int max_depth);

// Boolean formula over identifiers a, b, c, built as guard text together
// with a plain C++ predicate that computes the same truth function.
struct BoolFormula {
  std::string text;
  std::function<bool(bool, bool, bool)> truth;
};
BoolFormula random_bool_formula(std::mt19937_64& rng, int max_depth);

}  // namespace goalnet::testing
