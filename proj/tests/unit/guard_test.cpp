#include <gtest/gtest.h>

#include <random>

#include "goalnet/guard.hpp"
#include "guard_gen.hpp"

using namespace goalnet;
using E = GuardExpr;

namespace {

Blackboard bools(bool a, bool b, bool c) {
  Blackboard bb;
  bb.set("a", a);
  bb.set("b", b);
  bb.set("c", c);
  return bb;
}

bool eval_text(const std::string& text, const Blackboard& bb) { return eval_guard(parse_guard(text), bb); }

}  // namespace

TEST(ParseGuard, AndBindsTighterThanOr) {
  EXPECT_EQ(parse_guard("a || b && c"),
            E::disjunction(E::identifier("a"), E::conjunction(E::identifier("b"), E::identifier("c"))));
}

TEST(ParseGuard, ComparisonsUnderAnd) {
  const auto expected =
      E::conjunction(E::comparison(E::CompareOp::Eq, E::identifier("taught"), E::boolean_literal(true)),
                     E::comparison(E::CompareOp::Ge, E::identifier("energy"), E::number_literal(0.5)));
  EXPECT_EQ(parse_guard("taught == true && energy >= 0.5"), expected);
}

TEST(ParseGuard, TruncatedInputFailsAtColumnFive) {
  try {
    parse_guard("a &&");
    FAIL();
  } catch (const GuardSyntaxError& e) {
    EXPECT_EQ(e.column(), 5u);
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
}

TEST(ParseGuard, ComparisonDoesNotChain) {
  EXPECT_THROW(parse_guard("a < b < c"), GuardSyntaxError);
  EXPECT_NO_THROW(parse_guard("(a < b) == c"));
}

TEST(ParseGuard, OtherSyntaxErrors) {
  for (const char* bad : {"", "(", "a)", "a & b", "\"open", "1.2.3", "a == == b", "!", "@"}) {
    EXPECT_THROW(parse_guard(bad), GuardSyntaxError) << bad;
  }
}

TEST(ParseGuard, OrAndFoldLeft) {
  EXPECT_EQ(parse_guard("a || b || c"),
            E::disjunction(E::disjunction(E::identifier("a"), E::identifier("b")), E::identifier("c")));
}

TEST(EvalGuard, ConstantOnEmptyBlackboard) { EXPECT_TRUE(eval_text("true", Blackboard{})); }

TEST(EvalGuard, StrictBoundary) {
  Blackboard bb;
  bb.set("x", 2.0);
  EXPECT_TRUE(eval_text("x < 3", bb));
  bb.set("x", 3.0);
  EXPECT_FALSE(eval_text("x < 3", bb));
}

TEST(EvalGuard, UnknownIdentifierIsAnError) {
  try {
    eval_text("missing == 1", Blackboard{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Runtime);
  }
}

TEST(EvalGuard, TypeMismatchesAreErrors) {
  Blackboard bb;
  bb.set("s", std::string("friend"));
  bb.set("n", 1.0);
  EXPECT_THROW(eval_text("s == n", bb), Error);
  EXPECT_THROW(eval_text("s < \"z\"", bb), Error);
  EXPECT_THROW(eval_text("n && true", bb), Error);
  EXPECT_THROW(eval_text("!n", bb), Error);
  EXPECT_TRUE(eval_text("s == \"friend\"", bb));
  EXPECT_TRUE(eval_text("s != \"foe\"", bb));
}

TEST(EvalGuard, ShortCircuitIsNotObservable) {
  // Both operands are checked, so a type error on the right still surfaces.
  Blackboard bb;
  bb.set("n", 1.0);
  EXPECT_THROW(eval_text("false && n", bb), Error);
  EXPECT_THROW(eval_text("true || n", bb), Error);
}

TEST(FormatGuard, MinimalParentheses) {
  const auto a = E::identifier("a"), b = E::identifier("b"), c = E::identifier("c");
  EXPECT_EQ(format_guard(E::disjunction(a, E::conjunction(b, c))), "a || b && c");
  EXPECT_EQ(format_guard(E::conjunction(E::disjunction(a, b), c)), "(a || b) && c");
  EXPECT_EQ(format_guard(E::disjunction(a, E::disjunction(b, c))), "a || (b || c)");
  EXPECT_EQ(format_guard(E::negation(E::comparison(E::CompareOp::Lt, a, b))), "!(a < b)");
}

TEST(FormatGuard, NumbersRoundTrip) {
  for (double v : {0.1, 1e21, -2.5, 1.0 / 3.0, 5e-324, 123456789.0}) {
    EXPECT_EQ(parse_guard(format_number(v)), E::number_literal(v)) << format_number(v);
  }
}

TEST(GuardProperties, TruthTableOracleRandomFormulas) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    const auto f = goalnet::testing::random_bool_formula(rng, 5);
    const auto expr = parse_guard(f.text);
    for (int m = 0; m < 8; ++m) {
      const bool a = m & 1, b = m & 2, c = m & 4;
      ASSERT_EQ(eval_guard(expr, bools(a, b, c)), f.truth(a, b, c)) << f.text << " @" << m;
    }
  }
}

// Unparenthesized chains, where the result depends on precedence. C++ gives
// && the same precedence relative to || as the guard grammar.
TEST(GuardProperties, TruthTableOracleFlatChains) {
  const char* lits[] = {"a", "!a", "b", "!b", "c", "!c"};
  for (const char* x : lits)
    for (const char* y : lits)
      for (const char* z : lits)
        for (int ops = 0; ops < 4; ++ops) {
          const bool and1 = ops & 1, and2 = ops & 2;
          const std::string text = std::string(x) + (and1 ? " && " : " || ") + y + (and2 ? " && " : " || ") + z;
          const auto expr = parse_guard(text);
          for (int m = 0; m < 8; ++m) {
            const bool v[] = {bool(m & 1), bool(m & 2), bool(m & 4)};
            auto lit = [&](const char* s) { return s[0] == '!' ? !v[s[1] - 'a'] : v[s[0] - 'a']; };
            const bool X = lit(x), Y = lit(y), Z = lit(z);
            bool expected;
            if (and1 && and2) expected = X && Y && Z;
            else if (and1) expected = (X && Y) || Z;
            else if (and2) expected = X || (Y && Z);
            else expected = X || Y || Z;
            ASSERT_EQ(eval_guard(expr, bools(v[0], v[1], v[2])), expected) << text;
          }
        }
}

TEST(GuardProperties, ParseFormatRoundTripRandomTrees) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const auto tree = goalnet::testing::random_guard_tree(rng, 6);
    const auto text = format_guard(tree);
    ASSERT_EQ(parse_guard(text), tree) << text;
    ASSERT_EQ(format_guard(parse_guard(text)), text);
  }
}

TEST(GuardProperties, EvaluationIsRepeatable) {
  std::mt19937_64 rng(3);
  Blackboard bb;
  bb.set("a", true);
  bb.set("b", false);
  bb.set("energy", 0.5);
  bb.set("_x1", std::string("friend"));
  bb.set("taught", true);
  for (int i = 0; i < 500; ++i) {
    const auto tree = goalnet::testing::random_guard_tree(rng, 4);
    std::optional<bool> first;
    bool threw = false;
    try {
      first = eval_guard(tree, bb);
    } catch (const Error&) {
      threw = true;
    }
    for (int k = 0; k < 3; ++k) {
      if (threw) {
        ASSERT_THROW(eval_guard(tree, bb), Error);
      } else {
        ASSERT_EQ(eval_guard(tree, bb), *first);
      }
    }
  }
}

TEST(Blackboard, RejectsBadIdentifiersAndNonFinite) {
  Blackboard bb;
  EXPECT_THROW(bb.set("1x", true), Error);
  EXPECT_THROW(bb.set("a-b", true), Error);
  EXPECT_THROW(bb.set("x", std::numeric_limits<double>::infinity()), Error);
  EXPECT_NO_THROW(bb.set("_ok9", 1.0));
}
