#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "goalnet/error.hpp"

namespace goalnet {

class GuardSyntaxError : public Error {
 public:
  GuardSyntaxError(std::size_t column, const std::string& what)
      : Error(ErrorCode::Parse, "column " + std::to_string(column) + ": " + what),
        column_(column) {}

  /// 1-based column of the offending character (input length + 1 at end of input).
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// Guard expressions for conditional transitions.
///
/// Grammar (lowest to highest precedence):
///   or      := and ('||' and)*
///   and     := cmp ('&&' cmp)*
///   cmp     := unary (CMPOP unary)?      CMPOP in == != < <= > >=
///   unary   := '!' unary | primary
///   primary := true | false | NUMBER | STRING | IDENT | '(' or ')'
///
/// `||` and `&&` fold to the left; comparison does not chain.
struct GuardExpr {
  enum class Kind { BoolLit, NumLit, StrLit, Ident, Not, And, Or, Compare };
  enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

  Kind kind = Kind::BoolLit;
  CompareOp op = CompareOp::Eq;  // Compare only
  bool boolean = false;          // BoolLit
  double number = 0.0;           // NumLit
  std::string text;              // StrLit value or Ident name
  std::vector<GuardExpr> operands;

  static GuardExpr boolean_literal(bool v);
  static GuardExpr number_literal(double v);
  static GuardExpr string_literal(std::string v);
  static GuardExpr identifier(std::string name);
  static GuardExpr negation(GuardExpr e);
  static GuardExpr conjunction(GuardExpr lhs, GuardExpr rhs);
  static GuardExpr disjunction(GuardExpr lhs, GuardExpr rhs);
  static GuardExpr comparison(CompareOp op, GuardExpr lhs, GuardExpr rhs);

  bool operator==(const GuardExpr&) const = default;
};

using GuardValue = std::variant<bool, double, std::string>;

/// Identifier-keyed environment read by guards.
class Blackboard {
 public:
  /// Throws Error(InvalidArgument) for a malformed identifier or a non-finite number.
  void set(std::string name, GuardValue value);
  const GuardValue* find(std::string_view name) const;
  bool erase(std::string_view name);
  const std::map<std::string, GuardValue, std::less<>>& entries() const noexcept { return values_; }

  bool operator==(const Blackboard&) const = default;

 private:
  std::map<std::string, GuardValue, std::less<>> values_;
};

bool is_identifier(std::string_view text) noexcept;

/// Throws GuardSyntaxError, e.g. "column 5: expected an operand".
GuardExpr parse_guard(std::string_view text);

/// Strict evaluation: unknown identifiers and type mismatches throw Error(Runtime).
bool eval_guard(const GuardExpr& expr, const Blackboard& bb);

/// Canonical text with the fewest parentheses that reparse to the same tree.
std::string format_guard(const GuardExpr& expr);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

}  // namespace goalnet
