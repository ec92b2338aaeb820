#include "goalnet/guard.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>

namespace goalnet {

GuardExpr GuardExpr::boolean_literal(bool v) {
  GuardExpr e;
  e.kind = Kind::BoolLit;
  e.boolean = v;
  return e;
}

GuardExpr GuardExpr::number_literal(double v) {
  GuardExpr e;
  e.kind = Kind::NumLit;
  e.number = v;
  return e;
}

GuardExpr GuardExpr::string_literal(std::string v) {
  GuardExpr e;
  e.kind = Kind::StrLit;
  e.text = std::move(v);
  return e;
}

GuardExpr GuardExpr::identifier(std::string name) {
  GuardExpr e;
  e.kind = Kind::Ident;
  e.text = std::move(name);
  return e;
}

GuardExpr GuardExpr::negation(GuardExpr operand) {
  GuardExpr e;
  e.kind = Kind::Not;
  e.operands.push_back(std::move(operand));
  return e;
}

GuardExpr GuardExpr::conjunction(GuardExpr lhs, GuardExpr rhs) {
  GuardExpr e;
  e.kind = Kind::And;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

GuardExpr GuardExpr::disjunction(GuardExpr lhs, GuardExpr rhs) {
  GuardExpr e;
  e.kind = Kind::Or;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

GuardExpr GuardExpr::comparison(CompareOp op, GuardExpr lhs, GuardExpr rhs) {
  GuardExpr e;
  e.kind = Kind::Compare;
  e.op = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

bool is_identifier(std::string_view text) noexcept {
  if (text.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(text[0])) return false;
  for (char c : text.substr(1)) {
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  }
  return true;
}

void Blackboard::set(std::string name, GuardValue value) {
  if (!is_identifier(name)) {
    throw Error(ErrorCode::InvalidArgument, "invalid blackboard identifier '" + name + "'", name);
  }
  if (const double* d = std::get_if<double>(&value); d && !std::isfinite(*d)) {
    throw Error(ErrorCode::InvalidArgument, "blackboard value for '" + name + "' must be finite", name);
  }
  values_.insert_or_assign(std::move(name), std::move(value));
}

const GuardValue* Blackboard::find(std::string_view name) const {
  auto it = values_.find(name);
  return it == values_.end() ? nullptr : &it->second;
}

bool Blackboard::erase(std::string_view name) {
  auto it = values_.find(name);
  if (it == values_.end()) return false;
  values_.erase(it);
  return true;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

// ---- lexer -------------------------------------------------------------------

namespace {

enum class Tok { End, LParen, RParen, Not, And, Or, Cmp, True, False, Number, String, Ident };

struct Token {
  Tok type = Tok::End;
  std::size_t column = 1;  // 1-based
  GuardExpr::CompareOp op = GuardExpr::CompareOp::Eq;
  double number = 0.0;
  std::string text;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
    Token t;
    t.column = pos_ + 1;
    if (pos_ >= src_.size()) return t;

    const char c = src_[pos_];
    const char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    auto two = [&](Tok type) {
      pos_ += 2;
      t.type = type;
      return t;
    };
    auto cmp = [&](GuardExpr::CompareOp op, std::size_t len) {
      pos_ += len;
      t.type = Tok::Cmp;
      t.op = op;
      return t;
    };
    switch (c) {
      case '(': ++pos_; t.type = Tok::LParen; return t;
      case ')': ++pos_; t.type = Tok::RParen; return t;
      case '&':
        if (n == '&') return two(Tok::And);
        throw GuardSyntaxError(t.column, "expected '&&'");
      case '|':
        if (n == '|') return two(Tok::Or);
        throw GuardSyntaxError(t.column, "expected '||'");
      case '!':
        if (n == '=') return cmp(GuardExpr::CompareOp::Ne, 2);
        ++pos_;
        t.type = Tok::Not;
        return t;
      case '=':
        if (n == '=') return cmp(GuardExpr::CompareOp::Eq, 2);
        throw GuardSyntaxError(t.column, "expected '=='");
      case '<':
        return n == '=' ? cmp(GuardExpr::CompareOp::Le, 2) : cmp(GuardExpr::CompareOp::Lt, 1);
      case '>':
        return n == '=' ? cmp(GuardExpr::CompareOp::Ge, 2) : cmp(GuardExpr::CompareOp::Gt, 1);
      case '"': return string_token(t);
      default: break;
    }
    if (is_digit(c) || ((c == '-' || c == '.') && (is_digit(n) || (n == '.' && c == '-')))) {
      return number_token(t);
    }
    if (is_identifier(std::string_view(&c, 1))) {
      std::size_t end = pos_ + 1;
      while (end < src_.size() && (is_identifier(src_.substr(pos_, end - pos_ + 1)))) ++end;
      t.text = std::string(src_.substr(pos_, end - pos_));
      pos_ = end;
      t.type = t.text == "true" ? Tok::True : t.text == "false" ? Tok::False : Tok::Ident;
      return t;
    }
    throw GuardSyntaxError(t.column, std::string("unexpected character '") + c + "'");
  }

 private:
  Token number_token(Token t) {
    std::size_t end = pos_;
    if (src_[end] == '-') ++end;
    while (end < src_.size() && is_digit(src_[end])) ++end;
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && is_digit(src_[end])) ++end;
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < src_.size() && (src_[exp] == '+' || src_[exp] == '-')) ++exp;
      if (exp < src_.size() && is_digit(src_[exp])) {
        end = exp;
        while (end < src_.size() && is_digit(src_[end])) ++end;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, value);
    if (ec != std::errc() || ptr != src_.data() + end || !std::isfinite(value)) {
      throw GuardSyntaxError(t.column, "malformed number");
    }
    pos_ = end;
    t.type = Tok::Number;
    t.number = value;
    return t;
  }

  Token string_token(Token t) {
    std::size_t i = pos_ + 1;
    std::string out;
    while (i < src_.size() && src_[i] != '"') {
      if (src_[i] == '\\') {
        if (i + 1 >= src_.size()) break;
        const char e = src_[i + 1];
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: throw GuardSyntaxError(i + 1, std::string("unknown escape '\\") + e + "'");
        }
        i += 2;
      } else {
        out.push_back(src_[i++]);
      }
    }
    if (i >= src_.size()) throw GuardSyntaxError(t.column, "unterminated string");
    pos_ = i + 1;
    t.type = Tok::String;
    t.text = std::move(out);
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  GuardExpr parse() {
    GuardExpr e = parse_or();
    if (current_.type != Tok::End) {
      throw GuardSyntaxError(current_.column, current_.type == Tok::Cmp
                                                  ? "comparisons cannot be chained"
                                                  : "unexpected token after expression");
    }
    return e;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  GuardExpr parse_or() {
    GuardExpr lhs = parse_and();
    while (current_.type == Tok::Or) {
      advance();
      lhs = GuardExpr::disjunction(std::move(lhs), parse_and());
    }
    return lhs;
  }

  GuardExpr parse_and() {
    GuardExpr lhs = parse_cmp();
    while (current_.type == Tok::And) {
      advance();
      lhs = GuardExpr::conjunction(std::move(lhs), parse_cmp());
    }
    return lhs;
  }

  GuardExpr parse_cmp() {
    GuardExpr lhs = parse_unary();
    if (current_.type == Tok::Cmp) {
      const auto op = current_.op;
      advance();
      return GuardExpr::comparison(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  GuardExpr parse_unary() {
    if (current_.type == Tok::Not) {
      advance();
      return GuardExpr::negation(parse_unary());
    }
    return parse_primary();
  }

  GuardExpr parse_primary() {
    Token t = current_;
    switch (t.type) {
      case Tok::True: advance(); return GuardExpr::boolean_literal(true);
      case Tok::False: advance(); return GuardExpr::boolean_literal(false);
      case Tok::Number: advance(); return GuardExpr::number_literal(t.number);
      case Tok::String: advance(); return GuardExpr::string_literal(std::move(t.text));
      case Tok::Ident: advance(); return GuardExpr::identifier(std::move(t.text));
      case Tok::LParen: {
        advance();
        GuardExpr inner = parse_or();
        if (current_.type != Tok::RParen) throw GuardSyntaxError(current_.column, "expected ')'");
        advance();
        return inner;
      }
      case Tok::End: throw GuardSyntaxError(t.column, "expected an operand");
      default: throw GuardSyntaxError(t.column, "expected an operand");
    }
  }

  Lexer lexer_;
  Token current_;
};

// ---- evaluation ----------------------------------------------------------------

const char* type_name(const GuardValue& v) {
  switch (v.index()) {
    case 0: return "boolean";
    case 1: return "number";
    default: return "text";
  }
}

[[noreturn]] void type_error(const std::string& message) {
  throw Error(ErrorCode::Runtime, "guard type error: " + message);
}

GuardValue evaluate(const GuardExpr& e, const Blackboard& bb) {
  using K = GuardExpr::Kind;
  switch (e.kind) {
    case K::BoolLit: return e.boolean;
    case K::NumLit: return e.number;
    case K::StrLit: return e.text;
    case K::Ident: {
      const GuardValue* v = bb.find(e.text);
      if (!v) throw Error(ErrorCode::Runtime, "unknown identifier '" + e.text + "'");
      return *v;
    }
    case K::Not: {
      const GuardValue v = evaluate(e.operands[0], bb);
      if (!std::holds_alternative<bool>(v)) type_error(std::string("'!' needs a boolean, got ") + type_name(v));
      return !std::get<bool>(v);
    }
    case K::And:
    case K::Or: {
      // Both sides are always evaluated; evaluation has no side effects.
      const GuardValue l = evaluate(e.operands[0], bb);
      const GuardValue r = evaluate(e.operands[1], bb);
      if (!std::holds_alternative<bool>(l) || !std::holds_alternative<bool>(r)) {
        type_error(std::string(e.kind == K::And ? "'&&'" : "'||'") + " needs booleans, got " +
                   type_name(l) + " and " + type_name(r));
      }
      return e.kind == K::And ? (std::get<bool>(l) && std::get<bool>(r))
                              : (std::get<bool>(l) || std::get<bool>(r));
    }
    case K::Compare: {
      const GuardValue l = evaluate(e.operands[0], bb);
      const GuardValue r = evaluate(e.operands[1], bb);
      using Op = GuardExpr::CompareOp;
      if (e.op == Op::Eq || e.op == Op::Ne) {
        if (l.index() != r.index()) {
          type_error(std::string("cannot compare ") + type_name(l) + " with " + type_name(r));
        }
        return (l == r) == (e.op == Op::Eq);
      }
      if (!std::holds_alternative<double>(l) || !std::holds_alternative<double>(r)) {
        type_error(std::string("ordering needs numbers, got ") + type_name(l) + " and " + type_name(r));
      }
      const double a = std::get<double>(l);
      const double b = std::get<double>(r);
      switch (e.op) {
        case Op::Lt: return a < b;
        case Op::Le: return a <= b;
        case Op::Gt: return a > b;
        case Op::Ge: return a >= b;
        default: break;
      }
      return false;
    }
  }
  return false;
}

// ---- formatting ------------------------------------------------------------------

int precedence(const GuardExpr& e) {
  switch (e.kind) {
    case GuardExpr::Kind::Or: return 1;
    case GuardExpr::Kind::And: return 2;
    case GuardExpr::Kind::Compare: return 3;
    case GuardExpr::Kind::Not: return 4;
    default: return 5;
  }
}

const char* op_text(GuardExpr::CompareOp op) {
  switch (op) {
    case GuardExpr::CompareOp::Eq: return "==";
    case GuardExpr::CompareOp::Ne: return "!=";
    case GuardExpr::CompareOp::Lt: return "<";
    case GuardExpr::CompareOp::Le: return "<=";
    case GuardExpr::CompareOp::Gt: return ">";
    case GuardExpr::CompareOp::Ge: return ">=";
  }
  return "?";
}

void write(const GuardExpr& e, std::string& out);

void write_operand(const GuardExpr& e, bool parens, std::string& out) {
  if (parens) out.push_back('(');
  write(e, out);
  if (parens) out.push_back(')');
}

void write(const GuardExpr& e, std::string& out) {
  using K = GuardExpr::Kind;
  switch (e.kind) {
    case K::BoolLit: out += e.boolean ? "true" : "false"; return;
    case K::NumLit: out += format_number(e.number); return;
    case K::StrLit:
      out.push_back('"');
      for (char c : e.text) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          default: out.push_back(c);
        }
      }
      out.push_back('"');
      return;
    case K::Ident: out += e.text; return;
    case K::Not:
      out.push_back('!');
      write_operand(e.operands[0], precedence(e.operands[0]) < 4, out);
      return;
    case K::And:
    case K::Or: {
      // Left-folded chains: the right operand needs parens at equal precedence.
      const int p = precedence(e);
      write_operand(e.operands[0], precedence(e.operands[0]) < p, out);
      out += e.kind == K::And ? " && " : " || ";
      write_operand(e.operands[1], precedence(e.operands[1]) <= p, out);
      return;
    }
    case K::Compare:
      write_operand(e.operands[0], precedence(e.operands[0]) <= 3, out);
      out.push_back(' ');
      out += op_text(e.op);
      out.push_back(' ');
      write_operand(e.operands[1], precedence(e.operands[1]) <= 3, out);
      return;
  }
}

}  // namespace

GuardExpr parse_guard(std::string_view text) { return Parser(text).parse(); }

bool eval_guard(const GuardExpr& expr, const Blackboard& bb) {
  const GuardValue v = evaluate(expr, bb);
  if (!std::holds_alternative<bool>(v)) {
    type_error(std::string("guard must produce a boolean, got ") + type_name(v));
  }
  return std::get<bool>(v);
}

std::string format_guard(const GuardExpr& expr) {
  std::string out;
  write(expr, out);
  return out;
}

}  // namespace goalnet
