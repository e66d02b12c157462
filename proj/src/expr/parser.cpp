#include "rtm/expr/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>

namespace rtm::expr {

namespace {

enum class Tok {
  End, Int, Float, String, Ident, LParen, RParen, Comma, Dot,
  Plus, Minus, Star, Slash, Lt, Le, Gt, Ge, Eq, Ne,
  And, Or, Not, True, False,
};

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  std::string text;  // identifier name or decoded string
  std::int64_t int_value = 0;
  double float_value = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    Token t;
    t.pos = pos_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return word(t);
    if (c == '\'') return string(t);
    ++pos_;
    switch (c) {
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case ',': t.kind = Tok::Comma; return t;
      case '.': t.kind = Tok::Dot; return t;
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '*': t.kind = Tok::Star; return t;
      case '/': t.kind = Tok::Slash; return t;
      case '=': t.kind = Tok::Eq; return t;
      case '<':
        if (peek() == '=') { ++pos_; t.kind = Tok::Le; }
        else if (peek() == '>') { ++pos_; t.kind = Tok::Ne; }
        else t.kind = Tok::Lt;
        return t;
      case '>':
        if (peek() == '=') { ++pos_; t.kind = Tok::Ge; }
        else t.kind = Tok::Gt;
        return t;
      default:
        throw SyntaxError(t.pos, std::string("unexpected character '") + c + "'");
    }
  }

 private:
  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  Token number(Token t) {
    std::size_t start = pos_;
    bool is_float = false;
    auto digits = [&] {
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    };
    digits();
    if (peek() == '.' && pos_ + 1 < src_.size() &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      is_float = true;
      ++pos_;
      digits();
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        is_float = true;
        digits();
      } else {
        pos_ = save;
      }
    }
    if (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_') {
      throw SyntaxError(pos_, "malformed number");
    }
    std::string_view text = src_.substr(start, pos_ - start);
    if (is_float) {
      std::string buf(text);
      char* end = nullptr;
      double v = std::strtod(buf.c_str(), &end);
      if (!std::isfinite(v)) throw SyntaxError(t.pos, "float literal out of range");
      t.kind = Tok::Float;
      t.float_value = v;
    } else {
      std::int64_t v = 0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc{}) throw SyntaxError(t.pos, "integer literal out of range");
      t.kind = Tok::Int;
      t.int_value = v;
    }
    return t;
  }

  Token word(Token t) {
    std::size_t start = pos_;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
    t.text = std::string(src_.substr(start, pos_ - start));
    if (t.text == "and") t.kind = Tok::And;
    else if (t.text == "or") t.kind = Tok::Or;
    else if (t.text == "not") t.kind = Tok::Not;
    else if (t.text == "true") t.kind = Tok::True;
    else if (t.text == "false") t.kind = Tok::False;
    else t.kind = Tok::Ident;
    return t;
  }

  Token string(Token t) {
    ++pos_;
    while (true) {
      if (pos_ >= src_.size()) throw SyntaxError(t.pos, "unterminated string literal");
      char c = src_[pos_++];
      if (c == '\'') break;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw SyntaxError(t.pos, "unterminated string literal");
        char e = src_[pos_++];
        if (e != '\'' && e != '\\') throw SyntaxError(pos_ - 2, "unknown escape sequence");
        c = e;
      }
      t.text += c;
    }
    t.kind = Tok::String;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "'" + t.text + "'";
    case Tok::Int: return "integer literal";
    case Tok::Float: return "float literal";
    case Tok::String: return "string literal";
    default: return "operator";
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  ExprPtr parse() {
    ExprPtr e = or_expr();
    if (cur_.kind != Tok::End) throw SyntaxError(cur_.pos, "unexpected " + describe(cur_));
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  bool accept(Tok k) {
    if (cur_.kind != k) return false;
    advance();
    return true;
  }

  void expect(Tok k, const char* what) {
    if (!accept(k)) {
      throw SyntaxError(cur_.pos, std::string("expected ") + what + ", found " + describe(cur_));
    }
  }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (cur_.kind == Tok::Or) {
      std::size_t pos = lhs->position;
      advance();
      lhs = make_binary(BinaryOp::Or, lhs, and_expr(), pos);
    }
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (cur_.kind == Tok::And) {
      std::size_t pos = lhs->position;
      advance();
      lhs = make_binary(BinaryOp::And, lhs, not_expr(), pos);
    }
    return lhs;
  }

  ExprPtr not_expr() {
    if (cur_.kind == Tok::Not) {
      std::size_t pos = cur_.pos;
      advance();
      return make_unary(UnaryOp::Not, not_expr(), pos);
    }
    return comparison();
  }

  std::optional<BinaryOp> comparison_op() const {
    switch (cur_.kind) {
      case Tok::Eq: return BinaryOp::Eq;
      case Tok::Ne: return BinaryOp::Ne;
      case Tok::Lt: return BinaryOp::Lt;
      case Tok::Le: return BinaryOp::Le;
      case Tok::Gt: return BinaryOp::Gt;
      case Tok::Ge: return BinaryOp::Ge;
      default: return std::nullopt;
    }
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    if (auto op = comparison_op()) {
      advance();
      ExprPtr rhs = additive();
      if (comparison_op()) {
        throw SyntaxError(cur_.pos, "comparisons do not chain; add parentheses");
      }
      return make_binary(*op, lhs, rhs, lhs->position);
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      BinaryOp op = cur_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      lhs = make_binary(op, lhs, multiplicative(), lhs->position);
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = unary();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      BinaryOp op = cur_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      lhs = make_binary(op, lhs, unary(), lhs->position);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (cur_.kind == Tok::Minus) {
      std::size_t pos = cur_.pos;
      advance();
      return make_unary(UnaryOp::Neg, unary(), pos);
    }
    return primary();
  }

  ExprPtr primary() {
    Token t = cur_;
    switch (t.kind) {
      case Tok::Int: advance(); return make_literal(t.int_value, t.pos);
      case Tok::Float: advance(); return make_literal(t.float_value, t.pos);
      case Tok::String: advance(); return make_literal(t.text, t.pos);
      case Tok::True: advance(); return make_literal(true, t.pos);
      case Tok::False: advance(); return make_literal(false, t.pos);
      case Tok::LParen: {
        advance();
        ExprPtr inner = or_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        advance();
        if (cur_.kind == Tok::LParen) return call(t);
        if (cur_.kind != Tok::Dot) {
          throw SyntaxError(cur_.pos, "expected '.' after '" + t.text + "'");
        }
        advance();
        if (cur_.kind != Tok::Ident) {
          throw SyntaxError(cur_.pos, "attribute name expected after '.'");
        }
        std::string attr = cur_.text;
        advance();
        if (cur_.kind == Tok::Dot) {
          throw SyntaxError(cur_.pos, "navigation is limited to root.attribute");
        }
        return make_path(t.text, attr, t.pos);
      }
      default:
        throw SyntaxError(t.pos, "unexpected " + describe(t));
    }
  }

  ExprPtr call(const Token& name_tok) {
    Function fn;
    if (name_tok.text == "abs") fn = Function::Abs;
    else if (name_tok.text == "min") fn = Function::Min;
    else if (name_tok.text == "max") fn = Function::Max;
    else throw SyntaxError(name_tok.pos, "unknown function '" + name_tok.text + "'");
    advance();  // '('
    std::vector<ExprPtr> args;
    if (cur_.kind != Tok::RParen) {
      args.push_back(or_expr());
      while (accept(Tok::Comma)) args.push_back(or_expr());
    }
    expect(Tok::RParen, "')'");
    if (args.size() != arity(fn)) {
      throw SyntaxError(name_tok.pos, std::string(name(fn)) + " takes " +
                                          std::to_string(arity(fn)) + " argument(s)");
    }
    return make_call(fn, std::move(args), name_tok.pos);
  }

  Lexer lexer_;
  Token cur_;
};

// Binding strength used by the printer; larger binds tighter.
enum Level { kOr = 1, kAnd, kNot, kCmp, kAdd, kMul, kNeg, kAtom };

int level_of(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return kOr;
    case BinaryOp::And: return kAnd;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div: return kMul;
    default: return kCmp;
  }
}

class Printer {
 public:
  explicit Printer(PrintStyle style) : style_(style) {}

  std::string print(const Expr& e, int required) {
    auto [text, level] = render(e);
    bool wrap = level < required;
    if (style_ == PrintStyle::FullyParenthesized &&
        (std::holds_alternative<Unary>(e.node) || std::holds_alternative<Binary>(e.node))) {
      wrap = true;
    }
    return wrap ? "(" + text + ")" : text;
  }

 private:
  std::pair<std::string, int> render(const Expr& e) {
    if (const auto* lit = std::get_if<Literal>(&e.node)) {
      std::string text = format_literal(lit->value);
      return {text, text.starts_with("-") ? kNeg : kAtom};
    }
    if (const auto* path = std::get_if<Path>(&e.node)) {
      return {path->root + "." + path->attr, kAtom};
    }
    if (const auto* un = std::get_if<Unary>(&e.node)) {
      if (un->op == UnaryOp::Not) return {"not " + print(*un->operand, kNot), kNot};
      std::string inner = print(*un->operand, kNeg);
      // Keep "- -x" from lexing as a single token sequence that reads oddly.
      return {(inner.starts_with("-") ? "- " : "-") + inner, kNeg};
    }
    if (const auto* bin = std::get_if<Binary>(&e.node)) {
      int level = level_of(bin->op);
      int lhs_req = level == kCmp ? kAdd : level;
      int rhs_req = level == kCmp ? kAdd : level + 1;
      return {print(*bin->lhs, lhs_req) + " " + std::string(symbol(bin->op)) + " " +
                  print(*bin->rhs, rhs_req),
              level};
    }
    const auto& call = std::get<Call>(e.node);
    std::string text = std::string(name(call.fn)) + "(";
    for (std::size_t i = 0; i < call.args.size(); ++i) {
      if (i) text += ", ";
      text += print(*call.args[i], kOr);
    }
    return {text + ")", kAtom};
  }

  PrintStyle style_;
};

}  // namespace

ExprPtr parse_expr(std::string_view text) { return Parser(text).parse(); }

std::string print_expr(const Expr& e, PrintStyle style) { return Printer(style).print(e, kOr); }

std::string format_literal(const Value& v) {
  struct Visitor {
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, d);
      std::string text(buf, res.ptr);
      if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
      return text;
    }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      std::string out = "'";
      for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
      }
      return out + "'";
    }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace rtm::expr
