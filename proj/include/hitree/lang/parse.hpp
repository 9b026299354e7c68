// Concrete syntax.
//
//   e ::= #n | #() | x | (e) | e + e | e = e | e.1 | e.2 | !e | e ← e
//       | ref e | e || e | λ x, e | e e | let x := e in e | e; e
//       | call/cc (e) | throw e to e | assert (e) | FAA(e)
//       | if e then e else e
//
// Binding, loosest to tightest: let/λ/if/throw bodies extend right, then
// `;`, `||`, `←`, `=`, `+`, prefix `!`/`ref`, application (left
// associative), and projections `.1`/`.2`. Line comments start with `--`.
// ASCII spellings `\` and `<-` are accepted for `λ` and `←`.
//
// Sugar: `let x := e1 in e2` is `(λ x, e2)(e1)`; `e1; e2` is a let binding
// of `_`.

#pragma once

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hitree/lang/ast.hpp"

namespace hitree::lang {

struct SyntaxError : std::runtime_error {
  int line, column;
  SyntaxError(int line_, int column_, const std::string& what)
      : std::runtime_error("syntax error at " + std::to_string(line_) + ":" +
                           std::to_string(column_) + ": " + what),
        line(line_),
        column(column_) {}
};

namespace detail {

enum class Tok : std::uint8_t {
  integer, unit, ident,
  kw_let, kw_in, kw_if, kw_then, kw_else, kw_ref, kw_assert, kw_throw, kw_to, kw_faa, kw_callcc,
  lambda, assign_arrow, let_bind, par_bar, semi, lparen, rparen, comma,
  plus, equals, bang, dot1, dot2,
  end,
};

struct Token {
  Tok kind;
  std::string text;
  std::int64_t number = 0;
  int line = 1, column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::end) return out;
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(line_, col_, msg); }

  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  bool match(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip_trivia() {
    for (;;) {
      if (!eof() && std::isspace(static_cast<unsigned char>(peek()))) {
        advance();
      } else if (match("--")) {
        while (!eof() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  Token tok(Tok kind, std::string text, int line, int col, std::int64_t num = 0) {
    return Token{kind, std::move(text), num, line, col};
  }

  Token next() {
    int line = line_, col = col_;
    if (eof()) return tok(Tok::end, "", line, col);

    if (match("#")) {
      advance();
      if (match("()")) {
        advance(2);
        return tok(Tok::unit, "#()", line, col);
      }
      bool neg = false;
      if (peek() == '-') {
        neg = true;
        advance();
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digits after '#'");
      std::int64_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        n = n * 10 + (peek() - '0');
        advance();
      }
      return tok(Tok::integer, "", line, col, neg ? -n : n);
    }

    if (match("call/cc")) {
      advance(7);
      return tok(Tok::kw_callcc, "call/cc", line, col);
    }
    if (match("\xce\xbb")) {  // λ
      advance(2);
      return tok(Tok::lambda, "λ", line, col);
    }
    if (match("\\")) {
      advance();
      return tok(Tok::lambda, "\\", line, col);
    }
    if (match("\xe2\x86\x90")) {  // ←
      advance(3);
      return tok(Tok::assign_arrow, "←", line, col);
    }
    if (match("<-")) {
      advance(2);
      return tok(Tok::assign_arrow, "<-", line, col);
    }
    if (match(":=")) {
      advance(2);
      return tok(Tok::let_bind, ":=", line, col);
    }
    if (match("||")) {
      advance(2);
      return tok(Tok::par_bar, "||", line, col);
    }
    if (match(".1")) {
      advance(2);
      return tok(Tok::dot1, ".1", line, col);
    }
    if (match(".2")) {
      advance(2);
      return tok(Tok::dot2, ".2", line, col);
    }

    switch (peek()) {
      case ';': advance(); return tok(Tok::semi, ";", line, col);
      case '(': advance(); return tok(Tok::lparen, "(", line, col);
      case ')': advance(); return tok(Tok::rparen, ")", line, col);
      case ',': advance(); return tok(Tok::comma, ",", line, col);
      case '+': advance(); return tok(Tok::plus, "+", line, col);
      case '=': advance(); return tok(Tok::equals, "=", line, col);
      case '!': advance(); return tok(Tok::bang, "!", line, col);
      default: break;
    }

    if (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_') {
      std::string id;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
             peek() == '\'') {
        id += peek();
        advance();
      }
      if (id == "let") return tok(Tok::kw_let, id, line, col);
      if (id == "in") return tok(Tok::kw_in, id, line, col);
      if (id == "if") return tok(Tok::kw_if, id, line, col);
      if (id == "then") return tok(Tok::kw_then, id, line, col);
      if (id == "else") return tok(Tok::kw_else, id, line, col);
      if (id == "ref") return tok(Tok::kw_ref, id, line, col);
      if (id == "assert") return tok(Tok::kw_assert, id, line, col);
      if (id == "throw") return tok(Tok::kw_throw, id, line, col);
      if (id == "to") return tok(Tok::kw_to, id, line, col);
      if (id == "FAA") return tok(Tok::kw_faa, id, line, col);
      return tok(Tok::ident, id, line, col);
    }

    fail(std::string("unexpected character '") + peek() + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr run() {
    ExprPtr e = expr();
    expect(Tok::end, "end of input");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }
  bool at(Tok k) const { return peek().kind == k; }

  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }

  const Token& expect(Tok k, const std::string& what) {
    if (!at(k)) fail("expected " + what);
    return advance();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(peek().line, peek().column, msg);
  }

  static ExprPtr let_in(std::string name, ExprPtr bound, ExprPtr body) {
    return make(App{make(Lit{Value::lambda(std::move(name), std::move(body))}),
                    std::move(bound)});
  }

  // Binder forms extend to the right.
  ExprPtr expr() {
    if (accept(Tok::lambda)) {
      std::string x = expect(Tok::ident, "parameter name").text;
      expect(Tok::comma, "','");
      return make(Lit{Value::lambda(std::move(x), expr())});
    }
    if (accept(Tok::kw_let)) {
      std::string x = expect(Tok::ident, "binder name").text;
      expect(Tok::let_bind, "':='");
      ExprPtr bound = expr();
      expect(Tok::kw_in, "'in'");
      return let_in(std::move(x), std::move(bound), expr());
    }
    if (accept(Tok::kw_if)) {
      ExprPtr c = expr();
      expect(Tok::kw_then, "'then'");
      ExprPtr t = expr();
      expect(Tok::kw_else, "'else'");
      return make(If{std::move(c), std::move(t), expr()});
    }
    if (accept(Tok::kw_throw)) {
      ExprPtr v = seq();
      expect(Tok::kw_to, "'to'");
      return make(Throw{std::move(v), expr()});
    }
    return seq();
  }

  ExprPtr seq() {
    ExprPtr e = par();
    if (accept(Tok::semi)) return let_in("_", std::move(e), expr());
    return e;
  }

  ExprPtr par() {
    ExprPtr e = assign();
    while (accept(Tok::par_bar)) e = make(Par{std::move(e), assign()});
    return e;
  }

  ExprPtr assign() {
    ExprPtr e = equality();
    if (accept(Tok::assign_arrow)) return make(Assign{std::move(e), assign()});
    return e;
  }

  ExprPtr equality() {
    ExprPtr e = sum_();
    if (accept(Tok::equals)) return make(Eq{std::move(e), sum_()});
    return e;
  }

  ExprPtr sum_() {
    ExprPtr e = prefix();
    while (accept(Tok::plus)) e = make(Plus{std::move(e), prefix()});
    return e;
  }

  ExprPtr prefix() {
    if (accept(Tok::bang)) return make(Deref{prefix()});
    if (accept(Tok::kw_ref)) return make(Ref{prefix()});
    return application();
  }

  ExprPtr application() {
    ExprPtr e = postfix();
    while (starts_atom()) e = make(App{std::move(e), postfix()});
    return e;
  }

  ExprPtr postfix() {
    ExprPtr e = atom();
    for (;;) {
      if (accept(Tok::dot1)) e = make(Fst{std::move(e)});
      else if (accept(Tok::dot2)) e = make(Snd{std::move(e)});
      else return e;
    }
  }

  bool starts_atom() const {
    switch (peek().kind) {
      case Tok::integer:
      case Tok::unit:
      case Tok::ident:
      case Tok::lparen:
      case Tok::kw_callcc:
      case Tok::kw_assert:
      case Tok::kw_faa:
        return true;
      default:
        return false;
    }
  }

  ExprPtr atom() {
    if (at(Tok::integer)) return make(Lit{Value::integer(advance().number)});
    if (accept(Tok::unit)) return make(Lit{Value::unit()});
    if (at(Tok::ident)) return make(Var{advance().text});
    if (accept(Tok::lparen)) {
      ExprPtr e = expr();
      expect(Tok::rparen, "')'");
      return e;
    }
    if (accept(Tok::kw_callcc)) {
      expect(Tok::lparen, "'(' after call/cc");
      ExprPtr e = expr();
      expect(Tok::rparen, "')'");
      return make(Callcc{std::move(e)});
    }
    if (accept(Tok::kw_assert)) {
      expect(Tok::lparen, "'(' after assert");
      ExprPtr e = expr();
      expect(Tok::rparen, "')'");
      return make(Assert{std::move(e)});
    }
    if (accept(Tok::kw_faa)) {
      expect(Tok::lparen, "'(' after FAA");
      ExprPtr e = expr();
      expect(Tok::rparen, "')'");
      return make(Faa{std::move(e)});
    }
    fail("expected an expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse(std::string_view source) {
  return detail::Parser(detail::Lexer(source).run()).run();
}

}  // namespace hitree::lang
