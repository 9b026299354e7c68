// Values and abstract syntax of the lambda language with concurrency and
// first-class continuations.
//
// Lambdas are values carrying their parameter and body; captured
// continuations surface as opaque continuation values whose indices are
// meaningful relative to one run's continuation table. Let-bindings and
// sequencing are surface sugar eliminated by the parser and never appear in
// the core syntax.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>

namespace hitree::lang {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Value {
  struct Loc {
    std::uint64_t n = 0;
    friend bool operator==(Loc, Loc) = default;
    friend auto operator<=>(Loc, Loc) = default;
  };
  struct ContRef {
    std::uint64_t k = 0;
    friend bool operator==(ContRef, ContRef) = default;
  };
  struct Lambda {
    std::string param;
    ExprPtr body;
  };
  using PairPtr = std::shared_ptr<const std::pair<Value, Value>>;

  std::variant<std::int64_t, Loc, PairPtr, ContRef, Lambda> v;

  static Value integer(std::int64_t z) { return {z}; }
  static Value unit() { return {std::int64_t{0}}; }  // #() is encoded as #0
  static Value location(std::uint64_t n) { return {Loc{n}}; }
  static Value pair(Value a, Value b) {
    return {std::make_shared<const std::pair<Value, Value>>(std::move(a), std::move(b))};
  }
  static Value cont(std::uint64_t k) { return {ContRef{k}}; }
  static Value lambda(std::string param, ExprPtr body) {
    return {Lambda{std::move(param), std::move(body)}};
  }

  const std::int64_t* as_int() const { return std::get_if<std::int64_t>(&v); }
  const Loc* as_loc() const { return std::get_if<Loc>(&v); }
  const PairPtr* as_pair() const { return std::get_if<PairPtr>(&v); }
  const ContRef* as_cont() const { return std::get_if<ContRef>(&v); }
  const Lambda* as_lambda() const { return std::get_if<Lambda>(&v); }
};

// Core expression constructors.
struct Lit {
  Value value;
};
struct Var {
  std::string name;
};
struct Plus {
  ExprPtr lhs, rhs;
};
struct Eq {
  ExprPtr lhs, rhs;
};
struct Fst {
  ExprPtr e;
};
struct Snd {
  ExprPtr e;
};
struct Deref {
  ExprPtr e;
};
struct Assign {
  ExprPtr loc, value;
};
struct Ref {
  ExprPtr e;
};
struct Par {
  ExprPtr lhs, rhs;
};
struct App {
  ExprPtr fn, arg;
};
struct Callcc {
  ExprPtr e;
};
struct Throw {
  ExprPtr value, cont;
};
struct Assert {
  ExprPtr e;
};
struct Faa {
  ExprPtr e;
};
struct If {
  ExprPtr cond, then_branch, else_branch;
};

struct Expr {
  std::variant<Lit, Var, Plus, Eq, Fst, Snd, Deref, Assign, Ref, Par, App, Callcc, Throw,
               Assert, Faa, If>
      v;
};

template <class Node>
ExprPtr make(Node n) {
  return std::make_shared<const Expr>(Expr{std::move(n)});
}

// ---------------------------------------------------------------------------
// Structural equality

bool equal(const Value& a, const Value& b);

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      [&b](const auto& x) -> bool {
        using N = std::decay_t<decltype(x)>;
        const N& y = std::get<N>(b->v);
        if constexpr (std::is_same_v<N, Lit>) return equal(x.value, y.value);
        else if constexpr (std::is_same_v<N, Var>) return x.name == y.name;
        else if constexpr (std::is_same_v<N, Plus> || std::is_same_v<N, Eq>)
          return equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
        else if constexpr (std::is_same_v<N, Fst> || std::is_same_v<N, Snd> ||
                           std::is_same_v<N, Deref> || std::is_same_v<N, Ref> ||
                           std::is_same_v<N, Callcc> || std::is_same_v<N, Assert> ||
                           std::is_same_v<N, Faa>)
          return equal(x.e, y.e);
        else if constexpr (std::is_same_v<N, Assign>)
          return equal(x.loc, y.loc) && equal(x.value, y.value);
        else if constexpr (std::is_same_v<N, Par>)
          return equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
        else if constexpr (std::is_same_v<N, App>)
          return equal(x.fn, y.fn) && equal(x.arg, y.arg);
        else if constexpr (std::is_same_v<N, Throw>)
          return equal(x.value, y.value) && equal(x.cont, y.cont);
        else
          return equal(x.cond, y.cond) && equal(x.then_branch, y.then_branch) &&
                 equal(x.else_branch, y.else_branch);
      },
      a->v);
}

inline bool equal(const Value& a, const Value& b) {
  if (a.v.index() != b.v.index()) return false;
  if (const auto* z = a.as_int()) return *z == *b.as_int();
  if (const auto* l = a.as_loc()) return *l == *b.as_loc();
  if (const auto* p = a.as_pair()) {
    const auto& q = *b.as_pair();
    return equal((*p)->first, q->first) && equal((*p)->second, q->second);
  }
  if (const auto* c = a.as_cont()) return *c == *b.as_cont();
  const auto& la = *a.as_lambda();
  const auto& lb = *b.as_lambda();
  return la.param == lb.param && equal(la.body, lb.body);
}

inline bool operator==(const Value& a, const Value& b) { return equal(a, b); }

// ---------------------------------------------------------------------------
// Printing

std::string to_source(const ExprPtr& e);

inline std::string display(const Value& v) {
  if (const auto* z = v.as_int()) return "#" + std::to_string(*z);
  if (const auto* l = v.as_loc()) return "loc " + std::to_string(l->n);
  if (const auto* p = v.as_pair())
    return "(" + display((*p)->first) + ", " + display((*p)->second) + ")";
  if (const auto* c = v.as_cont()) return "cont " + std::to_string(c->k);
  const auto& la = *v.as_lambda();
  return "λ" + la.param + ", " + to_source(la.body);
}

inline std::string to_source(const ExprPtr& e) {
  return std::visit(
      [](const auto& x) -> std::string {
        using N = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<N, Lit>) return display(x.value);
        else if constexpr (std::is_same_v<N, Var>) return x.name;
        else if constexpr (std::is_same_v<N, Plus>)
          return "(" + to_source(x.lhs) + " + " + to_source(x.rhs) + ")";
        else if constexpr (std::is_same_v<N, Eq>)
          return "(" + to_source(x.lhs) + " = " + to_source(x.rhs) + ")";
        else if constexpr (std::is_same_v<N, Fst>) return to_source(x.e) + ".1";
        else if constexpr (std::is_same_v<N, Snd>) return to_source(x.e) + ".2";
        else if constexpr (std::is_same_v<N, Deref>) return "!" + to_source(x.e);
        else if constexpr (std::is_same_v<N, Assign>)
          return "(" + to_source(x.loc) + " ← " + to_source(x.value) + ")";
        else if constexpr (std::is_same_v<N, Ref>) return "ref " + to_source(x.e);
        else if constexpr (std::is_same_v<N, Par>)
          return "(" + to_source(x.lhs) + " || " + to_source(x.rhs) + ")";
        else if constexpr (std::is_same_v<N, App>)
          return "(" + to_source(x.fn) + " " + to_source(x.arg) + ")";
        else if constexpr (std::is_same_v<N, Callcc>) return "call/cc (" + to_source(x.e) + ")";
        else if constexpr (std::is_same_v<N, Throw>)
          return "(throw " + to_source(x.value) + " to " + to_source(x.cont) + ")";
        else if constexpr (std::is_same_v<N, Assert>) return "assert (" + to_source(x.e) + ")";
        else if constexpr (std::is_same_v<N, Faa>) return "FAA(" + to_source(x.e) + ")";
        else
          return "(if " + to_source(x.cond) + " then " + to_source(x.then_branch) + " else " +
                 to_source(x.else_branch) + ")";
      },
      e->v);
}

/// Constructor-labelled rendering of the syntax tree.
inline std::string ast_string(const ExprPtr& e) {
  std::function<std::string(const ExprPtr&)> go;
  std::function<std::string(const Value&)> value_ast = [&](const Value& v) -> std::string {
    if (const auto* z = v.as_int()) return "(int " + std::to_string(*z) + ")";
    if (const auto* l = v.as_loc()) return "(loc " + std::to_string(l->n) + ")";
    if (const auto* p = v.as_pair())
      return "(pair " + value_ast((*p)->first) + " " + value_ast((*p)->second) + ")";
    if (const auto* c = v.as_cont()) return "(cont " + std::to_string(c->k) + ")";
    const auto& la = *v.as_lambda();
    return "(lambda " + la.param + " " + go(la.body) + ")";
  };
  go = [&](const ExprPtr& x) -> std::string {
    return std::visit(
        [&](const auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, Lit>) return value_ast(n.value);
          else if constexpr (std::is_same_v<N, Var>) return "(var " + n.name + ")";
          else if constexpr (std::is_same_v<N, Plus>)
            return "(plus " + go(n.lhs) + " " + go(n.rhs) + ")";
          else if constexpr (std::is_same_v<N, Eq>)
            return "(eq " + go(n.lhs) + " " + go(n.rhs) + ")";
          else if constexpr (std::is_same_v<N, Fst>) return "(fst " + go(n.e) + ")";
          else if constexpr (std::is_same_v<N, Snd>) return "(snd " + go(n.e) + ")";
          else if constexpr (std::is_same_v<N, Deref>) return "(deref " + go(n.e) + ")";
          else if constexpr (std::is_same_v<N, Assign>)
            return "(assign " + go(n.loc) + " " + go(n.value) + ")";
          else if constexpr (std::is_same_v<N, Ref>) return "(ref " + go(n.e) + ")";
          else if constexpr (std::is_same_v<N, Par>)
            return "(par " + go(n.lhs) + " " + go(n.rhs) + ")";
          else if constexpr (std::is_same_v<N, App>)
            return "(app " + go(n.fn) + " " + go(n.arg) + ")";
          else if constexpr (std::is_same_v<N, Callcc>) return "(callcc " + go(n.e) + ")";
          else if constexpr (std::is_same_v<N, Throw>)
            return "(throw " + go(n.value) + " " + go(n.cont) + ")";
          else if constexpr (std::is_same_v<N, Assert>) return "(assert " + go(n.e) + ")";
          else if constexpr (std::is_same_v<N, Faa>) return "(faa " + go(n.e) + ")";
          else
            return "(if " + go(n.cond) + " " + go(n.then_branch) + " " + go(n.else_branch) + ")";
        },
        x->v);
  };
  return go(e);
}

// ---------------------------------------------------------------------------
// Substitution
//
// The substituted value is a closed runtime value, so substitution only has
// to respect shadowing; no renaming is ever needed. Substitution descends
// into lambda values' bodies, where the program's remaining free
// occurrences live.

inline Value subst_value(const Value& val, const std::string& x, const Value& v);

inline ExprPtr subst(const ExprPtr& e, const std::string& x, const Value& v) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Lit>) return make(Lit{subst_value(n.value, x, v)});
        else if constexpr (std::is_same_v<N, Var>)
          return n.name == x ? make(Lit{v}) : e;
        else if constexpr (std::is_same_v<N, Plus>)
          return make(Plus{subst(n.lhs, x, v), subst(n.rhs, x, v)});
        else if constexpr (std::is_same_v<N, Eq>)
          return make(Eq{subst(n.lhs, x, v), subst(n.rhs, x, v)});
        else if constexpr (std::is_same_v<N, Fst>) return make(Fst{subst(n.e, x, v)});
        else if constexpr (std::is_same_v<N, Snd>) return make(Snd{subst(n.e, x, v)});
        else if constexpr (std::is_same_v<N, Deref>) return make(Deref{subst(n.e, x, v)});
        else if constexpr (std::is_same_v<N, Assign>)
          return make(Assign{subst(n.loc, x, v), subst(n.value, x, v)});
        else if constexpr (std::is_same_v<N, Ref>) return make(Ref{subst(n.e, x, v)});
        else if constexpr (std::is_same_v<N, Par>)
          return make(Par{subst(n.lhs, x, v), subst(n.rhs, x, v)});
        else if constexpr (std::is_same_v<N, App>)
          return make(App{subst(n.fn, x, v), subst(n.arg, x, v)});
        else if constexpr (std::is_same_v<N, Callcc>) return make(Callcc{subst(n.e, x, v)});
        else if constexpr (std::is_same_v<N, Throw>)
          return make(Throw{subst(n.value, x, v), subst(n.cont, x, v)});
        else if constexpr (std::is_same_v<N, Assert>) return make(Assert{subst(n.e, x, v)});
        else if constexpr (std::is_same_v<N, Faa>) return make(Faa{subst(n.e, x, v)});
        else
          return make(If{subst(n.cond, x, v), subst(n.then_branch, x, v),
                         subst(n.else_branch, x, v)});
      },
      e->v);
}

inline Value subst_value(const Value& val, const std::string& x, const Value& v) {
  if (const auto* p = val.as_pair())
    return Value::pair(subst_value((*p)->first, x, v), subst_value((*p)->second, x, v));
  if (const auto* la = val.as_lambda()) {
    if (la->param == x) return val;  // shadowed
    return Value::lambda(la->param, subst(la->body, x, v));
  }
  return val;
}

}  // namespace hitree::lang
