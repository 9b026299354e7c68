// Denotation of the lambda language into computation trees over the
// recursive effect stack
//
//   fix E. StateE(heap) (+) CallccE(Val, E) (+) RecE(Expr, Val, E)
//        (+) ConcE(Val, E) (+) FailE (+) DemonicE(Loc)
//
// in this exact spine order. The computation universe holds language
// values, heaps, and expressions; the heap is the state-effect component,
// locations are the demonic choice domain, and expressions are the
// recursion arguments (the denotation function itself is the recursive
// function, so application never recurses directly — it calls the
// fixpoint).
//
// A yield is emitted immediately before every heap-touching step (deref,
// assign, ref, and the single atomic read-modify-write of FAA), making
// those the interleaving points of concurrent programs.
//
// All dynamic errors (non-integer arithmetic, missing locations, non-lambda
// callees, failed assertions) are the failure effect, never host errors.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "hitree/eval.hpp"
#include "hitree/explore.hpp"
#include "hitree/lang/ast.hpp"

namespace hitree::lang {

using Heap = std::map<std::uint64_t, Value>;

/// The computation universe of the language stack.
struct LangU {
  std::variant<Value, Heap, ExprPtr> v;

  LangU() : v(Value::unit()) {}
  explicit LangU(Value val) : v(std::move(val)) {}
  explicit LangU(Heap h) : v(std::move(h)) {}
  explicit LangU(ExprPtr e) : v(std::move(e)) {}

  const Value* as_value() const { return std::get_if<Value>(&v); }
  const Heap* as_heap() const { return std::get_if<Heap>(&v); }
  const ExprPtr* as_expr() const { return std::get_if<ExprPtr>(&v); }

  friend bool operator==(const LangU& a, const LangU& b) {
    if (a.v.index() != b.v.index()) return false;
    if (const Value* x = a.as_value()) return equal(*x, *b.as_value());
    if (const Heap* h = a.as_heap()) {
      const Heap& g = *b.as_heap();
      if (h->size() != g.size()) return false;
      auto it = g.begin();
      for (const auto& [k, val] : *h) {
        if (it->first != k || !equal(val, it->second)) return false;
        ++it;
      }
      return true;
    }
    return equal(*a.as_expr(), *b.as_expr());
  }
};

inline std::string display(const LangU& u) {
  if (const Value* x = u.as_value()) return display(*x);
  if (const Heap* h = u.as_heap()) {
    std::string s = "{";
    for (const auto& [k, val] : *h) {
      if (s.size() > 1) s += ", ";
      s += std::to_string(k) + " ↦ " + display(val);
    }
    return s + "}";
  }
  return to_source(*u.as_expr());
}

using VTree = Tree<LangU, Value>;
using UTree = Tree<LangU, LangU>;

// ---------------------------------------------------------------------------
// The effect stack

struct LangStack {
  SigPtr stack;
  UnfoldWitness unfold;
  SigPtr state_e, callcc_e, rec_e, conc_e, fail_e, demonic_e;
  SubeffectWitness state_w, callcc_w, rec_w, conc_w, fail_w, demonic_w;

  static const LangStack& get() {
    static const LangStack instance = build();
    return instance;
  }

 private:
  static LangStack build() {
    LangStack s;
    FixResult fx = fix_effect("LangE", [](SigPtr self) {
      return sum(state_sig(),
                 sum(callcc_sig(self),
                     sum(rec_sig(self), sum(conc_sig(self), sum(fail_sig(), demonic_sig())))));
    });
    s.stack = fx.fixed;
    s.unfold = fx.unfold;
    s.state_e = find_leaf(s.stack, "StateE");
    s.callcc_e = find_leaf(s.stack, "CallccE");
    s.rec_e = find_leaf(s.stack, "RecE");
    s.conc_e = find_leaf(s.stack, "ConcE");
    s.fail_e = find_leaf(s.stack, "FailE");
    s.demonic_e = find_leaf(s.stack, "DemonicE");
    s.state_w = resolve_witness(s.state_e, s.stack);
    s.callcc_w = resolve_witness(s.callcc_e, s.stack);
    s.rec_w = resolve_witness(s.rec_e, s.stack);
    s.conc_w = resolve_witness(s.conc_e, s.stack);
    s.fail_w = resolve_witness(s.fail_e, s.stack);
    s.demonic_w = resolve_witness(s.demonic_e, s.stack);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Denotation

namespace detail {

template <class R>
Tree<LangU, R> fail_now() {
  return fail_op<R, LangU>(LangStack::get().fail_w);
}

inline VTree int_or_fail(const Value& v, const std::function<VTree(std::int64_t)>& k) {
  if (const std::int64_t* z = v.as_int()) return k(*z);
  return fail_now<Value>();
}

inline VTree loc_or_fail(const Value& v, const std::function<VTree(std::uint64_t)>& k) {
  if (const Value::Loc* l = v.as_loc()) return k(l->n);
  return fail_now<Value>();
}

/// Projects the universe value a handler fed back; a non-value is a handler
/// bug and the branch is discarded as unreachable.
inline VTree expect_value(const UTree& t) {
  return t.bind([](const LangU& u) {
    if (const Value* v = u.as_value()) return VTree::pure(*v);
    return VTree::unreachable();
  });
}

template <class F>  // F: (const Heap&) -> VTree
VTree with_heap(F k) {
  return get_op<LangU>(LangStack::get().state_w).bind([k = std::move(k)](const LangU& u) {
    if (const Heap* h = u.as_heap()) return k(*h);
    return VTree::unreachable();
  });
}

template <class F>  // F: () -> VTree, run after the yield
VTree yield_then(F k) {
  return yield_op<LangU>(LangStack::get().conc_w)
      .bind([k = std::move(k)](const std::monostate&) { return k(); });
}

inline VTree set_heap_then(Heap h, VTree next) {
  return set_op<LangU>(LangStack::get().state_w, LangU(std::move(h)))
      .bind([next = std::move(next)](const std::monostate&) { return next; });
}

using Self = std::function<VTree(const ExprPtr&)>;

inline VTree denote_raw(const Self& self, const ExprPtr& e);

inline VTree denote_binary(const Self& self, const ExprPtr& lhs, const ExprPtr& rhs,
                           std::function<VTree(const Value&, const Value&)> k) {
  return denote_raw(self, lhs).bind([self, rhs, k = std::move(k)](const Value& v1) {
    return denote_raw(self, rhs).bind(
        [v1, k = std::move(k)](const Value& v2) { return k(v1, v2); });
  });
}

inline VTree denote_raw(const Self& self, const ExprPtr& e) {
  const LangStack& S = LangStack::get();
  return std::visit(
      [&](const auto& n) -> VTree {
        using N = std::decay_t<decltype(n)>;

        if constexpr (std::is_same_v<N, Lit>) {
          return VTree::pure(n.value);

        } else if constexpr (std::is_same_v<N, Var>) {
          return fail_now<Value>();  // open programs are dynamic failures

        } else if constexpr (std::is_same_v<N, Plus>) {
          return denote_binary(self, n.lhs, n.rhs, [](const Value& v1, const Value& v2) {
            return int_or_fail(v1, [&v2](std::int64_t z1) {
              return int_or_fail(v2, [z1](std::int64_t z2) {
                return VTree::pure(Value::integer(z1 + z2));
              });
            });
          });

        } else if constexpr (std::is_same_v<N, Eq>) {
          // Decidable on integers, locations and continuations; comparing
          // pairs or lambdas fails.
          return denote_binary(self, n.lhs, n.rhs, [](const Value& v1, const Value& v2) {
            if (v1.as_pair() || v1.as_lambda() || v2.as_pair() || v2.as_lambda())
              return fail_now<Value>();
            return VTree::pure(Value::integer(equal(v1, v2) ? 1 : 0));
          });

        } else if constexpr (std::is_same_v<N, Fst> || std::is_same_v<N, Snd>) {
          return denote_raw(self, n.e).bind([](const Value& v) {
            if (const Value::PairPtr* p = v.as_pair())
              return VTree::pure(std::is_same_v<N, Fst> ? (*p)->first : (*p)->second);
            return fail_now<Value>();
          });

        } else if constexpr (std::is_same_v<N, Deref>) {
          return denote_raw(self, n.e).bind([](const Value& v) {
            return yield_then([v] {
              return with_heap([v](const Heap& h) {
                return loc_or_fail(v, [&h](std::uint64_t l) {
                  auto it = h.find(l);
                  if (it == h.end()) return fail_now<Value>();
                  return VTree::pure(it->second);
                });
              });
            });
          });

        } else if constexpr (std::is_same_v<N, Assign>) {
          return denote_binary(self, n.loc, n.value, [](const Value& vl, const Value& vr) {
            return yield_then([vl, vr] {
              return with_heap([vl, vr](const Heap& h) {
                return loc_or_fail(vl, [&h, &vr](std::uint64_t l) {
                  if (!h.contains(l)) return fail_now<Value>();
                  Heap h2 = h;
                  h2[l] = vr;
                  return set_heap_then(std::move(h2), VTree::pure(Value::unit()));
                });
              });
            });
          });

        } else if constexpr (std::is_same_v<N, Ref>) {
          return denote_raw(self, n.e).bind([&S](const Value& v) {
            return yield_then([&S, v] {
              return with_heap([&S, v](const Heap& h) {
                PredFn<LangU> fresh = [h](const LangU& cand) {
                  const Value* cv = cand.as_value();
                  if (!cv) return false;
                  const Value::Loc* l = cv->as_loc();
                  return l && !h.contains(l->n);
                };
                return choose_op<LangU>(S.demonic_w, std::move(fresh))
                    .bind([v, h](const LangU& cand) {
                      const Value::Loc loc = *cand.as_value()->as_loc();
                      Heap h2 = h;
                      h2[loc.n] = v;
                      return set_heap_then(std::move(h2), VTree::pure(Value::location(loc.n)));
                    });
              });
            });
          });

        } else if constexpr (std::is_same_v<N, Par>) {
          auto spawn = [&self, &S](const ExprPtr& side) {
            return denote_raw(self, side).bind([&S](const Value& v) {
              return kill_op<Never, LangU>(S.conc_w, LangU(v));
            });
          };
          return par_op<LangU>(S.conc_w, spawn(n.lhs), spawn(n.rhs))
              .bind([](const std::pair<LangU, LangU>& p) {
                const Value* v1 = p.first.as_value();
                const Value* v2 = p.second.as_value();
                if (!v1 || !v2) return VTree::unreachable();
                return VTree::pure(Value::pair(*v1, *v2));
              });

        } else if constexpr (std::is_same_v<N, App>) {
          return denote_binary(self, n.fn, n.arg, [self](const Value& vf, const Value& va) {
            const Value::Lambda* la = vf.as_lambda();
            if (!la) return fail_now<Value>();
            return self(subst(la->body, la->param, va));
          });

        } else if constexpr (std::is_same_v<N, Callcc>) {
          return denote_raw(self, n.e).bind([self, &S](const Value& vf) {
            if (!vf.as_lambda()) return fail_now<Value>();
            ContBodyFn<LangU> body = [self, vf, &S](ContId kid) -> Tree<LangU, Never> {
              ExprPtr applied =
                  make(App{make(Lit{vf}), make(Lit{Value::cont(kid.id)})});
              // A body that completes normally throws its value to the
              // captured continuation: call/cc of a non-escaping function
              // is the function's value.
              return self(applied).bind([&S, kid](const Value& r) {
                return throw_op<Never, LangU>(S.callcc_w, LangU(r), kid);
              });
            };
            return expect_value(callcc_op<LangU>(S.callcc_w, std::move(body)));
          });

        } else if constexpr (std::is_same_v<N, Throw>) {
          return denote_binary(self, n.value, n.cont, [&S](const Value& v, const Value& c) {
            const Value::ContRef* k = c.as_cont();
            if (!k) return fail_now<Value>();
            return throw_op<Value, LangU>(S.callcc_w, LangU(v), ContId{k->k});
          });

        } else if constexpr (std::is_same_v<N, Assert>) {
          return denote_raw(self, n.e).bind([](const Value& v) {
            const std::int64_t* z = v.as_int();
            if (!z || *z == 0) return fail_now<Value>();
            return VTree::pure(Value::unit());
          });

        } else if constexpr (std::is_same_v<N, Faa>) {
          // Atomic fetch-and-add: one yield, then read and write with no
          // interleaving point in between; the old value is returned.
          return denote_raw(self, n.e).bind([](const Value& v) {
            return yield_then([v] {
              return with_heap([v](const Heap& h) {
                return loc_or_fail(v, [&h](std::uint64_t l) {
                  auto it = h.find(l);
                  if (it == h.end()) return fail_now<Value>();
                  const std::int64_t* z = it->second.as_int();
                  if (!z) return fail_now<Value>();
                  Heap h2 = h;
                  h2[l] = Value::integer(*z + 1);
                  return set_heap_then(std::move(h2), VTree::pure(Value::integer(*z)));
                });
              });
            });
          });

        } else {  // If
          return denote_raw(self, n.cond)
              .bind([self, then_b = n.then_branch, else_b = n.else_branch](const Value& v) {
                const std::int64_t* z = v.as_int();
                if (!z) return fail_now<Value>();
                return denote_raw(self, *z != 0 ? then_b : else_b);
              });
        }
      },
      e->v);
}

}  // namespace detail

/// Denotation of a closed expression. The whole function is one recursive
/// function tied through the fixpoint effect: structural recursion handles
/// subexpressions, while beta reduction re-enters through the fixpoint so
/// non-terminating programs denote finite trees.
inline VTree denote(const ExprPtr& e) {
  const LangStack& S = LangStack::get();
  auto run = rec_op<LangU>(
      S.rec_w,
      [](std::function<UTree(LangU)> self_u, const LangU& arg) -> UTree {
        detail::Self self = [self_u](const ExprPtr& e2) -> VTree {
          return self_u(LangU(e2)).bind([](const LangU& r) {
            if (const Value* v = r.as_value()) return VTree::pure(*v);
            return VTree::unreachable();
          });
        };
        const ExprPtr* pe = arg.as_expr();
        if (!pe) return UTree::unreachable();
        return detail::denote_raw(self, *pe).map([](const Value& v) { return LangU(v); });
      });
  return detail::expect_value(run(LangU(e)));
}

// ---------------------------------------------------------------------------
// Interpreter stacks for the language

inline Chooser<LangU> location_chooser(std::uint64_t scan_cap = 65536) {
  return natural_chooser<LangU>([](std::uint64_t n) { return LangU(Value::location(n)); },
                                scan_cap);
}

// schedule_offset exists so tests can show the committed outcomes depend on
// the round-robin schedule; the shipped interpreter always uses 1 (the
// position after the current thread).
inline EvalHandlerFn<LangU, Value> eval_handler(std::uint64_t demonic_scan_cap = 65536,
                                                std::size_t schedule_offset = 1) {
  const LangStack& S = LangStack::get();
  return unfold_eval_handler<LangU, Value>(
      S.unfold,
      sum_eval_handler<LangU, Value>(
          state_eval_handler<LangU, Value>(),
          sum_eval_handler<LangU, Value>(
              callcc_eval_handler<LangU, Value>(),
              sum_eval_handler<LangU, Value>(
                  rec_eval_handler<LangU, Value>(),
                  sum_eval_handler<LangU, Value>(
                      conc_eval_handler<LangU, Value>(schedule_offset),
                      sum_eval_handler<LangU, Value>(
                          fail_eval_handler<LangU, Value>(),
                          demonic_eval_handler<LangU, Value>(
                              location_chooser(demonic_scan_cap))))))));
}

struct ExploreOptions {
  std::uint64_t enum_locs = 16;  // fresh-location candidates 0..enum_locs-1
  bool restrict_to_eval = false;  // round-robin schedule + evaluator's chooser
  std::uint64_t demonic_scan_cap = 65536;
};

inline ExploreHandlerFn<LangU, Value> explore_handler(const ExploreOptions& opt = {}) {
  const LangStack& S = LangStack::get();
  if (opt.enum_locs == 0 && !opt.restrict_to_eval)
    throw MissingEnumerator("location enumerator size must be positive");
  ExploreHandlerFn<LangU, Value> demonic =
      opt.restrict_to_eval
          ? chooser_demonic_explore_handler<LangU, Value>(
                location_chooser(opt.demonic_scan_cap))
          : [&] {
              std::vector<LangU> locs;
              for (std::uint64_t n = 0; n < opt.enum_locs; ++n)
                locs.push_back(LangU(Value::location(n)));
              return demonic_explore_handler<LangU, Value>(std::move(locs));
            }();
  SchedulePolicy policy =
      opt.restrict_to_eval ? SchedulePolicy::round_robin : SchedulePolicy::enumerate_all;
  return unfold_explore_handler<LangU, Value>(
      S.unfold,
      sum_explore_handler<LangU, Value>(
          state_explore_handler<LangU, Value>(),
          sum_explore_handler<LangU, Value>(
              callcc_explore_handler<LangU, Value>(),
              sum_explore_handler<LangU, Value>(
                  rec_explore_handler<LangU, Value>(),
                  sum_explore_handler<LangU, Value>(
                      conc_explore_handler<LangU, Value>(policy),
                      sum_explore_handler<LangU, Value>(fail_explore_handler<LangU, Value>(),
                                                        std::move(demonic)))))));
}

inline HandlerState<LangU, Value> fresh_state(const VTree& root,
                                              std::uint64_t fuel = 1'000'000) {
  return initial_state<LangU, Value>(LangU(Heap{}), root, fuel);
}

inline Outcome<Value> run_eval(const ExprPtr& e, std::uint64_t fuel = 1'000'000,
                               std::uint64_t demonic_scan_cap = 65536) {
  VTree t = denote(e);
  return eval(t, eval_handler(demonic_scan_cap), fresh_state(t, fuel)).first;
}

inline ExploreResult<Value> run_explore(const ExprPtr& e, const Bounds& bounds = {},
                                        const ExploreOptions& opt = {}) {
  VTree t = denote(e);
  return explore(t, fresh_state(t), explore_handler(opt), bounds);
}

}  // namespace hitree::lang

// Universe traits for the language universe: display drives trace notes,
// hashing drives configuration deduplication.
template <>
struct hitree::UniverseTraits<hitree::lang::LangU> {
  static std::string display(const hitree::lang::LangU& u) { return hitree::lang::display(u); }
  static std::size_t hash(const hitree::lang::LangU& u) {
    return std::hash<std::string>{}(hitree::lang::display(u));
  }
};

template <>
struct hitree::UniverseTraits<hitree::lang::Value> {
  static std::string display(const hitree::lang::Value& v) { return hitree::lang::display(v); }
  static std::size_t hash(const hitree::lang::Value& v) {
    return std::hash<std::string>{}(hitree::lang::display(v));
  }
};
