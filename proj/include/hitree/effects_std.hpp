// The standard effect library: signature constructors and per-operation
// smart triggers.
//
// Each trigger injects its input through a subeffect witness and casts the
// output with a dynamic check: the matching output variant produces the
// operation's result, every other variant is absorbed into unreachable.
// Operations with uninhabited output (fail, kill, throw) generalize to an
// arbitrary result type, since no output can ever reach their continuation.

#pragma once

#include <functional>
#include <string>
#include <utility>

#include "hitree/tree.hpp"

namespace hitree {

// ---------------------------------------------------------------------------
// Signatures
//
// Payload domains (state values, choice values, recursion arguments and
// results, thread values) all live in the stack's universe U; the
// descriptors only record kinds. Factories return fresh descriptors:
// identity is what witness resolution matches on, so a stack builder keeps
// the instances it composed.

inline SigPtr fail_sig() {
  return Sig::leaf("FailE", {{"fail", {}, {PayloadKind::empty}}});
}

inline SigPtr state_sig() {
  return Sig::leaf("StateE", {{"get", {}, {PayloadKind::value}},
                              {"set", {{PayloadKind::value}}, {PayloadKind::unit}}});
}

inline SigPtr demonic_sig() {
  return Sig::leaf("DemonicE", {{"choose", {{PayloadKind::predicate}}, {PayloadKind::value}}});
}

inline SigPtr rec_sig(SigPtr over) {
  return Sig::leaf("RecE",
                   {{"fix", {{PayloadKind::fix_body, over}, {PayloadKind::value}}, {PayloadKind::value}},
                    {"call", {{PayloadKind::id}, {PayloadKind::value}}, {PayloadKind::value}}});
}

inline SigPtr callcc_sig(SigPtr over) {
  return Sig::leaf("CallccE",
                   {{"callcc", {{PayloadKind::cont_body, over}}, {PayloadKind::value}},
                    {"throw", {{PayloadKind::value}, {PayloadKind::id}}, {PayloadKind::empty}}});
}

inline SigPtr conc_sig(SigPtr over) {
  return Sig::leaf("ConcE",
                   {{"par", {{PayloadKind::tree, over}, {PayloadKind::tree, over}}, {PayloadKind::value_pair}},
                    {"kill", {{PayloadKind::value}}, {PayloadKind::empty}},
                    {"yield", {}, {PayloadKind::unit}}});
}

// ---------------------------------------------------------------------------
// Smart triggers

namespace detail {

// Casts the triggered output to the payload of the expected operation.
// Outputs of any other operation are unreachable by construction.
template <class U, class R, class Extract>
Tree<U, R> cast_output(const SubeffectWitness& w, Input<U> input, std::string expect,
                       Extract extract) {
  return trigger(w, std::move(input))
      .bind([expect = std::move(expect), extract = std::move(extract)](const Output<U>& o) {
        if (o.op != expect) return Tree<U, R>::unreachable();
        return extract(o);
      });
}

}  // namespace detail

/// Aborts the current execution. Output is uninhabited, so the result type
/// is arbitrary and the continuation is constantly unreachable.
template <class R, class U>
Tree<U, R> fail_op(const SubeffectWitness& w) {
  return trigger(w, make_input<U>({}, "fail")).bind([](const Output<U>&) {
    return Tree<U, R>::unreachable();
  });
}

template <class U>
Tree<U, U> get_op(const SubeffectWitness& w) {
  return detail::cast_output<U, U>(w, make_input<U>({}, "get"), "get", [](const Output<U>& o) {
    if (const U* v = std::get_if<U>(&o.payload)) return Tree<U, U>::pure(*v);
    return Tree<U, U>::unreachable();
  });
}

template <class U>
Tree<U, std::monostate> set_op(const SubeffectWitness& w, U v) {
  return detail::cast_output<U, std::monostate>(
      w, make_input<U>({}, "set", InPayload<U>(std::move(v))), "set",
      [](const Output<U>&) { return Tree<U, std::monostate>::pure({}); });
}

/// Demonic choice constrained by an executable predicate. The continuation
/// re-checks the predicate on the handler-supplied value, so a handler bug
/// is absorbed into unreachable rather than surfaced as a wrong value.
template <class U>
Tree<U, U> choose_op(const SubeffectWitness& w, PredFn<U> pred) {
  SharedPred<U> p = share_pred<U>(std::move(pred));
  return detail::cast_output<U, U>(
      w, make_input<U>({}, "choose", InPayload<U>(p)), "choose", [p](const Output<U>& o) {
        const U* v = std::get_if<U>(&o.payload);
        if (!v || !(*p)(*v)) return Tree<U, U>::unreachable();
        return Tree<U, U>::pure(*v);
      });
}

template <class U>
Tree<U, U> fix_op(const SubeffectWitness& w, FixBodyFn<U> body, U arg) {
  return detail::cast_output<U, U>(
      w,
      make_input<U>({}, "fix", InPayload<U>(FixPayload<U>{share_fix_body<U>(std::move(body)),
                                                          std::move(arg)})),
      "fix", [](const Output<U>& o) {
        if (const U* v = std::get_if<U>(&o.payload)) return Tree<U, U>::pure(*v);
        return Tree<U, U>::unreachable();
      });
}

template <class U>
Tree<U, U> call_op(const SubeffectWitness& w, FixId fn, U arg) {
  return detail::cast_output<U, U>(
      w, make_input<U>({}, "call", InPayload<U>(CallPayload<U>{fn, std::move(arg)})), "call",
      [](const Output<U>& o) {
        if (const U* v = std::get_if<U>(&o.payload)) return Tree<U, U>::pure(*v);
        return Tree<U, U>::unreachable();
      });
}

/// Recursion combinator: ties a self-referential function through the
/// fixpoint table. f receives a callable that re-enters the fixpoint.
template <class U, class F>
std::function<Tree<U, U>(U)> rec_op(const SubeffectWitness& w, F f) {
  return [w, f](U a) {
    FixBodyFn<U> body = [w, f](FixId fid, const U& arg) {
      auto self = [w, fid](U x) { return call_op<U>(w, fid, std::move(x)); };
      return f(self, arg);
    };
    return fix_op<U>(w, std::move(body), std::move(a));
  };
}

/// Captures the current continuation as an opaque identifier and runs the
/// body; the body can only terminate by throwing to a captured continuation.
template <class U>
Tree<U, U> callcc_op(const SubeffectWitness& w, ContBodyFn<U> body) {
  return detail::cast_output<U, U>(
      w, make_input<U>({}, "callcc", InPayload<U>(share_cont_body<U>(std::move(body)))),
      "callcc", [](const Output<U>& o) {
        if (const U* v = std::get_if<U>(&o.payload)) return Tree<U, U>::pure(*v);
        return Tree<U, U>::unreachable();
      });
}

template <class R, class U>
Tree<U, R> throw_op(const SubeffectWitness& w, U v, ContId target) {
  return trigger(w, make_input<U>({}, "throw", InPayload<U>(ThrowPayload<U>{std::move(v), target})))
      .bind([](const Output<U>&) { return Tree<U, R>::unreachable(); });
}

/// Runs two computations concurrently and resumes with the pair of values
/// their threads were killed with.
template <class U>
Tree<U, std::pair<U, U>> par_op(const SubeffectWitness& w, Tree<U, Never> left,
                                Tree<U, Never> right) {
  using P = std::pair<U, U>;
  return detail::cast_output<U, P>(
      w, make_input<U>({}, "par", InPayload<U>(ParPayload<U>{std::move(left), std::move(right)})),
      "par", [](const Output<U>& o) {
        if (const P* v = std::get_if<P>(&o.payload)) return Tree<U, P>::pure(*v);
        return Tree<U, P>::unreachable();
      });
}

template <class R, class U>
Tree<U, R> kill_op(const SubeffectWitness& w, U v) {
  return trigger(w, make_input<U>({}, "kill", InPayload<U>(std::move(v)))).bind([](const Output<U>&) {
    return Tree<U, R>::unreachable();
  });
}

template <class U>
Tree<U, std::monostate> yield_op(const SubeffectWitness& w) {
  return detail::cast_output<U, std::monostate>(
      w, make_input<U>({}, "yield"), "yield",
      [](const Output<U>&) { return Tree<U, std::monostate>::pure({}); });
}

}  // namespace hitree
