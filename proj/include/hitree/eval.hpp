// Deterministic interpretation: handler interface, per-effect handlers,
// sum/unfold handler lifting, the cooperative round-robin scheduler, and
// the fueled eval loop.
//
// A handler consumes exactly one effect node per call, with read/write
// access to the run's HandlerState, and either produces the next tree to
// drive or terminates the run with an outcome. Fuel replaces unbounded
// recursion: one unit per handled node, so eval is total.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hitree/effects_std.hpp"
#include "hitree/tree.hpp"

namespace hitree {

// ---------------------------------------------------------------------------
// Outcomes

enum class ErrorKind : std::uint8_t {
  invalid_fixpoint_id,
  invalid_continuation_id,
  no_choice,
  unreachable_hit,
};

enum class OutcomeKind : std::uint8_t {
  value,
  failure,
  fuel_exhausted,
  deadlock,
  depth_exceeded,  // reported by the explorer only
  error,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_fixpoint_id: return "invalid-fixpoint-id";
    case ErrorKind::invalid_continuation_id: return "invalid-continuation-id";
    case ErrorKind::no_choice: return "no-choice";
    case ErrorKind::unreachable_hit: return "unreachable-hit";
  }
  return "?";
}

inline const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::value: return "value";
    case OutcomeKind::failure: return "failure";
    case OutcomeKind::fuel_exhausted: return "fuel-exhausted";
    case OutcomeKind::deadlock: return "deadlock";
    case OutcomeKind::depth_exceeded: return "depth-exceeded";
    case OutcomeKind::error: return "error";
  }
  return "?";
}

/// The single result of a run. Equality ignores the human-readable detail.
template <class R>
struct Outcome {
  OutcomeKind kind = OutcomeKind::failure;
  std::optional<R> result{};
  std::optional<ErrorKind> what{};
  std::string detail{};

  static Outcome value_of(R r) {
    Outcome o;
    o.kind = OutcomeKind::value;
    o.result = std::move(r);
    return o;
  }
  static Outcome failure() { return Outcome{OutcomeKind::failure, {}, {}, {}}; }
  static Outcome fuel_exhausted() { return Outcome{OutcomeKind::fuel_exhausted, {}, {}, {}}; }
  static Outcome deadlock(std::string detail = {}) {
    return Outcome{OutcomeKind::deadlock, {}, {}, std::move(detail)};
  }
  static Outcome depth_exceeded(std::string detail = {}) {
    return Outcome{OutcomeKind::depth_exceeded, {}, {}, std::move(detail)};
  }
  static Outcome error(ErrorKind k, std::string detail = {}) {
    return Outcome{OutcomeKind::error, {}, k, std::move(detail)};
  }

  bool is_value() const { return kind == OutcomeKind::value; }
  bool is_failure() const { return kind == OutcomeKind::failure; }

  friend bool operator==(const Outcome& a, const Outcome& b) {
    return a.kind == b.kind && a.result == b.result && a.what == b.what;
  }
};

template <class R>
std::string describe(const Outcome<R>& o) {
  std::string s = to_string(o.kind);
  if (o.result) s += " " + UniverseTraits<R>::display(*o.result);
  if (o.what) s += std::string(" (") + to_string(*o.what) + ")";
  if (!o.detail.empty()) s += ": " + o.detail;
  return s;
}

// ---------------------------------------------------------------------------
// Handler state

/// One logical thread of the cooperative pool. A blocked thread waits for
/// the two threads of a parallel composition and resumes with the pair of
/// their completion values; completed threads never run again.
template <class U, class R>
struct Thread {
  using ContPtr = std::shared_ptr<const typename Tree<U, R>::Cont>;

  struct Yielded {
    Tree<U, R> body;
  };
  struct Completed {
    U value;
    bool consumed = false;  // set once the blocked parent has resumed
  };
  struct Blocked {
    std::size_t child1, child2;
    ContPtr resume;
  };

  std::variant<Yielded, Completed, Blocked> v;

  static Thread yielded(Tree<U, R> t) { return {Yielded{std::move(t)}}; }
  static Thread completed(U value) { return {Completed{std::move(value), false}}; }
  static Thread blocked(std::size_t c1, std::size_t c2, ContPtr k) {
    return {Blocked{c1, c2, std::move(k)}};
  }

  bool is_completed() const { return std::holds_alternative<Completed>(v); }
};

/// Mutable context of one run: the state-effect component, the thread pool
/// with the currently driven thread, the append-only fixpoint and
/// continuation tables, and the remaining fuel. Identifier validity is
/// index-bounds against the tables; violations are runtime outcomes, never
/// memory errors.
template <class U, class R>
struct HandlerState {
  using FixFn = std::function<Tree<U, U>(const U&)>;
  using ContFn = std::function<Tree<U, R>(const U&)>;

  U state{};
  std::vector<Thread<U, R>> threads{};
  std::size_t current = 0;
  std::vector<std::shared_ptr<const FixFn>> fixpoints{};
  std::vector<std::shared_ptr<const ContFn>> continuations{};
  std::uint64_t fuel = 1'000'000;
};

template <class U, class R>
HandlerState<U, R> initial_state(U state0, Tree<U, R> root, std::uint64_t fuel = 1'000'000) {
  HandlerState<U, R> s;
  s.state = std::move(state0);
  s.threads.push_back(Thread<U, R>::yielded(std::move(root)));
  s.current = 0;
  s.fuel = fuel;
  return s;
}

// Componentwise comparison for configuration deduplication. Closures and
// tree continuations are compared by identity, which is sound (identical
// objects behave identically) but incomplete; incomparable components simply
// make fewer configurations collapse.
template <class U, class R>
bool thread_equal(const Thread<U, R>& a, const Thread<U, R>& b) {
  using T = Thread<U, R>;
  if (a.v.index() != b.v.index()) return false;
  if (const auto* y = std::get_if<typename T::Yielded>(&a.v))
    return y->body.identical(std::get<typename T::Yielded>(b.v).body);
  if (const auto* c = std::get_if<typename T::Completed>(&a.v)) {
    const auto& d = std::get<typename T::Completed>(b.v);
    return c->value == d.value && c->consumed == d.consumed;
  }
  const auto& x = std::get<typename T::Blocked>(a.v);
  const auto& y = std::get<typename T::Blocked>(b.v);
  return x.child1 == y.child1 && x.child2 == y.child2 && x.resume == y.resume;
}

template <class U, class R>
bool state_equal(const HandlerState<U, R>& a, const HandlerState<U, R>& b) {
  if (!(a.state == b.state) || a.current != b.current || a.fuel != b.fuel) return false;
  if (a.threads.size() != b.threads.size() || a.fixpoints.size() != b.fixpoints.size() ||
      a.continuations.size() != b.continuations.size())
    return false;
  for (std::size_t i = 0; i < a.threads.size(); ++i)
    if (!thread_equal(a.threads[i], b.threads[i])) return false;
  for (std::size_t i = 0; i < a.fixpoints.size(); ++i)
    if (a.fixpoints[i] != b.fixpoints[i]) return false;
  for (std::size_t i = 0; i < a.continuations.size(); ++i)
    if (a.continuations[i] != b.continuations[i]) return false;
  return true;
}

template <class U, class R>
std::size_t state_fingerprint(const HandlerState<U, R>& s) {
  std::size_t h = hash_mix(UniverseTraits<U>::hash(s.state), s.current);
  for (const Thread<U, R>& t : s.threads) {
    using T = Thread<U, R>;
    h = hash_mix(h, t.v.index());
    if (const auto* y = std::get_if<typename T::Yielded>(&t.v))
      h = hash_mix(h, std::hash<const void*>{}(y->body.node_id()));
    else if (const auto* c = std::get_if<typename T::Completed>(&t.v))
      h = hash_mix(h, UniverseTraits<U>::hash(c->value));
    else {
      const auto& bl = std::get<typename T::Blocked>(t.v);
      h = hash_mix(hash_mix(h, bl.child1), bl.child2);
    }
  }
  h = hash_mix(h, s.fixpoints.size());
  h = hash_mix(h, s.continuations.size());
  return h;
}

// ---------------------------------------------------------------------------
// Handler interface

template <class U, class R>
using ContOf = typename Tree<U, R>::Cont;

template <class U, class R>
struct EvalStep {
  std::variant<Tree<U, R>, Outcome<R>> next;
};

template <class U, class R>
using EvalHandlerFn =
    std::function<EvalStep<U, R>(const Input<U>&, const ContOf<U, R>&, HandlerState<U, R>&)>;

/// Lifts a handler that maps each input directly to one output: the
/// continuation is applied to the produced output.
template <class U, class R, class F>
EvalHandlerFn<U, R> simple_eval_handler(F f) {
  return [f = std::move(f)](const Input<U>& i, const ContOf<U, R>& k,
                            HandlerState<U, R>& s) -> EvalStep<U, R> {
    std::variant<Output<U>, Outcome<R>> r = f(i, s);
    if (auto* out = std::get_if<Output<U>>(&r)) return {k(*out)};
    return {std::move(std::get<Outcome<R>>(r))};
  };
}

/// Dispatches on the injection tag and re-tags the continuation so outputs
/// flow back through the matching side.
template <class U, class R>
EvalHandlerFn<U, R> sum_eval_handler(EvalHandlerFn<U, R> left, EvalHandlerFn<U, R> right) {
  return [left = std::move(left), right = std::move(right)](
             const Input<U>& i, const ContOf<U, R>& k, HandlerState<U, R>& s) -> EvalStep<U, R> {
    if (i.path.empty() || i.path.front() == PathStep::closed)
      throw std::logic_error("sum handler: input is not tagged left or right");
    PathStep head = i.path.front();
    Input<U> rest{Path(i.path.begin() + 1, i.path.end()), i.op, i.payload};
    ContOf<U, R> rek = [k, head](const Output<U>& o) {
      return k(Output<U>{concat({head}, o.path), o.op, o.payload});
    };
    return head == PathStep::left ? left(rest, rek, s) : right(rest, rek, s);
  };
}

/// Unwraps inputs of a fixed effect and delegates to the handler of its
/// unfolding; output domains are equal, so outputs flow back untouched.
template <class U, class R>
EvalHandlerFn<U, R> unfold_eval_handler(UnfoldWitness w, EvalHandlerFn<U, R> inner) {
  return [w = std::move(w), inner = std::move(inner)](
             const Input<U>& i, const ContOf<U, R>& k, HandlerState<U, R>& s) {
    return inner(unfold_input(w, i), k, s);
  };
}

// ---------------------------------------------------------------------------
// Leaf handlers

template <class U, class R>
EvalHandlerFn<U, R> state_eval_handler() {
  return simple_eval_handler<U, R>(
      [](const Input<U>& i, HandlerState<U, R>& s) -> std::variant<Output<U>, Outcome<R>> {
        if (i.op == "get") return make_output<U>({}, "get", s.state);
        if (i.op == "set") {
          s.state = std::get<U>(i.payload);
          return make_output<U>({}, "set");
        }
        throw std::logic_error("state handler: unknown operation '" + i.op + "'");
      });
}

template <class U, class R>
EvalHandlerFn<U, R> fail_eval_handler() {
  return [](const Input<U>&, const ContOf<U, R>&, HandlerState<U, R>&) -> EvalStep<U, R> {
    return {Outcome<R>::failure()};
  };
}

template <class U>
using Chooser = std::function<std::optional<U>(const PredFn<U>&)>;

/// Deterministic chooser scanning an embedding of the naturals from 0 for
/// the smallest value satisfying the predicate.
template <class U, class Embed>
Chooser<U> natural_chooser(Embed embed, std::uint64_t scan_cap = 65536) {
  return [embed = std::move(embed), scan_cap](const PredFn<U>& p) -> std::optional<U> {
    for (std::uint64_t n = 0; n < scan_cap; ++n) {
      U v = embed(n);
      if (p(v)) return v;
    }
    return std::nullopt;
  };
}

template <class U, class R>
EvalHandlerFn<U, R> demonic_eval_handler(Chooser<U> choose) {
  return simple_eval_handler<U, R>(
      [choose = std::move(choose)](const Input<U>& i,
                                   HandlerState<U, R>&) -> std::variant<Output<U>, Outcome<R>> {
        const SharedPred<U>& p = std::get<SharedPred<U>>(i.payload);
        if (std::optional<U> v = choose(*p)) return make_output<U>({}, "choose", std::move(*v));
        return Outcome<R>::error(ErrorKind::no_choice,
                                 "no candidate satisfies the choice predicate");
      });
}

/// fix appends the body closed over the next free identifier and runs it;
/// call looks the identifier up. An identifier that was never created is a
/// structured error.
template <class U, class R>
EvalHandlerFn<U, R> rec_eval_handler() {
  return [](const Input<U>& i, const ContOf<U, R>& k, HandlerState<U, R>& s) -> EvalStep<U, R> {
    using FixFn = typename HandlerState<U, R>::FixFn;
    if (i.op == "fix") {
      const auto& fp = std::get<FixPayload<U>>(i.payload);
      FixId fid{s.fixpoints.size()};
      auto body = fp.body;
      auto fn = std::make_shared<const FixFn>(
          [body, fid](const U& x) { return (*body)(fid, x); });
      s.fixpoints.push_back(fn);
      return {(*fn)(fp.arg).bind(
          [k](const U& r) { return k(make_output<U>({}, "fix", r)); })};
    }
    if (i.op == "call") {
      const auto& cp = std::get<CallPayload<U>>(i.payload);
      if (cp.fn.id >= s.fixpoints.size())
        return {Outcome<R>::error(ErrorKind::invalid_fixpoint_id,
                                  "fixpoint id " + std::to_string(cp.fn.id) + " of table size " +
                                      std::to_string(s.fixpoints.size()))};
      auto fn = s.fixpoints[cp.fn.id];
      return {(*fn)(cp.arg).bind(
          [k](const U& r) { return k(make_output<U>({}, "call", r)); })};
    }
    throw std::logic_error("recursion handler: unknown operation '" + i.op + "'");
  };
}

/// callcc stores the continuation in the table and runs the body; throw
/// resumes a stored continuation, discarding the current one.
template <class U, class R>
EvalHandlerFn<U, R> callcc_eval_handler() {
  return [](const Input<U>& i, const ContOf<U, R>& k, HandlerState<U, R>& s) -> EvalStep<U, R> {
    using ContFn = typename HandlerState<U, R>::ContFn;
    if (i.op == "callcc") {
      const auto& body = std::get<SharedContBody<U>>(i.payload);
      ContId kid{s.continuations.size()};
      s.continuations.push_back(std::make_shared<const ContFn>(
          [k](const U& v) { return k(make_output<U>({}, "callcc", v)); }));
      return {absurd<R>((*body)(kid))};
    }
    if (i.op == "throw") {
      const auto& tp = std::get<ThrowPayload<U>>(i.payload);
      if (tp.target.id >= s.continuations.size())
        return {Outcome<R>::error(ErrorKind::invalid_continuation_id,
                                  "continuation id " + std::to_string(tp.target.id) +
                                      " of table size " + std::to_string(s.continuations.size()))};
      return {(*s.continuations[tp.target.id])(tp.value)};
    }
    throw std::logic_error("callcc handler: unknown operation '" + i.op + "'");
  };
}

// ---------------------------------------------------------------------------
// Concurrency

/// Resumes thread idx if it can continue: a yielded thread is driven
/// directly; a blocked thread whose children have both completed resumes
/// with the pair of their values and the children are marked consumed.
template <class U, class R>
std::optional<Tree<U, R>> try_resume_thread(HandlerState<U, R>& s, std::size_t idx) {
  using T = Thread<U, R>;
  T& th = s.threads[idx];
  if (auto* y = std::get_if<typename T::Yielded>(&th.v)) {
    s.current = idx;
    return y->body;
  }
  if (auto* b = std::get_if<typename T::Blocked>(&th.v)) {
    if (b->child1 >= s.threads.size() || b->child2 >= s.threads.size()) return std::nullopt;
    auto* c1 = std::get_if<typename T::Completed>(&s.threads[b->child1].v);
    auto* c2 = std::get_if<typename T::Completed>(&s.threads[b->child2].v);
    if (!c1 || !c2) return std::nullopt;
    auto resume = b->resume;
    std::pair<U, U> vals(c1->value, c2->value);
    c1->consumed = true;
    c2->consumed = true;
    s.current = idx;
    return (*resume)(make_output<U>({}, "par", std::move(vals)));
  }
  return std::nullopt;
}

/// Round-robin: scans the pool starting at the position start_offset after
/// the current thread, wrapping, and resumes the first thread whose
/// continue-check passes. No runnable thread with work remaining is a
/// deadlock.
template <class U, class R>
std::variant<Tree<U, R>, Outcome<R>> schedule(HandlerState<U, R>& s,
                                              std::size_t start_offset = 1) {
  const std::size_t n = s.threads.size();
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t idx = (s.current + start_offset + step) % n;
    if (std::optional<Tree<U, R>> t = try_resume_thread(s, idx)) return std::move(*t);
  }
  return Outcome<R>::deadlock("no thread can continue");
}

template <class U, class R>
EvalHandlerFn<U, R> conc_eval_handler(std::size_t start_offset = 1) {
  return [start_offset](const Input<U>& i, const ContOf<U, R>& k,
                        HandlerState<U, R>& s) -> EvalStep<U, R> {
    using T = Thread<U, R>;
    if (s.threads.empty() || s.current >= s.threads.size())
      throw std::logic_error("concurrency handler: thread pool not initialized");
    if (i.op == "par") {
      const auto& pp = std::get<ParPayload<U>>(i.payload);
      std::size_t n = s.threads.size();
      s.threads[s.current] =
          T::blocked(n, n + 1, std::make_shared<const typename Tree<U, R>::Cont>(k));
      s.threads.push_back(T::yielded(absurd<R>(pp.left)));
      s.threads.push_back(T::yielded(absurd<R>(pp.right)));
    } else if (i.op == "yield") {
      s.threads[s.current] = T::yielded(k(make_output<U>({}, "yield")));
    } else if (i.op == "kill") {
      s.threads[s.current] = T::completed(std::get<U>(i.payload));
    } else {
      throw std::logic_error("concurrency handler: unknown operation '" + i.op + "'");
    }
    std::variant<Tree<U, R>, Outcome<R>> next = schedule(s, start_offset);
    if (auto* t = std::get_if<Tree<U, R>>(&next)) return {std::move(*t)};
    return {std::move(std::get<Outcome<R>>(next))};
  };
}

// ---------------------------------------------------------------------------
// The eval loop

/// Drives a tree to an outcome: pure yields its value, unreachable is an
/// interpreter error, and each impure node costs one unit of fuel and is
/// delegated to the handler stack.
template <class U, class R>
std::pair<Outcome<R>, HandlerState<U, R>> eval(Tree<U, R> t, const EvalHandlerFn<U, R>& h,
                                               HandlerState<U, R> s) {
  for (;;) {
    if (t.is_pure()) return {Outcome<R>::value_of(t.value()), std::move(s)};
    if (t.is_unreachable())
      return {Outcome<R>::error(ErrorKind::unreachable_hit, "unreachable computation"),
              std::move(s)};
    if (s.fuel == 0) return {Outcome<R>::fuel_exhausted(), std::move(s)};
    --s.fuel;
    EvalStep<U, R> step = h(t.input(), t.cont(), s);
    if (auto* out = std::get_if<Outcome<R>>(&step.next)) return {std::move(*out), std::move(s)};
    t = std::move(std::get<Tree<U, R>>(step.next));
  }
}

}  // namespace hitree
