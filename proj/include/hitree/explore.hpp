// Bounded nondeterministic execution exploration.
//
// The explorer reifies the nondeterministic big-step semantics as a
// breadth-first search over configurations (tree, handler state): each
// effect node expands into the finite successor set its handler enumerates
// (every continuable thread, every admissible demonic choice), pure nodes
// record outcomes, unreachable nodes prune their branch. Depth and
// expansion budgets make the search total; the `exhausted` flag reports
// whether a budget was hit before all frontiers closed, in which case the
// outcome set is a lower bound rather than complete.
//
// Each recorded outcome carries the trace of choices that produced it
// (records are emitted at genuine branch points only); replaying a trace
// through the same handlers reproduces the outcome exactly. Breadth-first
// order makes the first trace found for an outcome a shortest one.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "hitree/eval.hpp"

namespace hitree {

// ---------------------------------------------------------------------------
// Traces

struct ChoiceRecord {
  std::uint64_t step = 0;   // index of the effect node along the path
  std::string effect;       // operation tag at the branch point
  std::size_t branch = 0;   // successor index chosen
  std::string note;         // human-readable description of the choice
  friend bool operator==(const ChoiceRecord& a, const ChoiceRecord& b) {
    return a.step == b.step && a.effect == b.effect && a.branch == b.branch;
  }
};

using Trace = std::vector<ChoiceRecord>;

template <class R>
struct ExploreResult {
  std::vector<std::pair<Outcome<R>, Trace>> outcomes;  // distinct outcomes, shortest trace each
  bool exhausted = false;  // true iff a bound was hit before all frontiers closed
};

struct Bounds {
  std::uint64_t max_depth = 10'000;
  std::uint64_t max_branches = 1'000'000;
};

struct MissingEnumerator : std::runtime_error {
  explicit MissingEnumerator(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Handler interface

template <class U, class R>
struct ExploreBranch {
  Tree<U, R> next;
  HandlerState<U, R> state;
  std::string note;
};

template <class U, class R>
struct ExploreStep {
  std::variant<std::vector<ExploreBranch<U, R>>, Outcome<R>> v;

  static ExploreStep terminal(Outcome<R> o) { return {std::move(o)}; }
  static ExploreStep branches(std::vector<ExploreBranch<U, R>> bs) { return {std::move(bs)}; }
  static ExploreStep one(Tree<U, R> t, HandlerState<U, R> s) {
    std::vector<ExploreBranch<U, R>> bs;
    bs.push_back({std::move(t), std::move(s), {}});
    return {std::move(bs)};
  }
};

/// Enumerates the finite successor set of one effect node, or terminates
/// the branch with an outcome. Successor lists are computed
/// deterministically from (input, state, continuation).
template <class U, class R>
using ExploreHandlerFn = std::function<ExploreStep<U, R>(
    const Input<U>&, const HandlerState<U, R>&, const ContOf<U, R>&)>;

template <class U, class R>
ExploreHandlerFn<U, R> sum_explore_handler(ExploreHandlerFn<U, R> left,
                                           ExploreHandlerFn<U, R> right) {
  return [left = std::move(left), right = std::move(right)](
             const Input<U>& i, const HandlerState<U, R>& s,
             const ContOf<U, R>& k) -> ExploreStep<U, R> {
    if (i.path.empty() || i.path.front() == PathStep::closed)
      throw std::logic_error("sum handler: input is not tagged left or right");
    PathStep head = i.path.front();
    Input<U> rest{Path(i.path.begin() + 1, i.path.end()), i.op, i.payload};
    ContOf<U, R> rek = [k, head](const Output<U>& o) {
      return k(Output<U>{concat({head}, o.path), o.op, o.payload});
    };
    return head == PathStep::left ? left(rest, s, rek) : right(rest, s, rek);
  };
}

template <class U, class R>
ExploreHandlerFn<U, R> unfold_explore_handler(UnfoldWitness w, ExploreHandlerFn<U, R> inner) {
  return [w = std::move(w), inner = std::move(inner)](
             const Input<U>& i, const HandlerState<U, R>& s, const ContOf<U, R>& k) {
    return inner(unfold_input(w, i), s, k);
  };
}

// ---------------------------------------------------------------------------
// Leaf handlers (mirroring the evaluator's, with choice made explicit)

template <class U, class R>
ExploreHandlerFn<U, R> state_explore_handler() {
  return [](const Input<U>& i, const HandlerState<U, R>& s,
            const ContOf<U, R>& k) -> ExploreStep<U, R> {
    HandlerState<U, R> s2 = s;
    if (i.op == "get")
      return ExploreStep<U, R>::one(k(make_output<U>({}, "get", s.state)), std::move(s2));
    if (i.op == "set") {
      s2.state = std::get<U>(i.payload);
      return ExploreStep<U, R>::one(k(make_output<U>({}, "set")), std::move(s2));
    }
    throw std::logic_error("state handler: unknown operation '" + i.op + "'");
  };
}

template <class U, class R>
ExploreHandlerFn<U, R> fail_explore_handler() {
  return [](const Input<U>&, const HandlerState<U, R>&, const ContOf<U, R>&) {
    return ExploreStep<U, R>::terminal(Outcome<R>::failure());
  };
}

/// One branch per enumerator candidate satisfying the choice predicate. An
/// empty admissible set kills the branch (no outcome).
template <class U, class R>
ExploreHandlerFn<U, R> demonic_explore_handler(std::vector<U> enumerator) {
  return [enumerator = std::move(enumerator)](const Input<U>& i, const HandlerState<U, R>& s,
                                              const ContOf<U, R>& k) -> ExploreStep<U, R> {
    const SharedPred<U>& p = std::get<SharedPred<U>>(i.payload);
    std::vector<ExploreBranch<U, R>> bs;
    for (const U& cand : enumerator) {
      if (!(*p)(cand)) continue;
      bs.push_back({k(make_output<U>({}, "choose", cand)), s,
                    "choose " + UniverseTraits<U>::display(cand)});
    }
    return ExploreStep<U, R>::branches(std::move(bs));
  };
}

/// Restriction of demonic choice to the evaluator's chooser: the single
/// successor the deterministic interpretation would take.
template <class U, class R>
ExploreHandlerFn<U, R> chooser_demonic_explore_handler(Chooser<U> choose) {
  return [choose = std::move(choose)](const Input<U>& i, const HandlerState<U, R>& s,
                                      const ContOf<U, R>& k) -> ExploreStep<U, R> {
    const SharedPred<U>& p = std::get<SharedPred<U>>(i.payload);
    std::optional<U> v = choose(*p);
    if (!v)
      return ExploreStep<U, R>::terminal(
          Outcome<R>::error(ErrorKind::no_choice, "no candidate satisfies the choice predicate"));
    return ExploreStep<U, R>::one(k(make_output<U>({}, "choose", *v)), s);
  };
}

/// fix/call are deterministic given the fixpoint table; a call to an
/// identifier that was never created has no successor (the branch is
/// vacuous, not an error).
template <class U, class R>
ExploreHandlerFn<U, R> rec_explore_handler() {
  return [](const Input<U>& i, const HandlerState<U, R>& s,
            const ContOf<U, R>& k) -> ExploreStep<U, R> {
    using FixFn = typename HandlerState<U, R>::FixFn;
    if (i.op == "fix") {
      const auto& fp = std::get<FixPayload<U>>(i.payload);
      HandlerState<U, R> s2 = s;
      FixId fid{s.fixpoints.size()};
      auto body = fp.body;
      auto fn = std::make_shared<const FixFn>([body, fid](const U& x) { return (*body)(fid, x); });
      s2.fixpoints.push_back(fn);
      return ExploreStep<U, R>::one(
          (*fn)(fp.arg).bind([k](const U& r) { return k(make_output<U>({}, "fix", r)); }),
          std::move(s2));
    }
    if (i.op == "call") {
      const auto& cp = std::get<CallPayload<U>>(i.payload);
      if (cp.fn.id >= s.fixpoints.size())
        return ExploreStep<U, R>::branches({});
      auto fn = s.fixpoints[cp.fn.id];
      return ExploreStep<U, R>::one(
          (*fn)(cp.arg).bind([k](const U& r) { return k(make_output<U>({}, "call", r)); }), s);
    }
    throw std::logic_error("recursion handler: unknown operation '" + i.op + "'");
  };
}

template <class U, class R>
ExploreHandlerFn<U, R> callcc_explore_handler() {
  return [](const Input<U>& i, const HandlerState<U, R>& s,
            const ContOf<U, R>& k) -> ExploreStep<U, R> {
    using ContFn = typename HandlerState<U, R>::ContFn;
    if (i.op == "callcc") {
      const auto& body = std::get<SharedContBody<U>>(i.payload);
      HandlerState<U, R> s2 = s;
      ContId kid{s.continuations.size()};
      s2.continuations.push_back(std::make_shared<const ContFn>(
          [k](const U& v) { return k(make_output<U>({}, "callcc", v)); }));
      return ExploreStep<U, R>::one(absurd<R>((*body)(kid)), std::move(s2));
    }
    if (i.op == "throw") {
      const auto& tp = std::get<ThrowPayload<U>>(i.payload);
      if (tp.target.id >= s.continuations.size())
        return ExploreStep<U, R>::branches({});
      return ExploreStep<U, R>::one((*s.continuations[tp.target.id])(tp.value), s);
    }
    throw std::logic_error("callcc handler: unknown operation '" + i.op + "'");
  };
}

enum class SchedulePolicy {
  enumerate_all,  // one successor per continuable thread
  round_robin,    // restriction to the evaluator's schedule
};

/// par/yield/kill update the pool exactly as in the evaluator; the successor
/// set then contains one branch per continuable thread (or only the
/// round-robin pick under the restricted policy). A pool with work left but
/// no continuable thread terminates the branch as a deadlock, as in the
/// evaluator.
template <class U, class R>
ExploreHandlerFn<U, R> conc_explore_handler(SchedulePolicy policy = SchedulePolicy::enumerate_all,
                                            std::size_t start_offset = 1) {
  return [policy, start_offset](const Input<U>& i, const HandlerState<U, R>& s,
                                const ContOf<U, R>& k) -> ExploreStep<U, R> {
    using T = Thread<U, R>;
    if (s.threads.empty() || s.current >= s.threads.size())
      throw std::logic_error("concurrency handler: thread pool not initialized");
    HandlerState<U, R> base = s;
    if (i.op == "par") {
      const auto& pp = std::get<ParPayload<U>>(i.payload);
      std::size_t n = base.threads.size();
      base.threads[base.current] =
          T::blocked(n, n + 1, std::make_shared<const typename Tree<U, R>::Cont>(k));
      base.threads.push_back(T::yielded(absurd<R>(pp.left)));
      base.threads.push_back(T::yielded(absurd<R>(pp.right)));
    } else if (i.op == "yield") {
      base.threads[base.current] = T::yielded(k(make_output<U>({}, "yield")));
    } else if (i.op == "kill") {
      base.threads[base.current] = T::completed(std::get<U>(i.payload));
    } else {
      throw std::logic_error("concurrency handler: unknown operation '" + i.op + "'");
    }

    if (policy == SchedulePolicy::round_robin) {
      std::variant<Tree<U, R>, Outcome<R>> next = schedule(base, start_offset);
      if (auto* t = std::get_if<Tree<U, R>>(&next))
        return ExploreStep<U, R>::one(std::move(*t), std::move(base));
      return ExploreStep<U, R>::terminal(std::move(std::get<Outcome<R>>(next)));
    }

    std::vector<ExploreBranch<U, R>> bs;
    for (std::size_t idx = 0; idx < base.threads.size(); ++idx) {
      HandlerState<U, R> s2 = base;
      if (std::optional<Tree<U, R>> t = try_resume_thread(s2, idx))
        bs.push_back({std::move(*t), std::move(s2), "thread " + std::to_string(idx)});
    }
    if (bs.empty()) {
      bool all_done = true;
      for (const T& th : base.threads) all_done = all_done && th.is_completed();
      if (!all_done)
        return ExploreStep<U, R>::terminal(Outcome<R>::deadlock("no thread can continue"));
    }
    return ExploreStep<U, R>::branches(std::move(bs));
  };
}

// ---------------------------------------------------------------------------
// The exploration engine

namespace detail {

template <class U, class R>
struct ExploreNode {
  Tree<U, R> tree;
  HandlerState<U, R> state;
  Trace trace;
  std::uint64_t depth = 0;
};

// Configuration cache keyed by (tree node identity, state fingerprint); a
// hit requires honest componentwise state equality. The cached trees are
// kept alive so node addresses stay unique for the whole search.
// Configurations whose components are incomparable (fresh closures) simply
// never collide.
template <class U, class R>
class Seen {
 public:
  bool insert(const Tree<U, R>& t, const HandlerState<U, R>& s) {
    std::size_t key = hash_mix(std::hash<const void*>{}(t.node_id()), state_fingerprint(s));
    auto& bucket = buckets_[key];
    for (const auto& [tree, st] : bucket)
      if (tree.identical(t) && state_equal(st, s)) return false;
    bucket.emplace_back(t, s);
    return true;
  }

 private:
  std::unordered_map<std::size_t, std::vector<std::pair<Tree<U, R>, HandlerState<U, R>>>>
      buckets_;
};

}  // namespace detail

/// Observer over every visited configuration, for queries about
/// mid-execution states rather than terminal outcomes.
template <class U, class R>
using StepCallback =
    std::function<void(const Tree<U, R>&, const HandlerState<U, R>&, std::uint64_t depth)>;

/// Breadth-first worklist search from (root, s0). Outcomes are
/// deduplicated; the first (hence shortest) trace per outcome is kept.
template <class U, class R>
ExploreResult<R> explore(Tree<U, R> root, HandlerState<U, R> s0,
                         const ExploreHandlerFn<U, R>& h, const Bounds& bounds = {},
                         const StepCallback<U, R>& on_step = {}) {
  ExploreResult<R> res;
  std::deque<detail::ExploreNode<U, R>> frontier;
  detail::Seen<U, R> seen;
  seen.insert(root, s0);
  frontier.push_back({std::move(root), std::move(s0), {}, 0});
  std::uint64_t expansions = 0;

  auto record = [&res](Outcome<R> o, const Trace& t) {
    for (const auto& [seen_o, seen_t] : res.outcomes)
      if (seen_o == o) return;
    res.outcomes.emplace_back(std::move(o), t);
  };

  while (!frontier.empty()) {
    detail::ExploreNode<U, R> node = std::move(frontier.front());
    frontier.pop_front();
    if (on_step) on_step(node.tree, node.state, node.depth);

    if (node.tree.is_pure()) {
      record(Outcome<R>::value_of(node.tree.value()), node.trace);
      continue;
    }
    if (node.tree.is_unreachable()) continue;  // impossible branch: prune

    if (node.depth >= bounds.max_depth) {
      record(Outcome<R>::depth_exceeded("path hit the depth bound"), node.trace);
      res.exhausted = true;
      continue;
    }
    if (expansions >= bounds.max_branches) {
      res.exhausted = true;
      break;
    }
    ++expansions;

    ExploreStep<U, R> step = h(node.tree.input(), node.state, node.tree.cont());
    if (auto* terminal = std::get_if<Outcome<R>>(&step.v)) {
      record(std::move(*terminal), node.trace);
      continue;
    }
    auto& branches = std::get<std::vector<ExploreBranch<U, R>>>(step.v);
    const bool branching = branches.size() > 1;
    for (std::size_t j = 0; j < branches.size(); ++j) {
      ExploreBranch<U, R>& br = branches[j];
      if (!seen.insert(br.next, br.state)) continue;
      Trace trace = node.trace;
      if (branching)
        trace.push_back({node.depth, node.tree.input().op, j, br.note});
      frontier.push_back(
          {std::move(br.next), std::move(br.state), std::move(trace), node.depth + 1});
    }
  }
  return res;
}

/// Witness query: the first recorded outcome satisfying the predicate,
/// together with the trace that produced it.
template <class R, class P>
std::optional<std::pair<Outcome<R>, Trace>> exists_outcome(const ExploreResult<R>& result,
                                                           P pred) {
  for (const auto& [o, t] : result.outcomes)
    if (pred(o)) return std::make_pair(o, t);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trace replay

template <class R>
struct ReplayResult {
  std::optional<Outcome<R>> outcome;
  std::string error;  // nonempty iff the trace does not fit the program
};

/// Re-runs a single path, consuming one choice record at every branch point
/// and checking it against the successor set. Deterministic steps advance
/// without records.
template <class U, class R>
ReplayResult<R> replay_trace(Tree<U, R> t, HandlerState<U, R> s, const ExploreHandlerFn<U, R>& h,
                             const Trace& trace, const Bounds& bounds = {}) {
  std::size_t next_record = 0;
  std::uint64_t depth = 0;
  auto finished = [&](Outcome<R> o) -> ReplayResult<R> {
    if (next_record != trace.size())
      return {std::nullopt, "trace has unused records"};
    return {std::move(o), {}};
  };
  for (;;) {
    if (t.is_pure()) return finished(Outcome<R>::value_of(t.value()));
    if (t.is_unreachable()) return {std::nullopt, "replay reached an unreachable branch"};
    if (depth >= bounds.max_depth)
      return finished(Outcome<R>::depth_exceeded("path hit the depth bound"));

    ExploreStep<U, R> step = h(t.input(), s, t.cont());
    if (auto* terminal = std::get_if<Outcome<R>>(&step.v)) return finished(std::move(*terminal));
    auto& branches = std::get<std::vector<ExploreBranch<U, R>>>(step.v);
    if (branches.empty()) return {std::nullopt, "branch died during replay"};
    std::size_t pick = 0;
    if (branches.size() > 1) {
      if (next_record >= trace.size()) return {std::nullopt, "trace ended at a branch point"};
      const ChoiceRecord& rec = trace[next_record++];
      if (rec.step != depth || rec.effect != t.input().op)
        return {std::nullopt, "trace record does not match the branch point"};
      if (rec.branch >= branches.size()) return {std::nullopt, "trace chose a missing branch"};
      pick = rec.branch;
    }
    t = std::move(branches[pick].next);
    s = std::move(branches[pick].state);
    ++depth;
  }
}

}  // namespace hitree
