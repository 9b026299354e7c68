#include <catch_amalgamated.hpp>

#include <random>

#include "hitree/eval.hpp"
#include "hitree/explore.hpp"

using namespace hitree;
using U = std::int64_t;
using T = Tree<U, U>;

namespace {

struct Stack {
  SigPtr fail_e = fail_sig();
  SigPtr state_e = state_sig();
  SigPtr demonic_e = demonic_sig();
  SigPtr rec_e = rec_sig(nullptr);
  SigPtr callcc_e = callcc_sig(nullptr);
  SigPtr conc_e = conc_sig(nullptr);
  SigPtr stack = sum(state_e, sum(fail_e, sum(demonic_e, sum(rec_e, sum(callcc_e, conc_e)))));
  SubeffectWitness ws = resolve_witness(state_e, stack);
  SubeffectWitness wf = resolve_witness(fail_e, stack);
  SubeffectWitness wd = resolve_witness(demonic_e, stack);
  SubeffectWitness wr = resolve_witness(rec_e, stack);
  SubeffectWitness wc = resolve_witness(callcc_e, stack);
  SubeffectWitness wn = resolve_witness(conc_e, stack);

  EvalHandlerFn<U, U> handler(std::size_t offset = 1, std::uint64_t scan_cap = 65536) const {
    return sum_eval_handler<U, U>(
        state_eval_handler<U, U>(),
        sum_eval_handler<U, U>(
            fail_eval_handler<U, U>(),
            sum_eval_handler<U, U>(
                demonic_eval_handler<U, U>(
                    natural_chooser<U>([](std::uint64_t n) { return static_cast<U>(n); },
                                       scan_cap)),
                sum_eval_handler<U, U>(
                    rec_eval_handler<U, U>(),
                    sum_eval_handler<U, U>(callcc_eval_handler<U, U>(),
                                           conc_eval_handler<U, U>(offset))))));
  }

  std::pair<Outcome<U>, HandlerState<U, U>> run(const T& t, std::uint64_t fuel = 100000,
                                                std::size_t offset = 1) const {
    return eval(t, handler(offset), initial_state<U, U>(0, t, fuel));
  }
};

}  // namespace

TEST_CASE("eval of a pure tree returns its value") {
  Stack s;
  REQUIRE(s.run(T::pure(5)).first == Outcome<U>::value_of(5));
}

TEST_CASE("eval of unreachable is an interpreter error") {
  Stack s;
  auto o = s.run(T::unreachable()).first;
  REQUIRE(o.kind == OutcomeKind::error);
  REQUIRE(o.what == ErrorKind::unreachable_hit);
}

TEST_CASE("state updates flow through get and set") {
  Stack s;
  auto t = set_op<U>(s.ws, 5).bind([&s](const std::monostate&) { return get_op<U>(s.ws); });
  REQUIRE(s.run(t).first == Outcome<U>::value_of(5));
  REQUIRE(s.run(get_op<U>(s.ws), 100).first == Outcome<U>::value_of(0));  // initial state
}

TEST_CASE("sum handler dispatches by tag and re-tags outputs") {
  Stack s;
  REQUIRE(s.run(get_op<U>(s.ws)).first.kind == OutcomeKind::value);
  REQUIRE(s.run(fail_op<U, U>(s.wf)).first.kind == OutcomeKind::failure);
  // The state handler's output comes back wrapped for the get continuation:
  // a successful get proves the output was re-tagged onto the left spine.
  auto t = get_op<U>(s.ws).bind([](const U& v) { return T::pure(v + 1); });
  REQUIRE(s.run(t).first == Outcome<U>::value_of(1));
}

TEST_CASE("demonic choice takes the smallest satisfying natural") {
  Stack s;
  auto t = choose_op<U>(s.wd, [](const U& v) { return v != 0 && v != 1; });
  REQUIRE(s.run(t).first == Outcome<U>::value_of(2));
}

TEST_CASE("demonic choice with an unsatisfiable predicate reports no choice") {
  Stack s;
  auto t = choose_op<U>(s.wd, [](const U&) { return false; });
  auto o = s.run(t).first;
  REQUIRE(o.kind == OutcomeKind::error);
  REQUIRE(o.what == ErrorKind::no_choice);
}

TEST_CASE("recursion computes factorial") {
  Stack s;
  auto fact = rec_op<U>(s.wr, [](std::function<T(U)> self, const U& n) -> T {
    if (n == 0) return T::pure(1);
    return self(n - 1).map([n](const U& r) { return n * r; });
  });
  REQUIRE(s.run(fact(4)).first == Outcome<U>::value_of(24));
}

TEST_CASE("the diverging fixpoint exhausts any fuel bound") {
  Stack s;
  auto loop = rec_op<U>(s.wr, [](std::function<T(U)> self, const U& n) { return self(n); });
  for (std::uint64_t fuel : {10u, 100u, 1000u}) {
    REQUIRE(s.run(loop(0), fuel).first.kind == OutcomeKind::fuel_exhausted);
  }
}

TEST_CASE("fix assigns identifiers in table order") {
  Stack s;
  auto t = fix_op<U>(s.wr, [](FixId fid, const U&) { return T::pure(static_cast<U>(fid.id)); },
                     0);
  auto [o, st] = s.run(t);
  REQUIRE(o == Outcome<U>::value_of(0));
  REQUIRE(st.fixpoints.size() == 1);
  auto t2 = t.bind([&s](const U&) {
    return fix_op<U>(s.wr, [](FixId fid, const U&) { return T::pure(static_cast<U>(fid.id)); },
                     0);
  });
  REQUIRE(s.run(t2).first == Outcome<U>::value_of(1));
}

TEST_CASE("calling an unknown fixpoint id is a structured error") {
  Stack s;
  auto o = s.run(call_op<U>(s.wr, FixId{3}, 0)).first;
  REQUIRE(o.kind == OutcomeKind::error);
  REQUIRE(o.what == ErrorKind::invalid_fixpoint_id);
}

TEST_CASE("callcc captures and throw resumes the captured continuation") {
  Stack s;
  auto t = callcc_op<U>(s.wc, [&s](ContId k) { return throw_op<Never, U>(s.wc, 7, k); });
  REQUIRE(s.run(t).first == Outcome<U>::value_of(7));

  auto discard = callcc_op<U>(s.wc, [&s](ContId k) {
                   return throw_op<Never, U>(s.wc, 1, k);
                 }).bind([](const U& v) { return T::pure(v + 100); });
  REQUIRE(s.run(discard).first == Outcome<U>::value_of(101));
}

TEST_CASE("a callcc body that fails produces a failure") {
  Stack s;
  auto t = callcc_op<U>(s.wc, [&s](ContId) { return fail_op<Never, U>(s.wf); });
  REQUIRE(s.run(t).first.kind == OutcomeKind::failure);
}

TEST_CASE("throwing to an unknown continuation id is a structured error") {
  Stack s;
  auto o = s.run(throw_op<U, U>(s.wc, 1, ContId{9})).first;
  REQUIRE(o.kind == OutcomeKind::error);
  REQUIRE(o.what == ErrorKind::invalid_continuation_id);
}

TEST_CASE("parallel composition pairs the children's kill values") {
  Stack s;
  auto t = par_op<U>(s.wn, kill_op<Never, U>(s.wn, 1), kill_op<Never, U>(s.wn, 2))
               .bind([](const std::pair<U, U>& p) {
                 return T::pure(p.first * 10 + p.second);
               });
  auto [o, st] = s.run(t);
  REQUIRE(o == Outcome<U>::value_of(12));
  // Pool: root plus two completed children, both consumed by the resume.
  REQUIRE(st.threads.size() == 3);
  using Th = Thread<U, U>;
  for (std::size_t i : {1u, 2u}) {
    const auto* c = std::get_if<typename Th::Completed>(&st.threads[i].v);
    REQUIRE(c != nullptr);
    REQUIRE(c->consumed);
  }
}

TEST_CASE("round-robin runs the first child first") {
  Stack s;
  // Each child stamps the shared state with its own id on its turn; the
  // first writer is the thread scheduled first.
  auto child = [&s](U id) {
    return get_op<U>(s.ws).bind([&s, id](const U& v) {
      return set_op<U>(s.ws, v * 10 + id).bind([&s, id](const std::monostate&) {
        return kill_op<Never, U>(s.wn, id);
      });
    });
  };
  auto t = par_op<U>(s.wn, child(1), child(2)).bind([&s](const std::pair<U, U>&) {
    return get_op<U>(s.ws);
  });
  REQUIRE(s.run(t).first == Outcome<U>::value_of(12));  // 1 then 2
  // Perturbing the scan start flips the order; the committed behavior is
  // offset 1 (the position after the current thread).
  REQUIRE(s.run(t, 100000, 2).first == Outcome<U>::value_of(21));
}

TEST_CASE("a blocked thread resumes only after both children completed") {
  Stack s;
  auto slow = yield_op<U>(s.wn).bind([&s](const std::monostate&) {
    return yield_op<U>(s.wn).bind(
        [&s](const std::monostate&) { return kill_op<Never, U>(s.wn, 5); });
  });
  auto t = par_op<U>(s.wn, slow, kill_op<Never, U>(s.wn, 6)).bind([](const std::pair<U, U>& p) {
    return T::pure(p.first * 10 + p.second);
  });
  REQUIRE(s.run(t).first == Outcome<U>::value_of(56));
}

TEST_CASE("a corrupt pool with no runnable thread deadlocks") {
  Stack s;
  HandlerState<U, U> st = initial_state<U, U>(0, T::pure(0), 100);
  // One thread, blocked on itself: nothing can continue.
  st.threads[0] = Thread<U, U>::blocked(
      0, 0, std::make_shared<const typename T::Cont>([](const Output<U>&) { return T::pure(0); }));
  auto next = schedule(st);
  REQUIRE(std::holds_alternative<Outcome<U>>(next));
  REQUIRE(std::get<Outcome<U>>(next).kind == OutcomeKind::deadlock);
}

TEST_CASE("thread pools only grow and completed threads stay completed") {
  Stack s;
  auto t = par_op<U>(s.wn,
                     par_op<U>(s.wn, kill_op<Never, U>(s.wn, 1), kill_op<Never, U>(s.wn, 2))
                         .bind([&s](const std::pair<U, U>& p) {
                           return kill_op<Never, U>(s.wn, p.first + p.second);
                         }),
                     kill_op<Never, U>(s.wn, 4))
               .bind([](const std::pair<U, U>& p) { return T::pure(p.first + p.second); });
  auto [o, st] = s.run(t);
  REQUIRE(o == Outcome<U>::value_of(7));
  REQUIRE(st.threads.size() == 5);  // root + two + nested two
}

TEST_CASE("eval agrees with restricted exploration on choice-free stacks") {
  // Programs over state, failure and demonic choice only: the evaluator's
  // outcome is the single outcome of the chooser-restricted exploration.
  Stack s;
  std::mt19937_64 rng(77);
  auto chooser = natural_chooser<U>([](std::uint64_t n) { return static_cast<U>(n); });
  auto explore_handler = sum_explore_handler<U, U>(
      state_explore_handler<U, U>(),
      sum_explore_handler<U, U>(
          fail_explore_handler<U, U>(),
          sum_explore_handler<U, U>(
              chooser_demonic_explore_handler<U, U>(chooser),
              sum_explore_handler<U, U>(
                  rec_explore_handler<U, U>(),
                  sum_explore_handler<U, U>(
                      callcc_explore_handler<U, U>(),
                      conc_explore_handler<U, U>(SchedulePolicy::round_robin))))));

  // Trees are generated eagerly so each program is a fixed value; both
  // interpreters must see the same computation.
  std::function<T(int)> gen = [&](int depth) -> T {
    switch (rng() % (depth <= 0 ? 2 : 6)) {
      case 0: return T::pure(static_cast<U>(rng() % 5));
      case 1: return rng() % 8 == 0 ? fail_op<U, U>(s.wf) : T::pure(1);
      case 2: {
        T rest = gen(depth - 1);
        return set_op<U>(s.ws, static_cast<U>(rng() % 9))
            .bind([rest](const std::monostate&) { return rest; });
      }
      case 3: {
        T rest = gen(depth - 1);
        return get_op<U>(s.ws).bind([rest](const U& v) {
          return rest.map([v](const U& w) { return v + w; });
        });
      }
      case 4: {
        U floor = static_cast<U>(rng() % 4);
        T rest = gen(depth - 1);
        return choose_op<U>(s.wd, [floor](const U& v) { return v >= floor; })
            .bind([rest](const U&) { return rest; });
      }
      default: {
        T first = gen(depth - 1);
        T second = gen(depth - 2);
        return first.bind([second](const U& v) {
          return second.map([v](const U& w) { return v + w; });
        });
      }
    }
  };

  for (int i = 0; i < 200; ++i) {
    T t = gen(4);
    auto [eo, est] = s.run(t);
    auto res = explore(t, initial_state<U, U>(0, t, 100000), explore_handler, Bounds{});
    REQUIRE(res.outcomes.size() == 1);
    REQUIRE(res.outcomes[0].first == eo);
    REQUIRE_FALSE(res.exhausted);
  }
}
