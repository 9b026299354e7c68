#include <catch_amalgamated.hpp>

#include "hitree/effects_std.hpp"
#include "hitree/explore.hpp"

using namespace hitree;
using U = std::int64_t;
using T = Tree<U, U>;

namespace {

struct Fixture {
  SigPtr fail_e = fail_sig();
  SigPtr state_e = state_sig();
  SigPtr demonic_e = demonic_sig();
  SigPtr rec_e = rec_sig(nullptr);
  SigPtr callcc_e = callcc_sig(nullptr);
  SigPtr conc_e = conc_sig(nullptr);
  SigPtr stack = sum(fail_e, sum(state_e, sum(demonic_e, sum(rec_e, sum(callcc_e, conc_e)))));

  SubeffectWitness w(const SigPtr& leaf) const { return resolve_witness(leaf, stack); }

  std::vector<Output<U>> outputs(const std::vector<U>& samples = {0, 1}) const {
    return enumerate_outputs<U>(stack, samples);
  }
};

// Feeds every constructible stack output to the trigger's continuation and
// checks that exactly the matching variant comes back pure.
template <class R>
void check_cast_table(const Fixture& fx, const Tree<U, R>& t, const SubeffectWitness& w,
                      const std::string& expect_op, bool any_match) {
  bool matched = false;
  for (const Output<U>& o : fx.outputs()) {
    auto projected = project_output(w, o);
    bool is_match = projected.has_value() && projected->op == expect_op;
    auto r = t.cont()(o);
    if (is_match) {
      matched = true;
      REQUIRE(r.is_pure());
    } else {
      REQUIRE(r.is_unreachable());
    }
  }
  REQUIRE(matched == any_match);
}

}  // namespace

TEST_CASE("every smart trigger casts exactly its own output variant") {
  Fixture fx;
  check_cast_table(fx, get_op<U>(fx.w(fx.state_e)), fx.w(fx.state_e), "get", true);
  check_cast_table(fx, set_op<U>(fx.w(fx.state_e), 7), fx.w(fx.state_e), "set", true);
  check_cast_table(fx, choose_op<U>(fx.w(fx.demonic_e), [](const U&) { return true; }),
                   fx.w(fx.demonic_e), "choose", true);
  check_cast_table(fx,
                   fix_op<U>(fx.w(fx.rec_e),
                             [](FixId, const U& x) { return T::pure(x); }, 1),
                   fx.w(fx.rec_e), "fix", true);
  check_cast_table(fx, call_op<U>(fx.w(fx.rec_e), FixId{0}, 1), fx.w(fx.rec_e), "call", true);
  check_cast_table(fx,
                   callcc_op<U>(fx.w(fx.callcc_e),
                                [](ContId) { return Tree<U, Never>::unreachable(); }),
                   fx.w(fx.callcc_e), "callcc", true);
  check_cast_table(fx,
                   par_op<U>(fx.w(fx.conc_e), Tree<U, Never>::unreachable(),
                             Tree<U, Never>::unreachable()),
                   fx.w(fx.conc_e), "par", true);
  check_cast_table(fx, yield_op<U>(fx.w(fx.conc_e)), fx.w(fx.conc_e), "yield", true);
}

TEST_CASE("uninhabited-output triggers are constantly unreachable") {
  Fixture fx;
  // fail, kill, throw: no constructible output matches, so the continuation
  // is unreachable on the whole domain.
  check_cast_table(fx, fail_op<U, U>(fx.w(fx.fail_e)), fx.w(fx.fail_e), "fail", false);
  check_cast_table(fx, kill_op<U, U>(fx.w(fx.conc_e), 3), fx.w(fx.conc_e), "kill", false);
  check_cast_table(fx, throw_op<U, U>(fx.w(fx.callcc_e), 3, ContId{0}), fx.w(fx.callcc_e),
                   "throw", false);
}

TEST_CASE("choose re-checks its predicate on the supplied value") {
  Fixture fx;
  auto w = fx.w(fx.demonic_e);
  auto t = choose_op<U>(w, [](const U& v) { return v > 10; });
  // A handler bug feeding a violating value is absorbed, never surfaced.
  auto bad = t.cont()(embed_output(w, make_output<U>({}, "choose", U{3})));
  REQUIRE(bad.is_unreachable());
  auto good = t.cont()(embed_output(w, make_output<U>({}, "choose", U{11})));
  REQUIRE(good.is_pure());
  REQUIRE(good.value() == 11);
}

TEST_CASE("feeding the set output to get's continuation is unreachable") {
  Fixture fx;
  auto w = fx.w(fx.state_e);
  auto t = get_op<U>(w);
  REQUIRE(t.cont()(embed_output(w, make_output<U>({}, "set"))).is_unreachable());
}

TEST_CASE("bind after fail never invokes its function") {
  Fixture fx;
  bool called = false;
  auto t = fail_op<U, U>(fx.w(fx.fail_e)).bind([&called](const U& x) {
    called = true;
    return T::pure(x);
  });
  // Exhaustive exploration of the one-node tree: the only outcome is the
  // failure terminal.
  auto handler = sum_explore_handler<U, U>(
      fail_explore_handler<U, U>(),
      sum_explore_handler<U, U>(
          state_explore_handler<U, U>(),
          sum_explore_handler<U, U>(
              demonic_explore_handler<U, U>({0, 1}),
              sum_explore_handler<U, U>(
                  rec_explore_handler<U, U>(),
                  sum_explore_handler<U, U>(callcc_explore_handler<U, U>(),
                                            conc_explore_handler<U, U>())))));
  auto res = explore(t, initial_state<U, U>(0, t), handler, Bounds{});
  REQUIRE(res.outcomes.size() == 1);
  REQUIRE(res.outcomes[0].first.kind == OutcomeKind::failure);
  REQUIRE_FALSE(res.exhausted);
  REQUIRE_FALSE(called);
}

TEST_CASE("rec ties call back through the fixpoint identifier") {
  Fixture fx;
  auto w = fx.w(fx.rec_e);
  auto fn = rec_op<U>(w, [](std::function<T(U)> self, const U& n) {
    if (n <= 0) return T::pure(0);
    return self(n - 1);
  });
  auto t = fn(2);
  REQUIRE(t.is_impure());
  REQUIRE(t.input().op == "fix");
  const auto* payload = std::get_if<FixPayload<U>>(&t.input().payload);
  REQUIRE(payload != nullptr);
  REQUIRE(payload->arg == U{2});
  // The body applied to an identifier immediately calls back through it.
  auto body_tree = (*payload->body)(FixId{5}, 1);
  REQUIRE(body_tree.is_impure());
  REQUIRE(body_tree.input().op == "call");
  const auto* call = std::get_if<CallPayload<U>>(&body_tree.input().payload);
  REQUIRE(call != nullptr);
  REQUIRE(call->fn == FixId{5});
  REQUIRE(call->arg == U{0});
}
