#include <catch_amalgamated.hpp>

#include "hitree/effects_std.hpp"
#include "hitree/tree.hpp"

#include "support.hpp"

using namespace hitree;
using support::T;
using support::U;

TEST_CASE("pure wraps a result") {
  auto t = T::pure(3);
  REQUIRE(t.is_pure());
  REQUIRE(t.value() == 3);
  REQUIRE(Tree<U, std::monostate>::pure({}).is_pure());
}

TEST_CASE("bind on pure applies the function") {
  auto t = T::pure(3).bind([](const U& x) { return T::pure(x + 1); });
  REQUIRE(t.is_pure());
  REQUIRE(t.value() == 4);
}

TEST_CASE("bind absorbs unreachable") {
  bool called = false;
  auto t = T::unreachable().bind([&called](const U& x) {
    called = true;
    return T::pure(x);
  });
  REQUIRE(t.is_unreachable());
  REQUIRE_FALSE(called);
}

TEST_CASE("bind on impure defers into the continuation") {
  support::TreeGen gen(7);
  Input<U> input = gen.gen_input();
  auto t = T::impure(input, [](const Output<U>&) { return T::pure(10); });
  auto u = t.bind([](const U& x) { return T::pure(x + 5); });
  REQUIRE(u.is_impure());
  REQUIRE(u.input() == input);
  auto after = u.cont()(gen.domain.front());
  REQUIRE(after.is_pure());
  REQUIRE(after.value() == 15);
}

TEST_CASE("map is bind with pure") {
  REQUIRE(T::pure(2).map([](const U& x) { return x * 2; }).value() == 4);
  REQUIRE(T::unreachable().map([](const U& x) { return x; }).is_unreachable());
}

TEST_CASE("map with the identity is extensionally the identity") {
  support::TreeGen gen(11);
  for (int i = 0; i < 200; ++i) {
    T t = gen.gen_tree(4);
    T mapped = t.map([](const U& x) { return x; });
    REQUIRE(extensional_eq(t, mapped, gen.domain));
  }
}

TEST_CASE("trigger with the reflexive witness") {
  auto sig = state_sig();
  auto w = witness_refl(sig);
  auto t = trigger<U>(w, make_input<U>({}, "get"));
  REQUIRE(t.is_impure());
  REQUIRE(t.input().path.empty());
  // Feeding any output o of the effect yields pure(o).
  for (const Output<U>& o : enumerate_outputs<U>(sig, {0, 1, 2})) {
    auto r = t.cont()(o);
    REQUIRE(r.is_pure());
    REQUIRE(r.value() == o);
  }
}

TEST_CASE("trigger through a left witness discards right-tagged outputs") {
  auto fail = fail_sig();
  auto state = state_sig();
  auto stack = sum(fail, state);
  auto w = resolve_witness(fail, stack);
  auto t = trigger<U>(w, make_input<U>({}, "fail"));
  REQUIRE(t.input().path == Path{PathStep::left});
  // All constructible outputs of the stack are right-tagged (the left
  // summand's output is uninhabited), and all map to unreachable.
  for (const Output<U>& o : enumerate_outputs<U>(stack, {0, 1})) {
    REQUIRE(o.path.front() == PathStep::right);
    REQUIRE(t.cont()(o).is_unreachable());
  }
}

TEST_CASE("trigger continuation accepts exactly the witness's own outputs") {
  // Enumerate all output variants of a two-operation effect inside a stack
  // and check the cast table of the continuation.
  auto a = Sig::leaf("A", {{"one", {}, {PayloadKind::value}}, {"two", {}, {PayloadKind::unit}}});
  auto b = Sig::leaf("B", {{"other", {}, {PayloadKind::value}}});
  auto stack = sum(b, a);
  auto w = resolve_witness(a, stack);
  for (const Variant& v : input_variants(a)) {
    auto t = trigger<U>(w, make_input<U>(v.path, v.op->tag));
    for (const Output<U>& small : enumerate_outputs<U>(a, {0, 1})) {
      auto r = t.cont()(embed_output(w, small));
      REQUIRE(r.is_pure());
      REQUIRE(r.value() == small);
    }
    for (const Output<U>& foreign : enumerate_outputs<U>(b, {0, 1})) {
      Output<U> big = foreign;
      big.path = concat({PathStep::left}, big.path);
      REQUIRE(t.cont()(big).is_unreachable());
    }
  }
}

TEST_CASE("monad laws hold extensionally on random finite trees") {
  support::TreeGen gen(2024);
  for (int i = 0; i < 1000; ++i) {
    T t = gen.gen_tree(5);
    auto f = gen.gen_fn(3);
    auto g = gen.gen_fn(2);
    U r = gen.sample();

    // left identity
    REQUIRE(extensional_eq(T::pure(r).bind(f), f(r), gen.domain));
    // right identity
    REQUIRE(extensional_eq(t.bind([](const U& x) { return T::pure(x); }), t, gen.domain));
    // associativity
    REQUIRE(extensional_eq(t.bind(f).bind(g),
                           t.bind([&f, &g](const U& x) { return f(x).bind(g); }), gen.domain));
  }
}

TEST_CASE("unreachable absorption holds for arbitrary functions") {
  support::TreeGen gen(99);
  for (int i = 0; i < 100; ++i) {
    auto f = gen.gen_fn(3);
    REQUIRE(T::unreachable().bind(f).is_unreachable());
  }
}
