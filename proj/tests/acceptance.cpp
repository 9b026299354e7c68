// Integration criteria. Each check prints one pass/fail line; the binary
// exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "hitree/cli.hpp"
#include "hitree/lang/corpus.hpp"
#include "hitree/lang/denote.hpp"
#include "hitree/lang/parse.hpp"

#include "support.hpp"

using namespace hitree;

namespace {

int failures = 0;

void report(int n, const std::string& what, bool ok, double seconds) {
  std::printf("[%s] criterion %d: %s (%.2fs)\n", ok ? "PASS" : "FAIL", n, what.c_str(), seconds);
  if (!ok) ++failures;
}

template <class F>
void criterion(int n, const std::string& what, double budget_seconds, F f) {
  auto start = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = f();
  } catch (const std::exception& e) {
    std::printf("  exception: %s\n", e.what());
    ok = false;
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(n, what, ok && elapsed < budget_seconds, elapsed);
}

}  // namespace

int main() {
  using lang::Value;

  // 1. The call/cc context violates the assertion under plain evaluation.
  criterion(1, "c_callcc evaluates to failure within default fuel", 1.0, [] {
    Outcome<Value> o = lang::run_eval(lang::parse(lang::find_corpus("c_callcc")->source));
    return o.kind == OutcomeKind::failure;
  });

  // 2. The concurrent context succeeds under round-robin but a failing
  //    schedule exists.
  criterion(2, "c_conc succeeds under eval; exploration finds a failing schedule", 30.0, [] {
    const std::string& src = lang::find_corpus("c_conc")->source;
    Outcome<Value> o = lang::run_eval(lang::parse(src));
    if (o.kind != OutcomeKind::value) return false;
    ExploreResult<Value> res = lang::run_explore(lang::parse(src), Bounds{}, {});
    if (res.exhausted) return false;
    return exists_outcome(res, [](const Outcome<Value>& x) { return x.is_failure(); })
        .has_value();
  });

  // 3. The racing counter reaches exactly the lost and sequential updates.
  criterion(3, "race explores to exactly {1, 2}", 5.0, [] {
    ExploreResult<Value> res =
        lang::run_explore(lang::parse(lang::find_corpus("race")->source), Bounds{}, {});
    if (res.exhausted) return false;
    std::set<std::int64_t> values;
    for (const auto& [o, t] : res.outcomes) {
      if (!o.is_value()) return false;
      const std::int64_t* z = o.result->as_int();
      if (!z) return false;
      values.insert(*z);
    }
    return values == std::set<std::int64_t>{1, 2};
  });

  // 4. Monad laws on randomized finite trees, extensionally.
  criterion(4, "monad laws hold on 10,000 randomized trees", 60.0, [] {
    support::TreeGen gen(0xACCE97);
    using support::T;
    using support::U;
    for (int i = 0; i < 10000; ++i) {
      T t = gen.gen_tree(6);
      auto f = gen.gen_fn(3);
      auto g = gen.gen_fn(2);
      U r = gen.sample();
      if (!extensional_eq(T::pure(r).bind(f), f(r), gen.domain)) return false;
      if (!extensional_eq(t.bind([](const U& x) { return T::pure(x); }), t, gen.domain))
        return false;
      if (!extensional_eq(t.bind(f).bind(g),
                          t.bind([&](const U& x) { return f(x).bind(g); }), gen.domain))
        return false;
    }
    return true;
  });

  // 5. Witness round-trips over the full language stack, exhaustively.
  criterion(5, "subeffect projections round-trip and reject cross-positions", 5.0, [] {
    const auto& S = lang::LangStack::get();
    auto ls = leaves(S.stack);
    if (ls.size() != 6) return false;
    std::vector<lang::LangU> samples{lang::LangU(Value::integer(0)),
                                     lang::LangU(Value::integer(1))};
    for (const auto& [path, leaf] : ls) {
      auto w = resolve_witness(leaf, S.stack);
      for (const auto& [opath, other] : ls) {
        auto ow = resolve_witness(other, S.stack);
        for (const Output<lang::LangU>& o : enumerate_outputs<lang::LangU>(other, samples)) {
          auto projected = project_output(w, embed_output(ow, o));
          if (leaf == other) {
            if (!projected || !(*projected == o)) return false;
          } else if (projected) {
            return false;
          }
        }
      }
    }
    return true;
  });

  // 6. The fold/unfold pair on the recursive effect is an isomorphism.
  criterion(6, "unfold witness is an isomorphism on 1,000 randomized inputs", 5.0, [] {
    const auto& S = lang::LangStack::get();
    std::mt19937_64 rng(6);
    auto pre_vars = input_variants(S.unfold.unfolding());
    for (int i = 0; i < 1000; ++i) {
      const Variant& v = pre_vars[rng() % pre_vars.size()];
      Input<lang::LangU> unfolded = make_input<lang::LangU>(
          v.path, v.op->tag, lang::LangU(Value::integer(static_cast<std::int64_t>(rng() % 50))));
      if (!(unfold_input(S.unfold, fold_input(S.unfold, unfolded)) == unfolded)) return false;
      Input<lang::LangU> fixed = make_input<lang::LangU>(
          concat({PathStep::closed}, v.path), v.op->tag,
          lang::LangU(Value::integer(static_cast<std::int64_t>(rng() % 50))));
      if (!(fold_input(S.unfold, unfold_input(S.unfold, fixed)) == fixed)) return false;
    }
    return true;
  });

  // 7. Restricting exploration to the evaluator's schedule and chooser
  //    reproduces the evaluator exactly, on every corpus program.
  criterion(7, "restricted exploration equals eval on the whole corpus", 30.0, [] {
    for (const lang::CorpusEntry& entry : lang::corpus()) {
      lang::ExprPtr e = lang::parse(entry.source);
      Outcome<Value> eo = lang::run_eval(e);
      lang::VTree t = lang::denote(e);
      ExploreResult<Value> res =
          explore(t, lang::fresh_state(t),
                  lang::explore_handler(lang::ExploreOptions{.restrict_to_eval = true}),
                  Bounds{});
      if (res.outcomes.size() != 1) return false;
      if (!(res.outcomes[0].first == eo)) return false;
    }
    return true;
  });

  // 8. Recursion: factorial, divergence under every fuel bound, and invalid
  //    fixpoint identifiers in both interpreters.
  criterion(8, "recursion, fuel exhaustion, and invalid fixpoint ids", 5.0, [] {
    using U = std::int64_t;
    using T = Tree<U, U>;
    auto rec_e = rec_sig(nullptr);
    auto stack = sum(rec_e, fail_sig());
    auto wr = resolve_witness(rec_e, stack);
    auto handler = sum_eval_handler<U, U>(rec_eval_handler<U, U>(), fail_eval_handler<U, U>());

    std::int64_t oracle = 1;
    for (int k = 1; k <= 4; ++k) oracle *= k;  // derived factorial oracle
    auto fact = rec_op<U>(wr, [](std::function<T(U)> self, const U& n) -> T {
      if (n == 0) return T::pure(1);
      return self(n - 1).map([n](const U& r) { return n * r; });
    });
    auto t = fact(4);
    if (!(eval(t, handler, initial_state<U, U>(0, t, 100000)).first ==
          Outcome<U>::value_of(oracle)))
      return false;

    auto loop = rec_op<U>(wr, [](std::function<T(U)> self, const U& n) { return self(n); })(0);
    for (std::uint64_t fuel : {10u, 100u, 1000u}) {
      if (eval(loop, handler, initial_state<U, U>(0, loop, fuel)).first.kind !=
          OutcomeKind::fuel_exhausted)
        return false;
    }

    auto bad = call_op<U>(wr, FixId{5}, 0);
    Outcome<U> o = eval(bad, handler, initial_state<U, U>(0, bad, 100)).first;
    if (o.kind != OutcomeKind::error || o.what != ErrorKind::invalid_fixpoint_id) return false;

    auto xhandler =
        sum_explore_handler<U, U>(rec_explore_handler<U, U>(), fail_explore_handler<U, U>());
    ExploreStep<U, U> step = xhandler(bad.input(), initial_state<U, U>(0, bad), bad.cont());
    const auto* branches = std::get_if<std::vector<ExploreBranch<U, U>>>(&step.v);
    return branches != nullptr && branches->empty();
  });

  // 9. Witness traces from criteria 2 and 3 replay to identical outcomes
  //    through the replay interface.
  criterion(9, "emitted witness traces replay to identical outcomes", 30.0, [] {
    for (const char* name : {"c_conc", "race"}) {
      cli::ExploreConfig cfg;
      cfg.query = std::string(name) == "c_conc" ? cli::Query::any_failure : cli::Query::value_set;
      cfg.json = true;
      std::ostringstream doc;
      if (cli::cmd_explore(name, cfg, doc) != 0) return false;
      std::string path = std::string("acceptance_trace_") + name + ".json";
      std::ofstream(path) << doc.str();
      cli::ExploreConfig replay_cfg;
      replay_cfg.replay_file = path;
      std::ostringstream out;
      int rc = cli::cmd_explore("", replay_cfg, out);
      std::remove(path.c_str());
      if (rc != 0) return false;
    }
    return true;
  });

  std::printf("%s\n", failures == 0 ? "all criteria passed" : "CRITERIA FAILED");
  return failures == 0 ? 0 : 1;
}
