// Built-in programs with their expected behavior, used by the regression
// command and the integration suites.
//
// The first four exercise the interesting control-flow interactions: `awk`
// is the higher-order-state litmus function whose assertion holds under
// well-bracketed control flow, `c_callcc` and `c_conc` break the bracketing
// with a captured continuation resp. a racing schedule, and `race` is the
// two-thread lost-update counter. The rest are small single-effect
// programs.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hitree/eval.hpp"

namespace hitree::lang {

struct CorpusEntry {
  std::string name;
  std::string source;
  OutcomeKind eval_kind = OutcomeKind::value;
  std::optional<std::int64_t> eval_int{};  // expected integer result, when integral
  std::optional<std::vector<std::int64_t>> explore_int_set{};  // complete value set
  std::optional<bool> explore_any_failure{};  // is a failing execution reachable
};

inline const std::string& awk_source() {
  static const std::string src =
      "let x := ref #0 in λ f, (x ← #0; f #(); x ← #1; f #(); assert (!x = #1))";
  return src;
}

inline const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = [] {
    std::vector<CorpusEntry> c;
    c.push_back({"awk", awk_source(), OutcomeKind::value, {}, {}, {}});
    c.push_back({"c_callcc",
                 "let g := (" + awk_source() +
                     ") in\n"
                     "let b := ref #0 in\n"
                     "let f := (λ _, if !b then call/cc (λ k, g (λ _, throw #() to k)) "
                     "else b ← #1) in\n"
                     "g f",
                 OutcomeKind::failure,
                 {},
                 {},
                 true});
    c.push_back({"c_conc",
                 "let g := (" + awk_source() + ") in let f := λ _, #() in g f || g f",
                 OutcomeKind::value,
                 {},
                 {},
                 true});
    c.push_back({"race",
                 "let x := ref #0 in (x ← !x + #1 || x ← !x + #1); !x",
                 OutcomeKind::value,
                 1,
                 std::vector<std::int64_t>{1, 2},
                 false});
    c.push_back({"unit_state", "let x := ref #5 in (x ← !x + #1; !x)", OutcomeKind::value, 6,
                 std::vector<std::int64_t>{6}, false});
    c.push_back({"unit_fail", "#1 + (λ y, y)", OutcomeKind::failure, {}, {}, true});
    c.push_back({"unit_demonic", "(ref #1) = (ref #1)", OutcomeKind::value, 0,
                 std::vector<std::int64_t>{0}, false});
    c.push_back({"unit_rec", "(λ f, f (f #3)) (λ y, y + #1)", OutcomeKind::value, 5,
                 std::vector<std::int64_t>{5}, false});
    c.push_back({"unit_callcc", "call/cc (λ k, (throw #7 to k) + #100)", OutcomeKind::value, 7,
                 std::vector<std::int64_t>{7}, false});
    c.push_back({"unit_conc", "let p := #1 || #2 in p.1 + p.2", OutcomeKind::value, 3,
                 std::vector<std::int64_t>{3}, false});
    c.push_back({"unit_faa", "let x := ref #5 in FAA(x) + !x", OutcomeKind::value, 11,
                 std::vector<std::int64_t>{11}, false});
    c.push_back({"unit_if", "if #1 = #1 then #42 else #0", OutcomeKind::value, 42,
                 std::vector<std::int64_t>{42}, false});
    return c;
  }();
  return entries;
}

inline const CorpusEntry* find_corpus(const std::string& name) {
  for (const CorpusEntry& e : corpus())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace hitree::lang
