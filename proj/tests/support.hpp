// Shared generators for the property suites: random effect stacks with
// small enumerable output domains, random finite trees over them, and
// random table-backed functions. Continuations of generated trees are
// lookup tables over the enumerated output domain, so extensional equality
// terminates and is exact.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "hitree/effects_std.hpp"
#include "hitree/tree.hpp"

namespace support {

using U = std::int64_t;
using T = hitree::Tree<U, U>;

struct TreeGen {
  std::mt19937_64 rng;
  hitree::SigPtr stack;
  std::vector<U> samples;
  std::vector<hitree::Output<U>> domain;
  std::vector<hitree::Variant> inputs;

  explicit TreeGen(std::uint64_t seed) : rng(seed) {
    // Two leaves, three operations, output domains of one unit and two
    // value variants; four output variants total.
    auto a = hitree::Sig::leaf("A", {{"ping", {}, {hitree::PayloadKind::unit}},
                                     {"poll", {}, {hitree::PayloadKind::value}}});
    auto b = hitree::Sig::leaf(
        "B", {{"ask", {{hitree::PayloadKind::value}}, {hitree::PayloadKind::value}}});
    stack = hitree::sum(a, b);
    samples = {0, 1};
    domain = hitree::enumerate_outputs<U>(stack, samples);
    inputs = hitree::input_variants(stack);
  }

  U sample() { return samples[rng() % samples.size()]; }

  hitree::Input<U> gen_input() {
    const hitree::Variant& v = inputs[rng() % inputs.size()];
    hitree::InPayload<U> payload = std::monostate{};
    if (!v.op->inputs.empty() && v.op->inputs.front().kind == hitree::PayloadKind::value)
      payload = sample();
    return hitree::make_input<U>(v.path, v.op->tag, std::move(payload));
  }

  T gen_tree(int depth) {
    std::uint64_t roll = rng() % 100;
    if (depth <= 0 || roll < 55) return T::pure(sample());
    if (roll < 70) return T::unreachable();
    auto table = std::make_shared<std::vector<std::pair<hitree::Output<U>, T>>>();
    for (const hitree::Output<U>& o : domain) table->emplace_back(o, gen_tree(depth - 1));
    return T::impure(gen_input(), [table](const hitree::Output<U>& o) {
      for (const auto& [key, t] : *table)
        if (key == o) return t;
      return T::unreachable();
    });
  }

  // Table-backed U -> tree function; total over the samples, identity-pure
  // elsewhere.
  std::function<T(const U&)> gen_fn(int depth) {
    auto table = std::make_shared<std::vector<std::pair<U, T>>>();
    for (U s : samples) table->emplace_back(s, gen_tree(depth));
    return [table](const U& x) {
      for (const auto& [key, t] : *table)
        if (key == x) return t;
      return T::pure(x);
    };
  }
};

}  // namespace support
