// Effect signatures, sum composition, subeffect witnesses, and recursive
// (fixpoint) effects.
//
// A signature is a runtime descriptor of an effect: a list of operations,
// each with input payload kinds and one output payload kind. Signatures
// compose by binary sum; values of a composed effect carry a spine path
// (left/right per sum, closed per fixpoint unfolding) identifying the leaf
// they belong to. Subeffect witnesses are therefore pure path transforms:
// injecting an input prepends a prefix, projecting an output strips it.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hitree {

// ---------------------------------------------------------------------------
// Spine paths

enum class PathStep : std::uint8_t {
  left,    // left summand
  right,   // right summand
  closed,  // through one unfolding of a recursive effect (inputs only)
};

using Path = std::vector<PathStep>;

inline std::string to_string(const Path& p) {
  std::string s;
  for (PathStep st : p) {
    if (!s.empty()) s += '.';
    s += st == PathStep::left ? "L" : st == PathStep::right ? "R" : "C";
  }
  return s.empty() ? std::string("@") : s;
}

inline bool starts_with(const Path& p, const Path& prefix) {
  if (prefix.size() > p.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (p[i] != prefix[i]) return false;
  return true;
}

inline Path concat(Path prefix, const Path& rest) {
  prefix.insert(prefix.end(), rest.begin(), rest.end());
  return prefix;
}

// ---------------------------------------------------------------------------
// Opaque identifiers handed out by handlers (defunctionalized computations).

struct FixId {
  std::uint64_t id = 0;
  friend bool operator==(FixId, FixId) = default;
};

struct ContId {
  std::uint64_t id = 0;
  friend bool operator==(ContId, ContId) = default;
};

// ---------------------------------------------------------------------------
// Signature descriptors

class Sig;
using SigPtr = std::shared_ptr<const Sig>;

// Payload kind of one operation parameter or of its output. Higher-order
// kinds (tree, fix_body, cont_body) may reference the signature the embedded
// computations run over; that reference is what the fixpoint constructor
// inspects and substitutes.
enum class PayloadKind : std::uint8_t {
  unit,        // no data
  empty,       // uninhabited; no value of this kind exists
  value,       // one universe value
  value_pair,  // a pair of universe values (outputs only)
  predicate,   // executable boolean predicate over the universe
  id,          // a FixId / ContId
  tree,        // an embedded computation with uninhabited result
  fix_body,    // (FixId, value) -> computation
  cont_body,   // ContId -> computation with uninhabited result
};

struct PayloadSpec {
  PayloadKind kind = PayloadKind::unit;
  SigPtr over{};  // for higher-order kinds: signature of the embedded trees
};

struct OpSpec {
  std::string tag;
  std::vector<PayloadSpec> inputs;  // empty list = unit input
  PayloadSpec output;
};

struct WitnessNotFound : std::runtime_error {
  explicit WitnessNotFound(const std::string& what) : std::runtime_error(what) {}
};
struct WitnessAmbiguous : std::runtime_error {
  explicit WitnessAmbiguous(const std::string& what) : std::runtime_error(what) {}
};
struct RecursiveOutputError : std::runtime_error {
  explicit RecursiveOutputError(const std::string& what) : std::runtime_error(what) {}
};

/// An effect signature: a leaf (named operation list), a binary sum, or a
/// fixed (recursive) effect holding its one-step unfolding. Signatures are
/// immutable shared descriptors; identity (pointer equality) is the equality
/// used by witness resolution.
class Sig {
 public:
  enum class Kind { leaf, sum, fixed };

  static SigPtr leaf(std::string name, std::vector<OpSpec> ops) {
    auto s = std::shared_ptr<Sig>(new Sig(Kind::leaf));
    s->name_ = std::move(name);
    s->ops_ = std::move(ops);
    return s;
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<OpSpec>& ops() const { return ops_; }

  // sum accessors; valid only for kind() == sum
  const SigPtr& left() const { return left_; }
  const SigPtr& right() const { return right_; }

  // fixed accessors; valid only for kind() == fixed
  const SigPtr& unfolding() const { return unfolding_; }

  bool is_recursive_marker() const { return marker_; }

 private:
  explicit Sig(Kind k) : kind_(k) {}

  Kind kind_;
  std::string name_;
  std::vector<OpSpec> ops_;  // leaf only
  SigPtr left_, right_;      // sum only
  SigPtr unfolding_;         // fixed only
  bool marker_ = false;

  friend SigPtr sum(SigPtr, SigPtr);
  friend struct FixBuilder;
};

/// Disjoint union of two signatures. Chains associate to the right by
/// convention: sum(a, sum(b, c)).
inline SigPtr sum(SigPtr e1, SigPtr e2) {
  auto s = std::shared_ptr<Sig>(new Sig(Sig::Kind::sum));
  s->left_ = std::move(e1);
  s->right_ = std::move(e2);
  return s;
}

// ---------------------------------------------------------------------------
// Subeffect witnesses

/// Embeds a small effect into a composed stack: inputs are injected by
/// prepending the input prefix, outputs of the stack are projected by
/// stripping the output prefix (failing with nullopt for outputs that
/// belong to a different spine position). The output prefix is the input
/// prefix without `closed` steps: fixpoint unfolding leaves output domains
/// untouched.
class SubeffectWitness {
 public:
  SubeffectWitness() = default;
  SubeffectWitness(Path input_prefix, Path output_prefix)
      : in_(std::move(input_prefix)), out_(std::move(output_prefix)) {}

  const Path& input_prefix() const { return in_; }
  const Path& output_prefix() const { return out_; }

  Path inject_input_path(const Path& small) const { return concat(in_, small); }

  std::optional<Path> project_output_path(const Path& big) const {
    if (!starts_with(big, out_)) return std::nullopt;
    return Path(big.begin() + static_cast<std::ptrdiff_t>(out_.size()), big.end());
  }

  /// The matching injection on outputs (partial inverse of projection).
  Path embed_output_path(const Path& small) const { return concat(out_, small); }

  friend bool operator==(const SubeffectWitness&, const SubeffectWitness&) = default;

 private:
  Path in_, out_;
};

/// Identity witness: E embedded in E itself.
inline SubeffectWitness witness_refl(const SigPtr& = nullptr) { return {}; }

/// Lift a witness for E1 -< E2 to E1 -< E2 (+) E'.
inline SubeffectWitness witness_left(const SubeffectWitness& w) {
  return {concat({PathStep::left}, w.input_prefix()),
          concat({PathStep::left}, w.output_prefix())};
}

/// Lift a witness for E1 -< E2 to E1 -< E' (+) E2.
inline SubeffectWitness witness_right(const SubeffectWitness& w) {
  return {concat({PathStep::right}, w.input_prefix()),
          concat({PathStep::right}, w.output_prefix())};
}

/// Lift a witness through one fixpoint unfolding: inputs additionally pass
/// through the closed wrapper, output domains are equal so outputs are
/// untouched.
inline SubeffectWitness witness_through_unfold(const SubeffectWitness& w) {
  return {concat({PathStep::closed}, w.input_prefix()), w.output_prefix()};
}

namespace detail {

inline void collect_witnesses(const SigPtr& target, const SigPtr& node, bool unfolded,
                              const SubeffectWitness& here,
                              std::vector<SubeffectWitness>& acc) {
  if (node == target) {
    acc.push_back(here);
    return;
  }
  switch (node->kind()) {
    case Sig::Kind::leaf:
      return;
    case Sig::Kind::sum:
      collect_witnesses(target, node->left(), unfolded,
                        SubeffectWitness(concat(here.input_prefix(), {PathStep::left}),
                                         concat(here.output_prefix(), {PathStep::left})),
                        acc);
      collect_witnesses(target, node->right(), unfolded,
                        SubeffectWitness(concat(here.input_prefix(), {PathStep::right}),
                                         concat(here.output_prefix(), {PathStep::right})),
                        acc);
      return;
    case Sig::Kind::fixed:
      // One unfolding level per resolve step; nested recursive effects are
      // resolved by chaining.
      if (unfolded) return;
      collect_witnesses(target, node->unfolding(), true,
                        SubeffectWitness(concat(here.input_prefix(), {PathStep::closed}),
                                         here.output_prefix()),
                        acc);
      return;
  }
}

}  // namespace detail

/// Searches the stack's sum spine (through at most one fixpoint unfolding)
/// for the target signature and returns the composed witness. Search order
/// is reflexivity, then left, then right, then unfold-then-search. The
/// target occurring at more than one spine position is an error rather than
/// a silent first match.
inline SubeffectWitness resolve_witness(const SigPtr& target, const SigPtr& stack) {
  std::vector<SubeffectWitness> matches;
  detail::collect_witnesses(target, stack, false, {}, matches);
  if (matches.empty())
    throw WitnessNotFound("effect '" + target->name() + "' is not a leaf of the stack");
  if (matches.size() > 1)
    throw WitnessAmbiguous("effect '" + target->name() + "' occurs at " +
                           std::to_string(matches.size()) + " spine positions");
  return matches.front();
}

// ---------------------------------------------------------------------------
// Recursive (fixpoint) effects

/// Isomorphism between a fixed effect's inputs and the inputs of its
/// one-step unfolding. fold wraps an unfolded input into the fixed effect's
/// single closed constructor; unfold unwraps it. Output domains of the two
/// signatures are identical, so outputs need no transport.
class UnfoldWitness {
 public:
  UnfoldWitness() = default;
  UnfoldWitness(SigPtr fixed, SigPtr unfolding)
      : fixed_(std::move(fixed)), unfolding_(std::move(unfolding)) {}

  const SigPtr& fixed() const { return fixed_; }
  const SigPtr& unfolding() const { return unfolding_; }

  Path fold_path(const Path& unfolded_input) const {
    return concat({PathStep::closed}, unfolded_input);
  }

  Path unfold_path(const Path& fixed_input) const {
    if (fixed_input.empty() || fixed_input.front() != PathStep::closed)
      throw std::logic_error("unfold applied to a non-fixed-effect input path");
    return Path(fixed_input.begin() + 1, fixed_input.end());
  }

 private:
  SigPtr fixed_, unfolding_;
};

struct FixResult {
  SigPtr fixed;
  UnfoldWitness unfold;
};

struct FixBuilder {
  static SigPtr make_marker(const std::string& name) {
    auto s = std::shared_ptr<Sig>(new Sig(Sig::Kind::leaf));
    s->name_ = name;
    s->marker_ = true;
    return s;
  }

  static SigPtr make_fixed(std::string name, SigPtr unfolding) {
    auto s = std::shared_ptr<Sig>(new Sig(Sig::Kind::fixed));
    s->name_ = std::move(name);
    s->unfolding_ = std::move(unfolding);
    return s;
  }

  static SigPtr rebuild_leaf(const Sig& leaf, std::vector<OpSpec> ops) {
    auto s = std::shared_ptr<Sig>(new Sig(Sig::Kind::leaf));
    s->name_ = leaf.name();
    s->ops_ = std::move(ops);
    return s;
  }

  // Ties the knot: the unfolding references the fixed node, so the link is
  // set after substitution. The fixed node is not shared before this point.
  static void set_unfolding(const SigPtr& fixed, SigPtr unfolding) {
    const_cast<Sig&>(*fixed).unfolding_ = std::move(unfolding);
  }
};

namespace detail {

inline bool mentions(const SigPtr& sig, const SigPtr& marker) {
  if (!sig) return false;
  if (sig == marker) return true;
  switch (sig->kind()) {
    case Sig::Kind::leaf:
      for (const OpSpec& op : sig->ops()) {
        for (const PayloadSpec& p : op.inputs)
          if (mentions(p.over, marker)) return true;
        if (mentions(op.output.over, marker)) return true;
      }
      return false;
    case Sig::Kind::sum:
      return mentions(sig->left(), marker) || mentions(sig->right(), marker);
    case Sig::Kind::fixed:
      return mentions(sig->unfolding(), marker);
  }
  return false;
}

/// Replaces the recursive marker with the fixed signature. Subtrees that do
/// not mention the marker are shared unchanged, preserving leaf identity for
/// witness resolution.
inline SigPtr substitute(const SigPtr& sig, const SigPtr& marker, const SigPtr& fixed) {
  if (sig == marker) return fixed;
  if (!mentions(sig, marker)) return sig;
  switch (sig->kind()) {
    case Sig::Kind::leaf: {
      std::vector<OpSpec> ops = sig->ops();
      for (OpSpec& op : ops) {
        for (PayloadSpec& p : op.inputs) p.over = substitute(p.over, marker, fixed);
        op.output.over = substitute(op.output.over, marker, fixed);
      }
      return FixBuilder::rebuild_leaf(*sig, std::move(ops));
    }
    case Sig::Kind::sum:
      return sum(substitute(sig->left(), marker, fixed),
                 substitute(sig->right(), marker, fixed));
    case Sig::Kind::fixed:
      throw std::logic_error("nested recursive effect mentions an outer recursive position");
  }
  throw std::logic_error("unreachable signature kind");
}

}  // namespace detail

/// Ties the recursive knot of an effect whose operations embed computations
/// over the effect itself. The body receives a placeholder for the recursive
/// position and returns the one-step unfolding. Output domains must not
/// mention the recursive position: outputs are what handlers feed back into
/// continuations and a recursive occurrence there has no finite
/// representation.
inline FixResult fix_effect(const std::string& name,
                            const std::function<SigPtr(SigPtr)>& body) {
  SigPtr marker = FixBuilder::make_marker(name);
  SigPtr proto = body(marker);
  if (proto == marker)
    throw std::invalid_argument("fix_effect: the body must be a productive unfolding");

  // Reject recursive occurrences in any output payload.
  struct Walk {
    const SigPtr& marker;
    void operator()(const SigPtr& s) const {
      switch (s->kind()) {
        case Sig::Kind::leaf:
          for (const OpSpec& op : s->ops())
            if (detail::mentions(op.output.over, marker))
              throw RecursiveOutputError("output of operation '" + op.tag +
                                         "' mentions the recursive effect");
          return;
        case Sig::Kind::sum:
          (*this)(s->left());
          (*this)(s->right());
          return;
        case Sig::Kind::fixed:
          (*this)(s->unfolding());
          return;
      }
    }
  };
  Walk{marker}(proto);

  SigPtr fixed = FixBuilder::make_fixed(name, nullptr);
  SigPtr unfolding = detail::substitute(proto, marker, fixed);
  FixBuilder::set_unfolding(fixed, unfolding);
  return {fixed, UnfoldWitness(fixed, unfolding)};
}

// ---------------------------------------------------------------------------
// Domain enumeration (used by tests and by output-domain sampling)

struct Variant {
  Path path;
  const OpSpec* op = nullptr;
  SigPtr leaf;
};

namespace detail {

inline void collect_variants(const SigPtr& sig, bool inputs, Path here,
                             std::vector<Variant>& acc) {
  switch (sig->kind()) {
    case Sig::Kind::leaf:
      for (const OpSpec& op : sig->ops()) acc.push_back({here, &op, sig});
      return;
    case Sig::Kind::sum:
      collect_variants(sig->left(), inputs, concat(here, {PathStep::left}), acc);
      collect_variants(sig->right(), inputs, concat(here, {PathStep::right}), acc);
      return;
    case Sig::Kind::fixed:
      // Inputs pass through the closed wrapper; output domains are equal.
      collect_variants(sig->unfolding(), inputs,
                       inputs ? concat(here, {PathStep::closed}) : here, acc);
      return;
  }
}

}  // namespace detail

inline std::vector<Variant> input_variants(const SigPtr& sig) {
  std::vector<Variant> acc;
  detail::collect_variants(sig, true, {}, acc);
  return acc;
}

inline std::vector<Variant> output_variants(const SigPtr& sig) {
  std::vector<Variant> acc;
  detail::collect_variants(sig, false, {}, acc);
  return acc;
}

/// Leaf signatures of a stack with their input-path positions.
inline std::vector<std::pair<Path, SigPtr>> leaves(const SigPtr& sig) {
  std::vector<std::pair<Path, SigPtr>> acc;
  std::vector<Variant> vars = input_variants(sig);
  for (const Variant& v : vars) {
    if (acc.empty() || acc.back().second != v.leaf) acc.emplace_back(v.path, v.leaf);
  }
  return acc;
}

inline SigPtr find_leaf(const SigPtr& stack, const std::string& name) {
  for (const auto& [path, leaf] : leaves(stack))
    if (leaf->name() == name) return leaf;
  return nullptr;
}

}  // namespace hitree
