// The computation tree and its monadic operations.
//
// Tree<U, R> is an inductive free-monad computation over an effect stack
// whose payload universe is U, producing a result of type R. A tree is
// either pure(r), impure(input, continuation), or unreachable — the
// denotation of a branch that cannot occur in any valid execution.
//
// Trees are immutable values backed by a shared node; copies are cheap and
// trees are safe to share between host threads. Continuations are total
// over the full output domain of the ambient stack: every dynamic cast
// inside a continuation maps foreign outputs to unreachable, never to a
// crash.

#pragma once

#include <cassert>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "hitree/effect.hpp"

namespace hitree {

/// Uninhabited result type: trees of this result type cannot terminate with
/// a value. Used for computations that only end via control effects.
struct Never {
  Never() = delete;
  Never(const Never&) = default;
  friend bool operator==(const Never&, const Never&) { return true; }
};

template <class U, class R>
class Tree;

// ---------------------------------------------------------------------------
// Effect values
//
// An input or output value carries the spine path of the leaf effect it
// belongs to, the operation tag, and a payload. Function-valued payloads are
// held behind shared pointers so payload equality (identity on closures,
// structural elsewhere) is well defined.

template <class U>
using PredFn = std::function<bool(const U&)>;
template <class U>
using SharedPred = std::shared_ptr<const PredFn<U>>;

template <class U>
using FixBodyFn = std::function<Tree<U, U>(FixId, const U&)>;
template <class U>
using SharedFixBody = std::shared_ptr<const FixBodyFn<U>>;

template <class U>
using ContBodyFn = std::function<Tree<U, Never>(ContId)>;
template <class U>
using SharedContBody = std::shared_ptr<const ContBodyFn<U>>;

template <class U>
SharedPred<U> share_pred(PredFn<U> p) {
  return std::make_shared<const PredFn<U>>(std::move(p));
}
template <class U>
SharedFixBody<U> share_fix_body(FixBodyFn<U> f) {
  return std::make_shared<const FixBodyFn<U>>(std::move(f));
}
template <class U>
SharedContBody<U> share_cont_body(ContBodyFn<U> f) {
  return std::make_shared<const ContBodyFn<U>>(std::move(f));
}

template <class U>
struct FixPayload {
  SharedFixBody<U> body;
  U arg;
  friend bool operator==(const FixPayload& a, const FixPayload& b) {
    return a.body == b.body && a.arg == b.arg;
  }
};

template <class U>
struct CallPayload {
  FixId fn;
  U arg;
  friend bool operator==(const CallPayload&, const CallPayload&) = default;
};

template <class U>
struct ThrowPayload {
  U value;
  ContId target;
  friend bool operator==(const ThrowPayload&, const ThrowPayload&) = default;
};

template <class U>
struct ParPayload {
  Tree<U, Never> left;
  Tree<U, Never> right;
  friend bool operator==(const ParPayload& a, const ParPayload& b) {
    return a.left.identical(b.left) && a.right.identical(b.right);
  }
};

template <class U>
using InPayload = std::variant<std::monostate, U, SharedPred<U>, FixPayload<U>,
                               CallPayload<U>, SharedContBody<U>, ThrowPayload<U>,
                               ParPayload<U>>;

template <class U>
using OutPayload = std::variant<std::monostate, U, std::pair<U, U>>;

template <class U>
struct Input {
  Path path;
  std::string op;
  InPayload<U> payload;
  friend bool operator==(const Input&, const Input&) = default;
};

template <class U>
struct Output {
  Path path;
  std::string op;
  OutPayload<U> payload;
  friend bool operator==(const Output&, const Output&) = default;
};

template <class U>
Input<U> make_input(Path path, std::string op, InPayload<U> payload = std::monostate{}) {
  return Input<U>{std::move(path), std::move(op), std::move(payload)};
}

template <class U>
Output<U> make_output(Path path, std::string op, OutPayload<U> payload = std::monostate{}) {
  return Output<U>{std::move(path), std::move(op), std::move(payload)};
}

// ---------------------------------------------------------------------------
// The tree

namespace detail {
template <class U, class R>
struct TreeNode;
}

template <class U, class R>
class Tree {
 public:
  using Universe = U;
  using Result = R;
  using Cont = std::function<Tree(const Output<U>&)>;

  static Tree pure(R r);
  static Tree impure(Input<U> input, Cont k);
  static Tree unreachable();

  bool is_pure() const;
  bool is_impure() const;
  bool is_unreachable() const;

  const R& value() const;         // pre: is_pure()
  const Input<U>& input() const;  // pre: is_impure()
  const Cont& cont() const;       // pre: is_impure()

  /// Monadic sequencing: pure(r) continues with f(r), unreachable absorbs,
  /// and an impure node defers the bind into its continuation.
  template <class F>
  auto bind(F f) const -> std::invoke_result_t<F, const R&>;

  template <class G>
  auto map(G g) const -> Tree<U, std::invoke_result_t<G, const R&>>;

  /// Node identity: the only decidable equality on trees with continuations.
  bool identical(const Tree& other) const { return node_ == other.node_; }
  const void* node_id() const { return node_.get(); }

 private:
  explicit Tree(std::shared_ptr<const detail::TreeNode<U, R>> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::TreeNode<U, R>> node_;
};

namespace detail {

template <class U, class R>
struct TreeNode {
  struct Unreachable {};
  struct Pure {
    R value;
  };
  struct Impure {
    Input<U> input;
    typename Tree<U, R>::Cont k;
  };
  std::variant<Unreachable, Pure, Impure> v;
};

}  // namespace detail

template <class U, class R>
Tree<U, R> Tree<U, R>::pure(R r) {
  using Node = detail::TreeNode<U, R>;
  return Tree(std::make_shared<const Node>(
      Node{typename Node::Pure{std::move(r)}}));
}

template <class U, class R>
Tree<U, R> Tree<U, R>::impure(Input<U> input, Cont k) {
  using Node = detail::TreeNode<U, R>;
  return Tree(std::make_shared<const Node>(
      Node{typename Node::Impure{std::move(input), std::move(k)}}));
}

template <class U, class R>
Tree<U, R> Tree<U, R>::unreachable() {
  using Node = detail::TreeNode<U, R>;
  return Tree(std::make_shared<const Node>(Node{typename Node::Unreachable{}}));
}

template <class U, class R>
bool Tree<U, R>::is_pure() const {
  return std::holds_alternative<typename detail::TreeNode<U, R>::Pure>(node_->v);
}
template <class U, class R>
bool Tree<U, R>::is_impure() const {
  return std::holds_alternative<typename detail::TreeNode<U, R>::Impure>(node_->v);
}
template <class U, class R>
bool Tree<U, R>::is_unreachable() const {
  return std::holds_alternative<typename detail::TreeNode<U, R>::Unreachable>(node_->v);
}

template <class U, class R>
const R& Tree<U, R>::value() const {
  return std::get<typename detail::TreeNode<U, R>::Pure>(node_->v).value;
}
template <class U, class R>
const Input<U>& Tree<U, R>::input() const {
  return std::get<typename detail::TreeNode<U, R>::Impure>(node_->v).input;
}
template <class U, class R>
const typename Tree<U, R>::Cont& Tree<U, R>::cont() const {
  return std::get<typename detail::TreeNode<U, R>::Impure>(node_->v).k;
}

// ---------------------------------------------------------------------------
// Monadic operations

template <class U, class R>
template <class F>
auto Tree<U, R>::bind(F f) const -> std::invoke_result_t<F, const R&> {
  using Out = std::invoke_result_t<F, const R&>;
  if (is_pure()) return f(value());
  if (is_unreachable()) return Out::unreachable();
  return Out::impure(input(), [k = cont(), f = std::move(f)](const Output<U>& o) {
    return k(o).bind(f);
  });
}

template <class U, class R>
template <class G>
auto Tree<U, R>::map(G g) const -> Tree<U, std::invoke_result_t<G, const R&>> {
  using B = std::invoke_result_t<G, const R&>;
  return bind([g = std::move(g)](const R& r) { return Tree<U, B>::pure(g(r)); });
}

/// Eliminator for impossible results; usable as the function argument of
/// bind over an uninhabited result type.
template <class U, class R>
struct NeverElim {
  Tree<U, R> operator()(const Never&) const { return Tree<U, R>::unreachable(); }
};

/// Coerces a tree that cannot produce a value into any result type.
template <class R2, class U>
Tree<U, R2> absurd(const Tree<U, Never>& t) {
  return t.bind(NeverElim<U, R2>{});
}

// ---------------------------------------------------------------------------
// Witness application and triggering

template <class U>
Input<U> inject_input(const SubeffectWitness& w, Input<U> i) {
  i.path = w.inject_input_path(i.path);
  return i;
}

template <class U>
std::optional<Output<U>> project_output(const SubeffectWitness& w, const Output<U>& o) {
  auto rest = w.project_output_path(o.path);
  if (!rest) return std::nullopt;
  return Output<U>{std::move(*rest), o.op, o.payload};
}

/// The matching injection on outputs; partial inverse of project_output.
template <class U>
Output<U> embed_output(const SubeffectWitness& w, Output<U> o) {
  o.path = w.embed_output_path(o.path);
  return o;
}

template <class U>
Input<U> fold_input(const UnfoldWitness& w, Input<U> i) {
  i.path = w.fold_path(i.path);
  return i;
}

template <class U>
Input<U> unfold_input(const UnfoldWitness& w, Input<U> i) {
  i.path = w.unfold_path(i.path);
  return i;
}

/// Invokes a small effect inside a composed stack: the input is injected,
/// and the continuation projects the stack's output back to the small
/// effect, discarding foreign outputs as unreachable. The result of the
/// returned tree is the small effect's output value.
template <class U>
Tree<U, Output<U>> trigger(const SubeffectWitness& w, Input<U> i) {
  return Tree<U, Output<U>>::impure(
      inject_input(w, std::move(i)), [w](const Output<U>& o) {
        auto small = project_output(w, o);
        if (!small) return Tree<U, Output<U>>::unreachable();
        return Tree<U, Output<U>>::pure(std::move(*small));
      });
}

// ---------------------------------------------------------------------------
// Extensional equality and output-domain enumeration
//
// Continuations are functions and lack decidable equality, so tree equality
// is structural on pure/unreachable nodes and extensional over an enumerated
// output domain on impure nodes. Feeding the full domain to both
// continuations also checks their totality.

template <class U, class R>
bool extensional_eq(const Tree<U, R>& a, const Tree<U, R>& b,
                    const std::vector<Output<U>>& domain) {
  if (a.identical(b)) return true;
  if (a.is_unreachable() || b.is_unreachable())
    return a.is_unreachable() && b.is_unreachable();
  if (a.is_pure() || b.is_pure()) {
    if (!(a.is_pure() && b.is_pure())) return false;
    if constexpr (std::equality_comparable<R>) {
      return a.value() == b.value();
    } else {
      return false;
    }
  }
  if (!(a.input() == b.input())) return false;
  for (const Output<U>& o : domain) {
    if (!extensional_eq(a.cont()(o), b.cont()(o), domain)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Universe traits
//
// A universe type must be copyable and equality comparable. Display and
// hashing have stream/std::hash defaults and can be overridden by
// specializing UniverseTraits.

template <class U>
struct UniverseTraits {
  static std::string display(const U& u) {
    if constexpr (requires(std::ostream& os, const U& v) { os << v; }) {
      std::ostringstream os;
      os << u;
      return os.str();
    } else {
      return "<value>";
    }
  }

  static std::size_t hash(const U& u) {
    if constexpr (requires(const U& v) { std::hash<U>{}(v); }) {
      return std::hash<U>{}(u);
    } else {
      return 0;
    }
  }
};

inline std::size_t hash_mix(std::size_t seed, std::size_t h) {
  return seed ^ (h + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
}

/// All output values of a stack, for a finite sample of the universe.
/// Payload kinds: unit contributes one value, empty contributes none, value
/// ranges over the samples, and value_pair over their square. Higher-order
/// output kinds have no enumerable values and are rejected.
template <class U>
std::vector<Output<U>> enumerate_outputs(const SigPtr& sig, const std::vector<U>& samples) {
  std::vector<Output<U>> acc;
  for (const Variant& v : output_variants(sig)) {
    switch (v.op->output.kind) {
      case PayloadKind::unit:
        acc.push_back(make_output<U>(v.path, v.op->tag));
        break;
      case PayloadKind::empty:
        break;  // uninhabited
      case PayloadKind::value:
        for (const U& s : samples) acc.push_back(make_output<U>(v.path, v.op->tag, s));
        break;
      case PayloadKind::value_pair:
        for (const U& s1 : samples)
          for (const U& s2 : samples)
            acc.push_back(make_output<U>(v.path, v.op->tag, std::pair<U, U>(s1, s2)));
        break;
      default:
        throw std::logic_error("output payload of operation '" + v.op->tag +
                               "' is not first-order");
    }
  }
  return acc;
}

}  // namespace hitree
