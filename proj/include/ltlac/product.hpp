#pragma once

#include <vector>

#include "ltlac/model.hpp"
#include "ltlac/rabin.hpp"

namespace ltlac {

/// Which model state's observation drives the automaton on a product step.
///  - NextState: s' = delta(s, h(q')); the initial product state is
///    (q0, delta(s0, h(q0))) so the automaton reads h(q0) h(q1) ...
///  - CurrentState: s' = delta(s, h(q)); the initial product state is (q0, s0).
enum class LabelAlignment { NextState, CurrentState };

struct ProductState {
  StateId model_state;
  StateId automaton_state;

  bool operator==(const ProductState&) const = default;
};

struct ProductOptions {
  LabelAlignment alignment = LabelAlignment::NextState;
  /// Drop product states that are unreachable from the initial state.
  bool prune = true;
};

/// Synchronized product of a labeled model and a Rabin automaton.
struct ProductModel {
  /// The product itself; same mode, actions and propositions as the base model.
  LabeledModel model;
  /// Product state id -> (model state, automaton state).
  std::vector<ProductState> projection;
  /// Lifted accepting pairs: L_P(i) = Q x L(i), K_P(i) = Q x K(i).
  std::vector<RabinPair> pairs;
  /// |Q| * |S|, the size before pruning.
  std::size_t unpruned_states = 0;
  LabelAlignment alignment = LabelAlignment::NextState;
};

/// Maps model letters onto the automaton's proposition order. Every automaton
/// proposition must appear in the model; extra model propositions are ignored.
std::vector<Letter> translate_labels(const LabeledModel& m, const RabinAutomaton& r);

ProductModel build_product(const LabeledModel& m, const RabinAutomaton& r,
                           const ProductOptions& options = {});

/// Automaton successor for the product step (q, s) --u--> q'.
StateId product_successor(const RabinAutomaton& r, std::span<const Letter> letters,
                          LabelAlignment alignment, StateId q, StateId s, StateId q_next);

}  // namespace ltlac
