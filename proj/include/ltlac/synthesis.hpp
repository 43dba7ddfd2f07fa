#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltlac/model.hpp"
#include "ltlac/product.hpp"

namespace ltlac {

/// A set of states with, for each, a nonempty set of retained actions such
/// that the retained actions never leave the set and the states are strongly
/// connected through them.
struct EndComponent {
  std::vector<StateId> states;                 // ascending
  std::vector<std::vector<ActionId>> actions;  // parallel to `states`, enabled order

  bool operator==(const EndComponent&) const = default;
};

struct Amec : EndComponent {
  std::size_t pair = 0;  // index of the Rabin pair it accepts
};

/// All maximal end components, using only the possible-successor structure of
/// `m` (weights are ignored). `allowed` restricts the candidate states; empty
/// means all states. Components come back ordered by smallest state id.
std::vector<EndComponent> max_end_components(const LabeledModel& m,
                                             std::span<const char> allowed = {});

/// Accepting maximal end components: per pair i, MECs of the model with
/// L_P(i) removed that intersect K_P(i).
std::vector<Amec> amecs(const ProductModel& p);

struct GoalSets {
  std::vector<char> goal;  // S*: union of AMEC states
  std::vector<char> bad;   // states that cannot reach S* under any policy
};

GoalSets goal_and_bad_sets(const LabeledModel& m, std::span<const Amec> components);
/// S* given explicitly; S-bar* by backward reachability.
GoalSets goal_and_bad_sets(const LabeledModel& m, std::vector<char> goal);

/// Stochastic shortest path model obtained from a reachability problem.
/// State order: product states outside S* in ascending order, then the
/// terminal. States in S* collapse onto the terminal.
struct SspModel {
  LabeledModel model;
  StateId terminal = kNoState;
  /// Per SSP state: 1 if it belongs to S-bar* (cost 1 under every action).
  std::vector<char> bad;
  /// Product state -> SSP state (S* maps to the terminal).
  std::vector<StateId> from_product;
  /// SSP state -> product state (kNoState for the terminal).
  std::vector<StateId> to_product;

  StateId initial() const { return model.initial(); }
  double cost(StateId s, ActionId /*u*/) const { return bad[s] ? 1.0 : 0.0; }
};

/// MDP mode: mass into S* is summed onto the terminal. NTS mode: the terminal
/// flag is the max over S* successors. States in S-bar* restart at the
/// initial state with cost 1; the terminal is absorbing under every action.
SspModel mrp_to_ssp(const LabeledModel& product, const GoalSets& sets);

std::string serialize_ssp(const SspModel& ssp);
/// Reads a model file carrying `terminal q` and `cost q u g` lines.
SspModel parse_ssp(std::string_view text);

/// Uniform choice among retained actions inside the component; undefined
/// (empty distribution) elsewhere.
StationaryPolicy inside_amec_policy(const EndComponent& a, std::size_t num_states);

}  // namespace ltlac
