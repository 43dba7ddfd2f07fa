#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ltlac {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
/// A set of observations encoded as a bitmask over the proposition list.
using Letter = std::uint32_t;

inline constexpr std::size_t kMaxPropositions = 16;
inline constexpr double kStochasticTolerance = 1e-9;
inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Structurally invalid model, automaton or policy.
class ModelError : public Error {
 public:
  using Error::Error;
};

enum class ModelMode { Mdp, Nts };

struct Edge {
  StateId target;
  double weight;

  bool operator==(const Edge&) const = default;
};

/// One enabled action at a state together with its successor distribution
/// (MDP mode) or possibility flags (NTS mode, every weight is 1).
struct Choice {
  ActionId action;
  std::vector<Edge> edges;

  bool operator==(const Choice&) const = default;
};

/// Raw, unvalidated contents of a labeled model.
struct ModelData {
  ModelMode mode = ModelMode::Mdp;
  StateId initial = 0;
  std::vector<std::string> actions;
  std::vector<std::string> propositions;
  std::vector<Letter> labels;
  std::vector<std::vector<Choice>> choices;
};

/// Labeled MDP or labeled NTS over dense state and action ids.
///
/// Construction validates every structural invariant and canonicalizes edge
/// lists (sorted by target, zero weights dropped). Instances are immutable.
class LabeledModel {
 public:
  explicit LabeledModel(ModelData data);

  ModelMode mode() const { return d_.mode; }
  bool is_nts() const { return d_.mode == ModelMode::Nts; }
  std::size_t num_states() const { return d_.labels.size(); }
  StateId initial() const { return d_.initial; }
  std::size_t num_actions() const { return d_.actions.size(); }
  const std::vector<std::string>& action_names() const { return d_.actions; }
  const std::string& action_name(ActionId a) const { return d_.actions.at(a); }
  const std::vector<std::string>& propositions() const { return d_.propositions; }
  Letter label(StateId s) const { return d_.labels[s]; }
  const std::vector<Letter>& labels() const { return d_.labels; }

  std::span<const Choice> choices(StateId s) const { return d_.choices[s]; }
  /// Null when the action is not enabled at s.
  const Choice* find_choice(StateId s, ActionId a) const;
  bool is_enabled(StateId s, ActionId a) const { return find_choice(s, a) != nullptr; }
  std::vector<ActionId> enabled(StateId s) const;
  /// Number of enabled (state, action) pairs.
  std::size_t num_choices() const;

  std::optional<ActionId> find_action(std::string_view name) const;
  std::string label_string(StateId s) const;

  const ModelData& data() const { return d_; }

  bool operator==(const LabeledModel& other) const;

 private:
  ModelData d_;
};

/// P^N(q,u,q') = 1 iff P(q,u,q') > 0. Idempotent on NTS inputs.
LabeledModel nts_from_mdp(const LabeledModel& m);

LabeledModel parse_model(std::string_view text);
/// Canonical text form; parse_model(serialize_model(m)) == m.
std::string serialize_model(const LabeledModel& m);

/// Parses "p q r" style observation lists against a proposition table.
Letter letter_from_names(std::span<const std::string> names,
                         std::span<const std::string> propositions);
std::string letter_to_string(Letter l, std::span<const std::string> propositions);

enum class PolicyKind { Deterministic, Randomized };

struct ActionProb {
  ActionId action;
  double prob;

  bool operator==(const ActionProb&) const = default;
};

/// Stationary policy: per-state distribution over enabled actions. States
/// where the policy is undefined carry an empty distribution.
class StationaryPolicy {
 public:
  StationaryPolicy() = default;
  StationaryPolicy(PolicyKind kind, std::vector<std::vector<ActionProb>> table);

  /// Deterministic policy from one action per state (kNoState = undefined).
  static StationaryPolicy deterministic(std::vector<ActionId> actions);

  PolicyKind kind() const { return kind_; }
  std::size_t num_states() const { return table_.size(); }
  std::span<const ActionProb> at(StateId s) const { return table_[s]; }
  bool defined(StateId s) const { return !table_[s].empty(); }
  double prob(StateId s, ActionId a) const;

  /// Throws ModelError if a distribution is not normalized or uses an
  /// action that is not enabled in m.
  void validate(const LabeledModel& m) const;

  bool operator==(const StationaryPolicy&) const = default;

 private:
  PolicyKind kind_ = PolicyKind::Randomized;
  std::vector<std::vector<ActionProb>> table_;
};

}  // namespace ltlac
