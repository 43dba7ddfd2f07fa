#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ltlac/model.hpp"
#include "ltlac/synthesis.hpp"

namespace ltlac {

/// The policy never reaches the terminal from some state it visits.
class ImproperPolicyError : public Error {
 public:
  using Error::Error;
};

struct ReachOptions {
  double tolerance = 1e-12;
  std::size_t max_sweeps = 1'000'000;
  /// Called after every value-iteration sweep with the current values.
  std::function<void(std::span<const double>)> on_sweep;
};

struct ReachResult {
  /// Per-state maximal probability of reaching S*.
  std::vector<double> values;
  /// Deterministic optimal policy; undefined on S* and S-bar*.
  StationaryPolicy policy;
  std::size_t sweeps = 0;

  double initial_value(const LabeledModel& m) const { return values[m.initial()]; }
};

/// Maximal reachability probability of S* by Gauss-Seidel value iteration
/// from below, followed by greedy extraction of a policy that makes progress
/// toward S* (lowest action id among optimal ones) and its exact evaluation.
ReachResult max_reach(const LabeledModel& mdp, const GoalSets& sets, const ReachOptions& options = {});

/// Exact reachability probabilities of S* under a stationary policy.
std::vector<double> policy_reach_values(const LabeledModel& mdp, const StationaryPolicy& mu,
                                        const GoalSets& sets);
/// Reachability probability from the initial state.
double eval_policy_reach(const LabeledModel& mdp, const StationaryPolicy& mu, const GoalSets& sets);

/// Expected total cost from the initial state of an MDP-mode SSP under mu.
/// Throws ImproperPolicyError when the terminal is not reached almost surely.
double expected_total_cost(const SspModel& ssp, const StationaryPolicy& mu);

inline constexpr std::size_t kMaxEnumeratedPolicies = 1'000'000;

std::size_t count_deterministic_policies(const LabeledModel& m);
/// Visits every deterministic stationary policy exactly once (odometer order
/// over enabled actions). Throws Error beyond kMaxEnumeratedPolicies.
void for_each_deterministic_policy(const LabeledModel& m,
                                   const std::function<void(const StationaryPolicy&)>& visit);

}  // namespace ltlac
