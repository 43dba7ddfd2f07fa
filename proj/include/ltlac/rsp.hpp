#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ltlac/graph.hpp"
#include "ltlac/model.hpp"
#include "ltlac/synthesis.hpp"

namespace ltlac {

using Vec2 = Eigen::Vector2d;
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; identical across platforms.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Hop counts to the nearest target over possible transitions.
std::vector<std::uint32_t> min_distances(const LabeledModel& n, std::span<const StateId> targets);

/// {j : d(i, j) <= radius}, ascending. Always contains i.
std::vector<StateId> neighborhood(const LabeledModel& n, StateId i, std::size_t radius);

/// Fraction of N(i) outside `bad`.
double safety_score(const LabeledModel& n, StateId i, std::size_t radius, std::span<const char> bad);

struct ActionSequence {
  std::vector<ActionId> actions;
  /// States reachable from i by applying `actions` in order, ascending.
  std::vector<StateId> reach;
};

/// Every length-t action sequence from i. Action k is drawn from the actions
/// enabled at some state reachable after k-1 steps; states where it is not
/// enabled drop out of the propagated set. Throws Error past `cap`.
std::vector<ActionSequence> action_sequences(const LabeledModel& n, StateId i, std::size_t t,
                                             std::size_t cap = 10000);

struct FeaturePair {
  double safety = 0.0;    // sum of safe(j) over reached j in N(i)
  double progress = 0.0;  // sum of progress(j) - progress(i) over reached j in N(i)

  Vec2 vec() const { return {safety, progress}; }
};

struct RspOptions {
  std::size_t horizon = 2;
  /// Neighborhood radius; 0 means "same as horizon".
  std::size_t radius = 0;
  /// Stand-in for infinite progress; negative means "number of SSP states".
  double unreachable_progress = -1.0;
  std::size_t max_sequences = 10000;
};

/// The t-step lookahead randomized policy over an SSP in NTS mode. The score
/// tables do not depend on theta and are built once.
class LookaheadPolicy {
 public:
  struct Entry {
    std::vector<ActionId> actions;
    FeaturePair features;
  };

  LookaheadPolicy(const SspModel& ssp, const RspOptions& options = {});

  const SspModel& ssp() const { return *ssp_; }
  std::size_t num_states() const { return safe_.size(); }
  std::size_t horizon() const { return horizon_; }
  std::size_t radius() const { return radius_; }
  double unreachable_progress() const { return dmax_; }

  double safe(StateId i) const { return safe_[i]; }
  /// graph::kUnreachable for states that cannot reach the goal.
  std::uint32_t progress(StateId i) const { return progress_[i]; }
  double progress_value(StateId i) const;
  std::span<const Entry> sequences(StateId i) const { return table_[i]; }

  /// exp(theta . f) for sequence `e` at state i.
  double sequence_score(const Vec2& theta, StateId i, std::size_t e) const;
  /// Softmax over E(i) marginalized onto first actions, in enabled order.
  std::vector<ActionProb> action_distribution(const Vec2& theta, StateId i) const;
  double log_action_prob(const Vec2& theta, StateId i, ActionId u) const;
  /// Gradient of ln mu_theta(i, u). Throws Error when mu_theta(i, u) = 0.
  Vec2 log_policy_gradient(const Vec2& theta, StateId i, ActionId u) const;
  ActionId sample_action(const Vec2& theta, StateId i, Rng& rng) const;

  /// Full per-state action distribution table at theta.
  StationaryPolicy policy_table(const Vec2& theta) const;

 private:
  const SspModel* ssp_;
  std::size_t horizon_;
  std::size_t radius_;
  double dmax_;
  std::vector<double> safe_;
  std::vector<std::uint32_t> progress_;
  std::vector<std::vector<Entry>> table_;
};

}  // namespace ltlac
