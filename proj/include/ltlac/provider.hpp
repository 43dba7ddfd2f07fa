#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "ltlac/model.hpp"
#include "ltlac/product.hpp"
#include "ltlac/rabin.hpp"
#include "ltlac/synthesis.hpp"

namespace ltlac {

/// Source of transition probabilities of the base labeled model, e.g. a
/// simulator. Returned edges must be a subset of the NTS's possible successors.
class TransitionSource {
 public:
  virtual ~TransitionSource() = default;
  virtual std::vector<Edge> transition_probs(StateId q, ActionId u) = 0;
  /// Distinct (q, u) pairs computed so far.
  virtual std::size_t pairs_computed() const = 0;
};

/// Reads base-model probabilities from an MDP-mode model.
class ModelTransitionSource : public TransitionSource {
 public:
  /// `mdp` must outlive the source.
  explicit ModelTransitionSource(const LabeledModel& mdp);
  std::vector<Edge> transition_probs(StateId q, ActionId u) override;
  std::size_t pairs_computed() const override;

 private:
  const LabeledModel& mdp_;
  mutable std::mutex mu_;
  std::map<std::pair<StateId, ActionId>, char> seen_;
};

/// Supplies SSP transition probabilities on demand, one (state, action) pair
/// at a time, memoized.
class ProbabilityProvider {
 public:
  virtual ~ProbabilityProvider() = default;
  virtual std::vector<Edge> probabilities(StateId x, ActionId u) = 0;
  /// Distinct pairs whose probabilities needed the underlying source.
  virtual std::size_t pairs_computed() const = 0;
};

/// Reads probabilities straight out of an MDP-mode SSP.
class ModelProbabilityProvider : public ProbabilityProvider {
 public:
  explicit ModelProbabilityProvider(const SspModel& mdp_ssp) : ssp_(mdp_ssp) {}
  std::vector<Edge> probabilities(StateId x, ActionId u) override;
  std::size_t pairs_computed() const override;

 private:
  const SspModel& ssp_;
  mutable std::mutex mu_;
  std::map<std::pair<StateId, ActionId>, char> seen_;
};

/// Lifts a base-model TransitionSource through the product and the SSP
/// conversion. The terminal and S-bar* states need no source query and are
/// not counted.
class ProductProbabilityProvider : public ProbabilityProvider {
 public:
  /// All references must outlive the provider.
  ProductProbabilityProvider(const ProductModel& product, const RabinAutomaton& automaton,
                             const LabeledModel& base, const SspModel& ssp,
                             TransitionSource& source);

  std::vector<Edge> probabilities(StateId x, ActionId u) override;
  std::size_t pairs_computed() const override;

 private:
  const ProductModel& product_;
  const RabinAutomaton& automaton_;
  const SspModel& ssp_;
  TransitionSource& source_;
  std::vector<Letter> letters_;
  std::vector<StateId> product_id_;  // flat (q, s) -> product state
  mutable std::mutex mu_;
  std::map<std::pair<StateId, ActionId>, std::vector<Edge>> memo_;
};

/// Builds the full MDP-mode product by querying every enabled base pair.
/// Used by the exact oracle, never by the learner.
LabeledModel product_mdp(const ProductModel& product, const RabinAutomaton& automaton,
                         const LabeledModel& base, TransitionSource& source);

}  // namespace ltlac
