#include "ltlac/provider.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace ltlac {

ModelTransitionSource::ModelTransitionSource(const LabeledModel& mdp) : mdp_(mdp) {
  if (mdp.is_nts()) throw ModelError("transition probabilities need an MDP-mode model");
}

std::vector<Edge> ModelTransitionSource::transition_probs(StateId q, ActionId u) {
  const auto* c = mdp_.find_choice(q, u);
  if (!c) throw ModelError(fmt::format("action {} not enabled at state {}", u, q));
  std::lock_guard lock(mu_);
  seen_.try_emplace({q, u}, 1);
  return c->edges;
}

std::size_t ModelTransitionSource::pairs_computed() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

std::vector<Edge> ModelProbabilityProvider::probabilities(StateId x, ActionId u) {
  const auto* c = ssp_.model.find_choice(x, u);
  if (!c) throw ModelError(fmt::format("action {} not enabled at SSP state {}", u, x));
  if (x != ssp_.terminal && !ssp_.bad[x]) {
    std::lock_guard lock(mu_);
    seen_.try_emplace({x, u}, 1);
  }
  return c->edges;
}

std::size_t ModelProbabilityProvider::pairs_computed() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

ProductProbabilityProvider::ProductProbabilityProvider(const ProductModel& product,
                                                       const RabinAutomaton& automaton,
                                                       const LabeledModel& base, const SspModel& ssp,
                                                       TransitionSource& source)
    : product_(product),
      automaton_(automaton),
      ssp_(ssp),
      source_(source),
      letters_(translate_labels(base, automaton)),
      product_id_(base.num_states() * automaton.num_states(), kNoState) {
  for (StateId p = 0; p < product.projection.size(); ++p) {
    const auto [q, s] = product.projection[p];
    product_id_[static_cast<std::size_t>(q) * automaton.num_states() + s] = p;
  }
}

std::vector<Edge> ProductProbabilityProvider::probabilities(StateId x, ActionId u) {
  if (!ssp_.model.is_enabled(x, u)) {
    throw ModelError(fmt::format("action {} not enabled at SSP state {}", u, x));
  }
  if (x == ssp_.terminal) return {{ssp_.terminal, 1.0}};
  if (ssp_.bad[x]) return {{ssp_.initial(), 1.0}};
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find({x, u}); it != memo_.end()) return it->second;
  }
  const StateId p = ssp_.to_product[x];
  const auto [q, s] = product_.projection[p];
  std::vector<Edge> out;
  double into_terminal = 0.0;
  for (const auto& e : source_.transition_probs(q, u)) {
    const auto s_next = product_successor(automaton_, letters_, product_.alignment, q, s, e.target);
    const StateId p_next = product_id_[static_cast<std::size_t>(e.target) * automaton_.num_states() + s_next];
    if (p_next == kNoState) {
      throw ModelError(fmt::format("source outcome {} from ({}, {}) is not a product successor",
                                   e.target, q, u));
    }
    const StateId x_next = ssp_.from_product[p_next];
    if (x_next == ssp_.terminal) {
      into_terminal += e.weight;
    } else {
      out.push_back({x_next, e.weight});
    }
  }
  if (into_terminal > 0.0) out.push_back({ssp_.terminal, into_terminal});
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return a.target < b.target; });
  std::lock_guard lock(mu_);
  return memo_.try_emplace({x, u}, std::move(out)).first->second;
}

std::size_t ProductProbabilityProvider::pairs_computed() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

LabeledModel product_mdp(const ProductModel& product, const RabinAutomaton& automaton,
                         const LabeledModel& base, TransitionSource& source) {
  const auto letters = translate_labels(base, automaton);
  const std::size_t ns = automaton.num_states();
  std::vector<StateId> id(base.num_states() * ns, kNoState);
  for (StateId p = 0; p < product.projection.size(); ++p) {
    const auto [q, s] = product.projection[p];
    id[static_cast<std::size_t>(q) * ns + s] = p;
  }
  ModelData d = product.model.data();
  d.mode = ModelMode::Mdp;
  for (StateId p = 0; p < d.choices.size(); ++p) {
    const auto [q, s] = product.projection[p];
    for (auto& c : d.choices[p]) {
      c.edges.clear();
      for (const auto& e : source.transition_probs(q, c.action)) {
        const auto s_next = product_successor(automaton, letters, product.alignment, q, s, e.target);
        const StateId target = id[static_cast<std::size_t>(e.target) * ns + s_next];
        if (target == kNoState) throw ModelError("source outcome outside the product");
        c.edges.push_back({target, e.weight});
      }
    }
  }
  return LabeledModel(std::move(d));
}

}  // namespace ltlac
