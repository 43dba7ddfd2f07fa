#include "ltlac/product.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

namespace ltlac {

std::vector<Letter> translate_labels(const LabeledModel& m, const RabinAutomaton& r) {
  std::vector<std::size_t> bit_of(r.propositions().size());
  for (std::size_t j = 0; j < r.propositions().size(); ++j) {
    const auto& name = r.propositions()[j];
    auto it = std::find(m.propositions().begin(), m.propositions().end(), name);
    if (it == m.propositions().end()) {
      throw ModelError(fmt::format("proposition mismatch: automaton uses '{}' which the model lacks",
                                   name));
    }
    bit_of[j] = static_cast<std::size_t>(it - m.propositions().begin());
  }
  std::vector<Letter> out(m.num_states(), 0);
  for (StateId q = 0; q < m.num_states(); ++q) {
    Letter l = 0;
    for (std::size_t j = 0; j < bit_of.size(); ++j) {
      if (m.label(q) & (Letter{1} << bit_of[j])) l |= Letter{1} << j;
    }
    out[q] = l;
  }
  return out;
}

StateId product_successor(const RabinAutomaton& r, std::span<const Letter> letters,
                          LabelAlignment alignment, StateId q, StateId s, StateId q_next) {
  return r.step(s, alignment == LabelAlignment::NextState ? letters[q_next] : letters[q]);
}

ProductModel build_product(const LabeledModel& m, const RabinAutomaton& r,
                           const ProductOptions& options) {
  const auto letters = translate_labels(m, r);
  const std::size_t ns = r.num_states();
  const std::size_t full = m.num_states() * ns;
  auto flat = [ns](StateId q, StateId s) { return static_cast<std::size_t>(q) * ns + s; };

  const StateId q0 = m.initial();
  const StateId s0 = options.alignment == LabelAlignment::NextState
                         ? r.step(r.initial(), letters[q0])
                         : r.initial();

  // Dense ids: BFS order from the initial state when pruning, flat order otherwise.
  std::vector<StateId> id(full, kNoState);
  std::vector<ProductState> projection;
  if (options.prune) {
    std::deque<std::size_t> queue{flat(q0, s0)};
    id[flat(q0, s0)] = 0;
    projection.push_back({q0, s0});
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      const auto q = static_cast<StateId>(cur / ns);
      const auto s = static_cast<StateId>(cur % ns);
      for (const auto& c : m.choices(q)) {
        for (const auto& e : c.edges) {
          const auto nxt = flat(e.target, product_successor(r, letters, options.alignment, q, s, e.target));
          if (id[nxt] == kNoState) {
            id[nxt] = static_cast<StateId>(projection.size());
            projection.push_back({static_cast<StateId>(nxt / ns), static_cast<StateId>(nxt % ns)});
            queue.push_back(nxt);
          }
        }
      }
    }
  } else {
    projection.reserve(full);
    for (std::size_t i = 0; i < full; ++i) {
      id[i] = static_cast<StateId>(i);
      projection.push_back({static_cast<StateId>(i / ns), static_cast<StateId>(i % ns)});
    }
  }

  ModelData d;
  d.mode = m.mode();
  d.initial = id[flat(q0, s0)];
  d.actions = m.action_names();
  d.propositions = m.propositions();
  d.labels.resize(projection.size());
  d.choices.resize(projection.size());
  for (StateId p = 0; p < projection.size(); ++p) {
    const auto [q, s] = projection[p];
    d.labels[p] = m.label(q);
    for (const auto& c : m.choices(q)) {
      Choice pc{c.action, {}};
      pc.edges.reserve(c.edges.size());
      for (const auto& e : c.edges) {
        const auto s_next = product_successor(r, letters, options.alignment, q, s, e.target);
        pc.edges.push_back({id[flat(e.target, s_next)], e.weight});
      }
      d.choices[p].push_back(std::move(pc));
    }
  }

  std::vector<RabinPair> pairs;
  for (const auto& rp : r.pairs()) {
    RabinPair lifted{std::vector<char>(projection.size(), 0), std::vector<char>(projection.size(), 0)};
    for (StateId p = 0; p < projection.size(); ++p) {
      lifted.avoid[p] = rp.avoid[projection[p].automaton_state];
      lifted.recur[p] = rp.recur[projection[p].automaton_state];
    }
    pairs.push_back(std::move(lifted));
  }

  return ProductModel{LabeledModel(std::move(d)), std::move(projection), std::move(pairs), full,
                      options.alignment};
}

}  // namespace ltlac
