#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ltlac/model.hpp"
#include "ltlac/pipeline.hpp"
#include "ltlac/rsp.hpp"
#include "ltlac/graph.hpp"
#include "ltlac/rabin.hpp"
#include "ltlac/synthesis.hpp"

namespace testing {

using namespace ltlac;

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(LTLAC_DATA_DIR) / name;
}

struct RandomModelSpec {
  std::size_t states = 6;
  std::size_t actions = 3;
  std::size_t props = 0;
  ModelMode mode = ModelMode::Mdp;
  /// Chance that a non-first action is enabled at a state.
  double enable = 0.7;
  std::size_t max_successors = 3;
};

/// Random model; action 0 is enabled everywhere.
inline LabeledModel random_model(std::mt19937_64& rng, const RandomModelSpec& spec) {
  ModelData d;
  d.mode = spec.mode;
  d.initial = 0;
  for (std::size_t a = 0; a < spec.actions; ++a) d.actions.push_back("a" + std::to_string(a));
  for (std::size_t p = 0; p < spec.props; ++p) d.propositions.push_back("p" + std::to_string(p));
  d.labels.resize(spec.states);
  d.choices.resize(spec.states);
  std::uniform_int_distribution<std::size_t> pick_state(0, spec.states - 1);
  std::uniform_int_distribution<std::size_t> pick_count(1, spec.max_successors);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (StateId s = 0; s < spec.states; ++s) {
    if (spec.props > 0) d.labels[s] = static_cast<Letter>(rng() % (Letter{1} << spec.props));
    for (ActionId a = 0; a < spec.actions; ++a) {
      if (a > 0 && unit(rng) > spec.enable) continue;
      std::vector<StateId> targets;
      const std::size_t k = pick_count(rng);
      for (std::size_t i = 0; i < k; ++i) targets.push_back(static_cast<StateId>(pick_state(rng)));
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      Choice c{a, {}};
      std::vector<double> w;
      double total = 0.0;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        w.push_back(0.1 + unit(rng));
        total += w.back();
      }
      for (std::size_t i = 0; i < targets.size(); ++i) {
        c.edges.push_back({targets[i], spec.mode == ModelMode::Nts ? 1.0 : w[i] / total});
      }
      d.choices[s].push_back(std::move(c));
    }
  }
  return LabeledModel(std::move(d));
}

/// Reflexive-transitive closure by repeated boolean squaring.
inline std::vector<std::vector<char>> closure(const graph::Adjacency& adj) {
  const std::size_t n = adj.size();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    r[i][i] = 1;
    for (StateId j : adj[i]) r[i][j] = 1;
  }
  for (std::size_t len = 1; len < n; len *= 2) {
    auto next = r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (r[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (r[k][j]) next[i][j] = 1;
    r = std::move(next);
  }
  return r;
}

/// Random NTS reachability problem turned into an SSP. The goal is never the
/// initial state and is reachable from it.
inline SspModel random_nts_ssp(std::mt19937_64& rng, std::size_t states, std::size_t actions) {
  for (;;) {
    const auto m = random_model(rng, {.states = states, .actions = actions, .mode = ModelMode::Nts,
                                      .enable = 0.8, .max_successors = 3});
    std::vector<char> goal(states, 0);
    for (StateId s = 1; s < states; ++s) goal[s] = rng() % 5 == 0;
    const auto sets = goal_and_bad_sets(m, goal);
    if (sets.bad[m.initial()]) continue;
    if (std::count(goal.begin(), goal.end(), 1) == 0) continue;
    return mrp_to_ssp(m, sets);
  }
}

/// Actions at s whose possible successors all lie in `set`.
inline std::vector<ActionId> staying_actions(const LabeledModel& m, StateId s, std::uint32_t set) {
  std::vector<ActionId> out;
  for (const auto& c : m.choices(s)) {
    bool inside = true;
    for (const auto& e : c.edges) inside = inside && ((set >> e.target) & 1U);
    if (inside) out.push_back(c.action);
  }
  return out;
}

/// Every state set that carries an end component, by exhaustive search.
/// Adding actions that stay inside only adds edges, so a set carries an end
/// component iff it does with all of its staying actions.
inline std::vector<EndComponent> brute_force_mecs(const LabeledModel& m, std::uint32_t allowed) {
  const std::size_t n = m.num_states();
  std::vector<std::uint32_t> ecs;
  for (std::uint32_t set = 1; set < (1U << n); ++set) {
    if ((set & allowed) != set) continue;
    graph::Adjacency adj(n);
    bool ok = true;
    for (StateId s = 0; s < n && ok; ++s) {
      if (!((set >> s) & 1U)) continue;
      const auto acts = staying_actions(m, s, set);
      ok = !acts.empty();
      for (ActionId a : acts)
        for (const auto& e : m.find_choice(s, a)->edges) adj[s].push_back(e.target);
    }
    if (!ok) continue;
    const auto reach = testing::closure(adj);
    for (StateId i = 0; i < n && ok; ++i)
      for (StateId j = 0; j < n && ok; ++j)
        if (((set >> i) & 1U) && ((set >> j) & 1U)) ok = reach[i][j];
    if (ok) ecs.push_back(set);
  }
  std::vector<EndComponent> out;
  for (std::uint32_t a : ecs) {
    bool maximal = true;
    for (std::uint32_t b : ecs) maximal = maximal && !(b != a && (a & b) == a);
    if (!maximal) continue;
    EndComponent ec;
    for (StateId s = 0; s < n; ++s) {
      if ((a >> s) & 1U) {
        ec.states.push_back(s);
        ec.actions.push_back(staying_actions(m, s, a));
      }
    }
    out.push_back(std::move(ec));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.states[0] < y.states[0]; });
  return out;
}

inline RabinAutomaton random_dra(std::mt19937_64& rng, std::size_t states) {
  std::vector<StateId> delta(states * 2);
  for (auto& t : delta) t = static_cast<StateId>(rng() % states);
  RabinPair p{std::vector<char>(states, 0), std::vector<char>(states, 0)};
  for (std::size_t s = 0; s < states; ++s) {
    const auto roll = rng() % 4;
    if (roll == 0) p.avoid[s] = 1;
    if (roll == 1) p.recur[s] = 1;
  }
  return RabinAutomaton(states, 0, {"p0"}, std::move(delta), {std::move(p)});
}

/// Per Rabin pair: brute-force MECs of the product without L_P(i) that meet K_P(i).
inline std::vector<EndComponent> brute_force_amecs(const ProductModel& p) {
  std::vector<EndComponent> out;
  const std::size_t n = p.model.num_states();
  for (const auto& pair : p.pairs) {
    std::uint32_t mask = 0;
    for (StateId x = 0; x < n; ++x) mask |= pair.avoid[x] ? 0U : 1U << x;
    for (auto& ec : brute_force_mecs(p.model, mask)) {
      bool hits = false;
      for (StateId x : ec.states) hits = hits || pair.recur[x];
      if (hits) out.push_back(std::move(ec));
    }
  }
  return out;
}

/// Random NTS with one proposition times a random 2-state automaton; the
/// product keeps all |Q| x 2 states.
inline ProductModel random_small_product(std::mt19937_64& rng, std::size_t base_states) {
  ModelData d = random_model(rng, {.states = base_states, .actions = 2, .mode = ModelMode::Nts,
                                   .max_successors = 2}).data();
  d.propositions = {"p0"};
  for (auto& l : d.labels) l = static_cast<Letter>(rng() % 2);
  const LabeledModel m(std::move(d));
  return build_product(m, random_dra(rng, 2), {LabelAlignment::NextState, false});
}

inline RunConfig desk_config() {
  RunConfig cfg;
  cfg.task = "desk";
  cfg.map_path = data_path("desk.map");
  cfg.dra_path = data_path("formula7.dra");
  cfg.noise.confusion = kAdjacentConfusion;
  return cfg;
}

}  // namespace testing
