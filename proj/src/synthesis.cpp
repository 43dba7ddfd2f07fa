#include "ltlac/synthesis.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "ltlac/graph.hpp"
#include "text_util.hpp"

namespace ltlac {

std::vector<EndComponent> max_end_components(const LabeledModel& m, std::span<const char> allowed) {
  const std::size_t n = m.num_states();
  std::vector<char> alive(n, 1);
  if (!allowed.empty()) {
    for (std::size_t s = 0; s < n; ++s) alive[s] = allowed[s];
  }
  // Retained actions per state, as indices into m.choices(s).
  std::vector<std::vector<std::size_t>> kept(n);
  for (StateId s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    for (std::size_t i = 0; i < m.choices(s).size(); ++i) kept[s].push_back(i);
  }

  auto stays_in = [&](StateId s, std::size_t ci, auto&& inside) {
    for (const auto& e : m.choices(s)[ci].edges) {
      if (!inside(e.target)) return false;
    }
    return true;
  };

  std::vector<std::uint32_t> comp;
  for (;;) {
    // Drop actions that can leave the live set, then states left without actions.
    bool pruned = true;
    while (pruned) {
      pruned = false;
      for (StateId s = 0; s < n; ++s) {
        if (!alive[s]) continue;
        std::erase_if(kept[s], [&](std::size_t ci) {
          return !stays_in(s, ci, [&](StateId t) { return alive[t] != 0; });
        });
        if (kept[s].empty()) {
          alive[s] = 0;
          pruned = true;
        }
      }
    }

    graph::Adjacency adj(n);
    for (StateId s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      for (auto ci : kept[s]) {
        for (const auto& e : m.choices(s)[ci].edges) adj[s].push_back(e.target);
      }
    }
    comp = graph::scc_ids(adj, alive);

    bool changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      const auto before = kept[s].size();
      std::erase_if(kept[s], [&](std::size_t ci) {
        return !stays_in(s, ci, [&](StateId t) { return alive[t] && comp[t] == comp[s]; });
      });
      if (kept[s].size() != before) changed = true;
      if (kept[s].empty()) alive[s] = 0;
    }
    if (!changed) break;
  }

  std::map<std::uint32_t, EndComponent> by_comp;
  for (StateId s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    auto& ec = by_comp[comp[s]];
    ec.states.push_back(s);
    std::vector<ActionId> acts;
    for (auto ci : kept[s]) acts.push_back(m.choices(s)[ci].action);
    ec.actions.push_back(std::move(acts));
  }
  std::vector<EndComponent> out;
  for (auto& [id, ec] : by_comp) out.push_back(std::move(ec));
  std::sort(out.begin(), out.end(),
            [](const EndComponent& a, const EndComponent& b) { return a.states[0] < b.states[0]; });
  return out;
}

std::vector<Amec> amecs(const ProductModel& p) {
  std::vector<Amec> out;
  for (std::size_t i = 0; i < p.pairs.size(); ++i) {
    const auto& pair = p.pairs[i];
    std::vector<char> allowed(p.model.num_states());
    for (std::size_t s = 0; s < allowed.size(); ++s) allowed[s] = !pair.avoid[s];
    for (auto& ec : max_end_components(p.model, allowed)) {
      const bool accepting = std::any_of(ec.states.begin(), ec.states.end(),
                                         [&](StateId s) { return pair.recur[s] != 0; });
      if (accepting) out.push_back(Amec{std::move(ec), i});
    }
  }
  return out;
}

GoalSets goal_and_bad_sets(const LabeledModel& m, std::vector<char> goal) {
  const auto reach = graph::can_reach(graph::successor_graph(m), goal);
  std::vector<char> bad(m.num_states(), 0);
  for (std::size_t s = 0; s < bad.size(); ++s) bad[s] = !reach[s];
  return GoalSets{std::move(goal), std::move(bad)};
}

GoalSets goal_and_bad_sets(const LabeledModel& m, std::span<const Amec> components) {
  std::vector<char> goal(m.num_states(), 0);
  for (const auto& a : components) {
    for (StateId s : a.states) goal[s] = 1;
  }
  return goal_and_bad_sets(m, std::move(goal));
}

SspModel mrp_to_ssp(const LabeledModel& product, const GoalSets& sets) {
  const std::size_t n = product.num_states();
  if (sets.goal[product.initial()]) {
    throw ModelError("initial state already lies in the goal set; the reachability problem is trivial");
  }
  SspModel ssp{product, kNoState, {}, std::vector<StateId>(n, kNoState), {}};
  StateId next = 0;
  for (StateId s = 0; s < n; ++s) {
    if (!sets.goal[s]) {
      ssp.from_product[s] = next++;
      ssp.to_product.push_back(s);
    }
  }
  const StateId terminal = next;
  for (StateId s = 0; s < n; ++s) {
    if (sets.goal[s]) ssp.from_product[s] = terminal;
  }
  ssp.to_product.push_back(kNoState);

  const bool nts = product.is_nts();
  const StateId initial = ssp.from_product[product.initial()];
  ModelData d;
  d.mode = product.mode();
  d.initial = initial;
  d.actions = product.action_names();
  d.propositions = product.propositions();
  d.labels.resize(terminal + 1, 0);
  d.choices.resize(terminal + 1);
  ssp.bad.assign(terminal + 1, 0);

  for (StateId s = 0; s < n; ++s) {
    if (sets.goal[s]) continue;
    const StateId t = ssp.from_product[s];
    d.labels[t] = product.label(s);
    if (sets.bad[s]) {
      ssp.bad[t] = 1;
      for (const auto& c : product.choices(s)) d.choices[t].push_back(Choice{c.action, {{initial, 1.0}}});
      continue;
    }
    for (const auto& c : product.choices(s)) {
      Choice out{c.action, {}};
      double into_goal = 0.0;
      for (const auto& e : c.edges) {
        if (sets.goal[e.target]) {
          into_goal = nts ? std::max(into_goal, e.weight) : into_goal + e.weight;
        } else {
          out.edges.push_back({ssp.from_product[e.target], e.weight});
        }
      }
      if (into_goal > 0.0) out.edges.push_back({terminal, std::min(into_goal, 1.0)});
      d.choices[t].push_back(std::move(out));
    }
  }
  for (ActionId a = 0; a < d.actions.size(); ++a) {
    d.choices[terminal].push_back(Choice{a, {{terminal, 1.0}}});
  }
  ssp.model = LabeledModel(std::move(d));
  ssp.terminal = terminal;
  return ssp;
}

std::string serialize_ssp(const SspModel& ssp) {
  std::string out = fmt::format("terminal {}\n", ssp.terminal);
  out += serialize_model(ssp.model);
  for (StateId s = 0; s < ssp.model.num_states(); ++s) {
    if (!ssp.bad[s]) continue;
    for (const auto& c : ssp.model.choices(s)) {
      out += fmt::format("cost {} {} 1\n", s, ssp.model.action_name(c.action));
    }
  }
  return out;
}

SspModel parse_ssp(std::string_view text) {
  std::string base;
  StateId terminal = kNoState;
  struct CostLine {
    int line;
    StateId state;
    std::string action;
    double value;
  };
  std::vector<CostLine> costs;
  std::size_t pos = 0;
  int number = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const auto raw = text.substr(pos, end - pos);
    auto content = raw;
    if (auto hash = content.find('#'); hash != std::string_view::npos) content = content.substr(0, hash);
    auto toks = detail::split_ws(detail::trim(content));
    if (!toks.empty() && toks[0] == "terminal") {
      if (toks.size() != 2) throw ParseError(number, "usage: terminal q");
      terminal = detail::parse_number<StateId>(toks[1], number, "state id");
      base += "\n";
    } else if (!toks.empty() && toks[0] == "cost") {
      if (toks.size() != 4) throw ParseError(number, "usage: cost q u g");
      costs.push_back({number, detail::parse_number<StateId>(toks[1], number, "state id"),
                       std::string(toks[2]), detail::parse_number<double>(toks[3], number, "cost")});
      base += "\n";
    } else {
      base += std::string(raw) + "\n";
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  SspModel ssp{parse_model(base), terminal, {}, {}, {}};
  const auto n = ssp.model.num_states();
  if (terminal >= n) throw ModelError("SSP file lacks a valid 'terminal' line");
  ssp.bad.assign(n, 0);
  std::map<StateId, std::size_t> cost_ones;
  for (const auto& c : costs) {
    if (c.state >= n) throw ParseError(c.line, fmt::format("state {} out of range", c.state));
    auto a = ssp.model.find_action(c.action);
    if (!a || !ssp.model.is_enabled(c.state, *a)) {
      throw ParseError(c.line, fmt::format("action '{}' not enabled at state {}", c.action, c.state));
    }
    if (c.value != 0.0 && c.value != 1.0) throw ParseError(c.line, "costs must be 0 or 1");
    if (c.value == 1.0) ++cost_ones[c.state];
  }
  for (const auto& [s, count] : cost_ones) {
    if (count != ssp.model.choices(s).size()) {
      throw ModelError(fmt::format("state {}: cost must be 1 under every action or none", s));
    }
    if (s == terminal) throw ModelError("the terminal must be cost-free");
    ssp.bad[s] = 1;
  }
  for (StateId s = 0; s < n; ++s) ssp.to_product.push_back(s == terminal ? kNoState : s);
  return ssp;
}

StationaryPolicy inside_amec_policy(const EndComponent& a, std::size_t num_states) {
  std::vector<std::vector<ActionProb>> table(num_states);
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const auto& acts = a.actions[i];
    for (ActionId u : acts) {
      table[a.states[i]].push_back({u, 1.0 / static_cast<double>(acts.size())});
    }
  }
  return StationaryPolicy(PolicyKind::Randomized, std::move(table));
}

}  // namespace ltlac
