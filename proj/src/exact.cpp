#include "ltlac/exact.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "ltlac/graph.hpp"

namespace ltlac {

namespace {

/// Solves (I - P) x = rhs over the listed unknowns, where P is given as
/// (row, col, weight) among unknowns. Rows are local indices.
std::vector<double> solve_transient(std::size_t size,
                                    const std::vector<Eigen::Triplet<double>>& p_entries,
                                    const std::vector<double>& rhs) {
  if (size == 0) return {};
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(p_entries.size() + size);
  for (std::size_t i = 0; i < size; ++i) entries.emplace_back(i, i, 1.0);
  for (const auto& t : p_entries) entries.emplace_back(t.row(), t.col(), -t.value());
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error("singular system in exact policy evaluation");
  Eigen::VectorXd b(static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) b[static_cast<Eigen::Index>(i)] = rhs[i];
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw Error("exact policy evaluation failed to solve");
  return {x.data(), x.data() + x.size()};
}

/// Graph of the transitions that have positive probability under mu.
graph::Adjacency policy_graph(const LabeledModel& m, const StationaryPolicy& mu) {
  graph::Adjacency adj(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const auto& ap : mu.at(s)) {
      if (ap.prob <= 0.0) continue;
      for (const auto& e : m.find_choice(s, ap.action)->edges) adj[s].push_back(e.target);
    }
  }
  return adj;
}

double q_value(const Choice& c, std::span<const double> v) {
  double q = 0.0;
  for (const auto& e : c.edges) q += e.weight * v[e.target];
  return q;
}

/// Deterministic policy that takes, at each state with positive value, the
/// lowest-id action within `slack` of the best Q-value that moves strictly
/// closer (in attractor rank) to the goal.
std::vector<ActionId> attractor_policy(const LabeledModel& m, const GoalSets& sets,
                                       std::span<const double> v, double slack) {
  const std::size_t n = m.num_states();
  std::vector<ActionId> choice(n, kNoState);
  std::vector<char> settled(n, 0);
  for (std::size_t s = 0; s < n; ++s) settled[s] = sets.goal[s];

  std::vector<std::vector<ActionId>> optimal(n);
  for (StateId s = 0; s < n; ++s) {
    if (sets.goal[s] || sets.bad[s]) continue;
    double best = 0.0;
    for (const auto& c : m.choices(s)) best = std::max(best, q_value(c, v));
    for (const auto& c : m.choices(s)) {
      if (q_value(c, v) >= best - slack) optimal[s].push_back(c.action);
    }
    std::sort(optimal[s].begin(), optimal[s].end());
  }

  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<std::pair<StateId, ActionId>> layer;
    for (StateId s = 0; s < n; ++s) {
      if (settled[s] || sets.bad[s] || v[s] <= 0.0) continue;
      for (ActionId u : optimal[s]) {
        const auto& edges = m.find_choice(s, u)->edges;
        if (std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return settled[e.target] != 0; })) {
          layer.push_back({s, u});
          break;
        }
      }
    }
    for (auto [s, u] : layer) {
      choice[s] = u;
      settled[s] = 1;
      progress = true;
    }
  }
  for (StateId s = 0; s < n; ++s) {
    if (sets.goal[s] || sets.bad[s] || choice[s] != kNoState) continue;
    choice[s] = optimal[s].empty() ? m.choices(s).front().action : optimal[s].front();
    // Lowest id overall for zero-value states.
    if (v[s] <= 0.0) {
      ActionId lowest = kNoState;
      for (const auto& c : m.choices(s)) lowest = std::min(lowest, c.action);
      choice[s] = lowest;
    }
  }
  return choice;
}

}  // namespace

std::vector<double> policy_reach_values(const LabeledModel& mdp, const StationaryPolicy& mu,
                                        const GoalSets& sets) {
  const std::size_t n = mdp.num_states();
  if (mu.num_states() != n) throw ModelError("policy size does not match the model");
  std::vector<double> v(n, 0.0);
  for (StateId s = 0; s < n; ++s) {
    if (sets.goal[s]) v[s] = 1.0;
    if (!sets.goal[s] && !sets.bad[s] && !mu.defined(s)) {
      throw ModelError(fmt::format("policy undefined at state {}", s));
    }
  }
  auto adj = policy_graph(mdp, mu);
  for (StateId s = 0; s < n; ++s) {
    if (sets.goal[s] || sets.bad[s]) adj[s].clear();
  }
  const auto reach = graph::can_reach(adj, sets.goal);

  std::vector<StateId> local(n, kNoState);
  std::vector<StateId> unknowns;
  for (StateId s = 0; s < n; ++s) {
    if (!sets.goal[s] && !sets.bad[s] && reach[s]) {
      local[s] = static_cast<StateId>(unknowns.size());
      unknowns.push_back(s);
    }
  }
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> rhs(unknowns.size(), 0.0);
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    const StateId s = unknowns[i];
    for (const auto& ap : mu.at(s)) {
      if (ap.prob <= 0.0) continue;
      for (const auto& e : mdp.find_choice(s, ap.action)->edges) {
        const double w = ap.prob * e.weight;
        if (sets.goal[e.target]) {
          rhs[i] += w;
        } else if (local[e.target] != kNoState) {
          entries.emplace_back(i, local[e.target], w);
        }
      }
    }
  }
  const auto x = solve_transient(unknowns.size(), entries, rhs);
  for (std::size_t i = 0; i < unknowns.size(); ++i) v[unknowns[i]] = std::clamp(x[i], 0.0, 1.0);
  return v;
}

double eval_policy_reach(const LabeledModel& mdp, const StationaryPolicy& mu, const GoalSets& sets) {
  return policy_reach_values(mdp, mu, sets)[mdp.initial()];
}

ReachResult max_reach(const LabeledModel& mdp, const GoalSets& sets, const ReachOptions& options) {
  const std::size_t n = mdp.num_states();
  for (std::size_t s = 0; s < n; ++s) {
    if (sets.goal[s] && sets.bad[s]) throw ModelError("goal and zero-probability sets overlap");
  }
  // States with no possible path to the goal are fixed at zero even if the
  // caller's S-bar* is incomplete.
  const auto reach = graph::can_reach(graph::successor_graph(mdp), sets.goal);
  GoalSets fixed{sets.goal, sets.bad};
  for (std::size_t s = 0; s < n; ++s) {
    if (!reach[s]) fixed.bad[s] = 1;
  }

  ReachResult result;
  auto& v = result.values;
  v.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) v[s] = fixed.goal[s] ? 1.0 : 0.0;
  for (result.sweeps = 0; result.sweeps < options.max_sweeps;) {
    double delta = 0.0;
    for (StateId s = 0; s < n; ++s) {
      if (fixed.goal[s] || fixed.bad[s]) continue;
      double best = 0.0;
      for (const auto& c : mdp.choices(s)) best = std::max(best, q_value(c, v));
      best = std::min(best, 1.0);
      delta = std::max(delta, best - v[s]);
      v[s] = std::max(v[s], best);
    }
    ++result.sweeps;
    if (options.on_sweep) options.on_sweep(v);
    if (delta <= options.tolerance) break;
  }

  auto choice = attractor_policy(mdp, fixed, v, 1e-9);
  auto policy = StationaryPolicy::deterministic(choice);
  auto exact = policy_reach_values(mdp, policy, fixed);
  // Policy-improvement polish; only strict improvements are accepted.
  for (int round = 0; round < 64; ++round) {
    auto candidate_choice = attractor_policy(mdp, fixed, exact, 1e-12);
    if (candidate_choice == choice) break;
    auto candidate = StationaryPolicy::deterministic(candidate_choice);
    auto values = policy_reach_values(mdp, candidate, fixed);
    bool no_worse = true;
    bool better = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (values[s] < exact[s] - 1e-12) no_worse = false;
      if (values[s] > exact[s] + 1e-12) better = true;
    }
    if (!no_worse || !better) break;
    choice = std::move(candidate_choice);
    policy = std::move(candidate);
    exact = std::move(values);
  }
  result.values = std::move(exact);
  result.policy = std::move(policy);
  return result;
}

double expected_total_cost(const SspModel& ssp, const StationaryPolicy& mu) {
  const auto& m = ssp.model;
  const std::size_t n = m.num_states();
  if (m.is_nts()) throw ModelError("expected total cost needs an MDP-mode SSP");
  for (StateId s = 0; s < n; ++s) {
    if (s != ssp.terminal && !mu.defined(s)) {
      throw ModelError(fmt::format("policy undefined at state {}", s));
    }
  }
  auto adj = policy_graph(m, mu);
  adj[ssp.terminal].clear();
  std::vector<char> term(n, 0);
  term[ssp.terminal] = 1;
  const auto reach = graph::can_reach(adj, term);
  const StateId start[] = {ssp.initial()};
  const auto visited = graph::bfs_distances(adj, start);
  for (StateId s = 0; s < n; ++s) {
    if (visited[s] != graph::kUnreachable && !reach[s]) {
      throw ImproperPolicyError(
          fmt::format("policy is improper: state {} never reaches the terminal", s));
    }
  }
  std::vector<StateId> local(n, kNoState);
  std::vector<StateId> unknowns;
  for (StateId s = 0; s < n; ++s) {
    if (s != ssp.terminal && reach[s]) {
      local[s] = static_cast<StateId>(unknowns.size());
      unknowns.push_back(s);
    }
  }
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> rhs(unknowns.size(), 0.0);
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    const StateId s = unknowns[i];
    for (const auto& ap : mu.at(s)) {
      rhs[i] += ap.prob * ssp.cost(s, ap.action);
      for (const auto& e : m.find_choice(s, ap.action)->edges) {
        if (local[e.target] != kNoState) entries.emplace_back(i, local[e.target], ap.prob * e.weight);
      }
    }
  }
  const auto x = solve_transient(unknowns.size(), entries, rhs);
  if (ssp.initial() == ssp.terminal) return 0.0;
  return x[local[ssp.initial()]];
}

std::size_t count_deterministic_policies(const LabeledModel& m) {
  std::size_t total = 1;
  for (StateId s = 0; s < m.num_states(); ++s) {
    const auto k = m.choices(s).size();
    if (total > kMaxEnumeratedPolicies / k) {
      throw Error(fmt::format("more than {} deterministic policies", kMaxEnumeratedPolicies));
    }
    total *= k;
  }
  return total;
}

void for_each_deterministic_policy(const LabeledModel& m,
                                   const std::function<void(const StationaryPolicy&)>& visit) {
  count_deterministic_policies(m);
  const std::size_t n = m.num_states();
  std::vector<std::size_t> digit(n, 0);
  std::vector<ActionId> actions(n);
  for (;;) {
    for (StateId s = 0; s < n; ++s) actions[s] = m.choices(s)[digit[s]].action;
    visit(StationaryPolicy::deterministic(actions));
    std::size_t s = 0;
    while (s < n) {
      if (++digit[s] < m.choices(static_cast<StateId>(s)).size()) break;
      digit[s] = 0;
      ++s;
    }
    if (s == n) return;
  }
}

}  // namespace ltlac
