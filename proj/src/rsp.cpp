#include "ltlac/rsp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <fmt/format.h>

namespace ltlac {

namespace {

std::vector<StateId> ball(const graph::Adjacency& adj, StateId i, std::size_t radius) {
  std::vector<StateId> out{i};
  std::vector<std::uint32_t> depth{0};
  std::vector<char> seen(adj.size(), 0);
  seen[i] = 1;
  for (std::size_t head = 0; head < out.size(); ++head) {
    if (depth[head] == radius) continue;
    for (StateId w : adj[out[head]]) {
      if (!seen[w]) {
        seen[w] = 1;
        out.push_back(w);
        depth.push_back(depth[head] + 1);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double safety_in_ball(std::span<const StateId> nb, std::span<const char> bad) {
  std::size_t good = 0;
  for (StateId j : nb) good += bad[j] ? 0 : 1;
  return static_cast<double>(good) / static_cast<double>(nb.size());
}

void expand(const LabeledModel& n, std::size_t t, std::size_t cap, std::vector<ActionId>& prefix,
            const std::vector<StateId>& current, std::vector<ActionSequence>& out, StateId root) {
  if (prefix.size() == t) {
    if (out.size() >= cap) {
      throw Error(fmt::format("state {}: more than {} lookahead sequences", root, cap));
    }
    out.push_back({prefix, current});
    return;
  }
  std::vector<ActionId> candidates;
  for (StateId j : current) {
    for (const auto& c : n.choices(j)) candidates.push_back(c.action);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (ActionId u : candidates) {
    std::vector<StateId> next;
    for (StateId j : current) {
      if (const auto* c = n.find_choice(j, u)) {
        for (const auto& e : c->edges) next.push_back(e.target);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    prefix.push_back(u);
    expand(n, t, cap, prefix, next, out, root);
    prefix.pop_back();
  }
}

/// Softmax weights over E(i) computed in log space.
std::vector<double> sequence_weights(std::span<const LookaheadPolicy::Entry> seqs, const Vec2& theta) {
  std::vector<double> w(seqs.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < seqs.size(); ++e) {
    w[e] = theta.dot(seqs[e].features.vec());
    top = std::max(top, w[e]);
  }
  double total = 0.0;
  for (auto& x : w) {
    x = std::exp(x - top);
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

std::vector<std::uint32_t> min_distances(const LabeledModel& n, std::span<const StateId> targets) {
  return graph::bfs_distances(graph::reversed(graph::successor_graph(n)), targets);
}

std::vector<StateId> neighborhood(const LabeledModel& n, StateId i, std::size_t radius) {
  return ball(graph::successor_graph(n), i, radius);
}

double safety_score(const LabeledModel& n, StateId i, std::size_t radius, std::span<const char> bad) {
  return safety_in_ball(neighborhood(n, i, radius), bad);
}

std::vector<ActionSequence> action_sequences(const LabeledModel& n, StateId i, std::size_t t,
                                             std::size_t cap) {
  if (t == 0) throw Error("lookahead horizon must be at least 1");
  std::vector<ActionSequence> out;
  std::vector<ActionId> prefix;
  expand(n, t, cap, prefix, {i}, out, i);
  return out;
}

LookaheadPolicy::LookaheadPolicy(const SspModel& ssp, const RspOptions& options)
    : ssp_(&ssp),
      horizon_(options.horizon),
      radius_(options.radius == 0 ? options.horizon : options.radius) {
  if (horizon_ == 0) throw Error("lookahead horizon must be at least 1");
  const auto& m = ssp.model;
  const std::size_t n = m.num_states();
  dmax_ = options.unreachable_progress < 0.0 ? static_cast<double>(n) : options.unreachable_progress;

  const auto adj = graph::successor_graph(m);
  // Progress ignores the restart edges out of S-bar*: those states cannot reach S*.
  auto reach_adj = adj;
  for (StateId s = 0; s < n; ++s) {
    if (ssp.bad[s]) reach_adj[s].clear();
  }
  const StateId goal[] = {ssp.terminal};
  progress_ = graph::bfs_distances(graph::reversed(reach_adj), goal);
  for (StateId s = 0; s < n; ++s) {
    if (ssp.bad[s]) progress_[s] = graph::kUnreachable;
  }

  std::vector<std::vector<StateId>> balls(n);
  safe_.resize(n);
  for (StateId s = 0; s < n; ++s) {
    balls[s] = ball(adj, s, radius_);
    safe_[s] = safety_in_ball(balls[s], ssp.bad);
  }

  table_.resize(n);
  for (StateId i = 0; i < n; ++i) {
    const auto& nb = balls[i];
    for (auto& seq : action_sequences(m, i, horizon_, options.max_sequences)) {
      FeaturePair f;
      for (StateId j : seq.reach) {
        if (!std::binary_search(nb.begin(), nb.end(), j)) continue;
        f.safety += safe_[j];
        f.progress += progress_value(j) - progress_value(i);
      }
      table_[i].push_back({std::move(seq.actions), f});
    }
  }
}

double LookaheadPolicy::progress_value(StateId i) const {
  return progress_[i] == graph::kUnreachable ? dmax_ : static_cast<double>(progress_[i]);
}

double LookaheadPolicy::sequence_score(const Vec2& theta, StateId i, std::size_t e) const {
  return std::exp(theta.dot(table_[i].at(e).features.vec()));
}

std::vector<ActionProb> LookaheadPolicy::action_distribution(const Vec2& theta, StateId i) const {
  const auto& seqs = table_[i];
  if (seqs.empty()) throw Error(fmt::format("state {} has no lookahead sequence", i));
  const auto w = sequence_weights(seqs, theta);
  std::vector<ActionProb> out;
  for (const auto& c : ssp_->model.choices(i)) out.push_back({c.action, 0.0});
  for (std::size_t e = 0; e < seqs.size(); ++e) {
    for (auto& ap : out) {
      if (ap.action == seqs[e].actions.front()) {
        ap.prob += w[e];
        break;
      }
    }
  }
  std::erase_if(out, [](const ActionProb& ap) { return ap.prob == 0.0; });
  return out;
}

double LookaheadPolicy::log_action_prob(const Vec2& theta, StateId i, ActionId u) const {
  const auto& seqs = table_[i];
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : seqs) top = std::max(top, theta.dot(s.features.vec()));
  double all = 0.0;
  double mine = 0.0;
  for (const auto& s : seqs) {
    const double x = std::exp(theta.dot(s.features.vec()) - top);
    all += x;
    if (s.actions.front() == u) mine += x;
  }
  return std::log(mine) - std::log(all);
}

Vec2 LookaheadPolicy::log_policy_gradient(const Vec2& theta, StateId i, ActionId u) const {
  const auto& seqs = table_[i];
  const auto w = sequence_weights(seqs, theta);
  Vec2 mean_all = Vec2::Zero();
  Vec2 mean_u = Vec2::Zero();
  double mass_u = 0.0;
  for (std::size_t e = 0; e < seqs.size(); ++e) {
    const Vec2 f = seqs[e].features.vec();
    mean_all += w[e] * f;
    if (seqs[e].actions.front() == u) {
      mean_u += w[e] * f;
      mass_u += w[e];
    }
  }
  if (mass_u <= 0.0) {
    throw Error(fmt::format("action {} has zero probability at state {}", u, i));
  }
  return mean_u / mass_u - mean_all;
}

ActionId LookaheadPolicy::sample_action(const Vec2& theta, StateId i, Rng& rng) const {
  const auto dist = action_distribution(theta, i);
  const double x = uniform01(rng);
  double acc = 0.0;
  for (const auto& ap : dist) {
    acc += ap.prob;
    if (x < acc) return ap.action;
  }
  return dist.back().action;
}

StationaryPolicy LookaheadPolicy::policy_table(const Vec2& theta) const {
  std::vector<std::vector<ActionProb>> table(num_states());
  for (StateId i = 0; i < num_states(); ++i) table[i] = action_distribution(theta, i);
  return StationaryPolicy(PolicyKind::Randomized, std::move(table));
}

}  // namespace ltlac
