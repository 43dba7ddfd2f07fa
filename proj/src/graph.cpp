#include "ltlac/graph.hpp"

#include <algorithm>
#include <deque>

namespace ltlac::graph {

Adjacency successor_graph(const LabeledModel& m) {
  Adjacency adj(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) {
    auto& out = adj[s];
    for (const auto& c : m.choices(s)) {
      for (const auto& e : c.edges) out.push_back(e.target);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return adj;
}

Adjacency reversed(const Adjacency& adj) {
  Adjacency rev(adj.size());
  for (StateId s = 0; s < adj.size(); ++s) {
    for (StateId t : adj[s]) rev[t].push_back(s);
  }
  return rev;
}

std::vector<std::uint32_t> scc_ids(const Adjacency& adj, std::span<const char> alive,
                                   std::size_t* count) {
  // Iterative Tarjan.
  const std::size_t n = adj.size();
  auto is_alive = [&](StateId s) { return alive.empty() || alive[s]; };
  std::vector<std::uint32_t> comp(n, kUnreachable);
  std::vector<std::uint32_t> index(n, kUnreachable);
  std::vector<std::uint32_t> low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<StateId> stack;
  struct Frame {
    StateId node;
    std::size_t next;
  };
  std::vector<Frame> call;
  std::uint32_t counter = 0;
  std::uint32_t ncomp = 0;

  for (StateId root = 0; root < n; ++root) {
    if (!is_alive(root) || index[root] != kUnreachable) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& f = call.back();
      const StateId v = f.node;
      if (f.next < adj[v].size()) {
        const StateId w = adj[v][f.next++];
        if (!is_alive(w)) continue;
        if (index[w] == kUnreachable) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        StateId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      call.pop_back();
      if (!call.empty()) {
        const StateId parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  if (count) *count = ncomp;
  return comp;
}

std::vector<std::uint32_t> bfs_distances(const Adjacency& adj, std::span<const StateId> sources) {
  std::vector<std::uint32_t> dist(adj.size(), kUnreachable);
  std::deque<StateId> queue;
  for (StateId s : sources) {
    if (dist[s] == kUnreachable) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const StateId v = queue.front();
    queue.pop_front();
    for (StateId w : adj[v]) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::vector<char> can_reach(const Adjacency& adj, std::span<const char> targets) {
  const auto rev = reversed(adj);
  std::vector<StateId> sources;
  for (StateId s = 0; s < targets.size(); ++s) {
    if (targets[s]) sources.push_back(s);
  }
  const auto dist = bfs_distances(rev, sources);
  std::vector<char> out(adj.size(), 0);
  for (std::size_t s = 0; s < adj.size(); ++s) out[s] = dist[s] != kUnreachable;
  return out;
}

}  // namespace ltlac::graph
