#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ltlac/model.hpp"

namespace ltlac::graph {

using Adjacency = std::vector<std::vector<StateId>>;

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

/// Union of possible successors over all enabled actions, deduplicated.
Adjacency successor_graph(const LabeledModel& m);
Adjacency reversed(const Adjacency& adj);

/// Strongly connected components of the subgraph induced by `alive`
/// (empty span = every node alive). Dead nodes get kUnreachable.
std::vector<std::uint32_t> scc_ids(const Adjacency& adj, std::span<const char> alive,
                                   std::size_t* count = nullptr);

/// Multi-source BFS hop counts; kUnreachable where no path exists.
std::vector<std::uint32_t> bfs_distances(const Adjacency& adj, std::span<const StateId> sources);

/// Nodes from which some path reaches a node flagged in `targets`.
std::vector<char> can_reach(const Adjacency& adj, std::span<const char> targets);

}  // namespace ltlac::graph
