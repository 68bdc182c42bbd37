#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tracegraph/episodes.hpp"

namespace tracegraph {

/// Directed graph on nodes [0, n). An edge (i, j) points in the propagation
/// direction: j follows i. Edges are sorted and unique; self-loops are
/// rejected.
class AdjacencyGraph {
 public:
  AdjacencyGraph() = default;
  AdjacencyGraph(std::size_t n, std::vector<UserPair> edges);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<UserPair>& edges() const noexcept { return edges_; }
  bool has_edge(UserPair e) const;

  std::span<const UserId> out_neighbors(UserId u) const {
    return {out_targets_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
  }
  std::size_t out_degree(UserId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(UserId u) const { return in_degree_[u]; }

 private:
  std::size_t n_ = 0;
  std::vector<UserPair> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<UserId> out_targets_;
  std::vector<std::size_t> in_degree_;
};

}  // namespace tracegraph
