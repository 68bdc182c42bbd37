#include "tracegraph/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tracegraph {

AdjacencyGraph::AdjacencyGraph(std::size_t n, std::vector<UserPair> edges) : n_(n), edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  out_offsets_.assign(n_ + 1, 0);
  in_degree_.assign(n_, 0);
  for (const auto& e : edges_) {
    if (e.src >= n_ || e.dst >= n_) {
      throw std::out_of_range("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ") outside a " +
                              std::to_string(n_) + "-node graph");
    }
    if (e.src == e.dst) throw std::invalid_argument("self-loop on node " + std::to_string(e.src));
    ++out_offsets_[e.src + 1];
    ++in_degree_[e.dst];
  }
  for (std::size_t u = 0; u < n_; ++u) out_offsets_[u + 1] += out_offsets_[u];
  out_targets_.reserve(edges_.size());
  for (const auto& e : edges_) out_targets_.push_back(e.dst);  // edges are sorted by src
}

bool AdjacencyGraph::has_edge(UserPair e) const {
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

}  // namespace tracegraph
