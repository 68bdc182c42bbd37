#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "tracegraph/graph.hpp"
#include "tracegraph/trace.hpp"

namespace tracegraph {

struct SynthConfig {
  std::size_t n = 200;
  double edge_density = 0.02;
  std::size_t cascades = 500;
  double activation_prob = 0.3;
  std::size_t max_steps = 4;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Name of synthetic node i in generated traces ("u<i>").
std::string synth_user_name(std::size_t node);

/// Erdos-Renyi digraph: every ordered pair independently with edge_density.
AdjacencyGraph generate_graph(const SynthConfig& config);

/// SI cascades over `graph`. Each cascade starts at a uniformly drawn root
/// at step 0; at every later step each node infected in an earlier step
/// infects each still-susceptible out-neighbour with activation_prob. A
/// cascade ends after max_steps or once no infected node has a susceptible
/// out-neighbour. Infections within a step are emitted in node order with
/// strictly increasing timestamps.
Trace generate_trace(const AdjacencyGraph& graph, const SynthConfig& config);

}  // namespace tracegraph
