#pragma once

#include <cstdint>
#include <vector>

#include "tracegraph/em.hpp"

namespace tracegraph {

/// Edge from each episode's root to every other member.
AdjacencyGraph infer_star(const EpisodeSet& episodes);

/// Edge between chronologically consecutive members of each episode.
AdjacencyGraph infer_chain(const EpisodeSet& episodes);

/// count[k] = number of episodes rooted at pair(k).src that contain
/// pair(k).dst, i.e. reposts attributable to the original author.
std::vector<std::uint32_t> compute_direct_counts(const EpisodeSet& episodes, const PairStats& m);

struct NewmanResult {
  EMResult em;
  AdjacencyGraph graph;
};

/// Newman's EM without feasibility constraints: sigma_ij is pinned to
/// direct[k] / M_ij and never re-optimized.
NewmanResult infer_newman_vanilla(const PairStats& m, const std::vector<std::uint32_t>& direct,
                                  std::size_t user_count, const EMConfig& config, double threshold = 0.5);

/// Influence probabilities k_ij of the independent cascade model on active pairs.
struct InfluenceMatrix {
  std::vector<double> values;  // indexed by PairIndex
};

struct SaitoConfig {
  double epsilon = 1e-3;
  std::size_t max_iterations = 500;
  double k_floor = 1e-6;
  double k_init = 0.5;
};

struct SaitoResult {
  InfluenceMatrix k;
  AdjacencyGraph graph;
  std::size_t iterations = 0;
  bool converged = false;
};

/// IC-model EM over the time-ordered episodes, with the active pairs as the
/// given graph. Every earlier member of an episode is a candidate activator
/// of a later one:
///   P_j^s = 1 - prod_{i before j} (1 - k_ij),  gamma_ij^s = k_ij / P_j^s,
///   k_ij <- sum_s gamma_ij^s / (M_ij + F_ij),
/// where F_ij counts episodes that contain i but never reach j (failed
/// activations). Iterated until the L2 change of k drops below epsilon.
SaitoResult infer_saito(const EpisodeSet& episodes, const PairStats& m, const SaitoConfig& config = {},
                        double threshold = 0.5);

}  // namespace tracegraph
