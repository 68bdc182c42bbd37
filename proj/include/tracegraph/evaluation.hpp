#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tracegraph/graph.hpp"

namespace tracegraph {

struct EpisodeFeasibility {
  bool feasible = false;
  std::vector<UserId> unreachable;  // members with no time-respecting path from the root
};

/// Uses only edges (i, j) where i and j are both members and i comes first,
/// then checks that every member is reachable from the root.
EpisodeFeasibility check_episode_feasibility(const AdjacencyGraph& graph, const Episode& episode);

struct FeasibilityReport {
  std::vector<bool> per_episode;
  double rate = 0.0;  // feasible / S; 0 when there are no episodes
  std::map<std::size_t, std::vector<UserId>> unexplained;
};

FeasibilityReport feasibility_rate(const AdjacencyGraph& graph, const EpisodeSet& episodes);

struct CcdfPoint {
  std::size_t degree = 0;
  double fraction = 0.0;  // share of nodes with degree >= `degree`
  friend bool operator==(const CcdfPoint&, const CcdfPoint&) = default;
};

struct DegreeCcdf {
  std::vector<CcdfPoint> out;
  std::vector<CcdfPoint> in;
};

/// One point per distinct degree value present, ascending.
DegreeCcdf degree_ccdf(const AdjacencyGraph& graph);

struct MetricsReport {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double avg_out_degree = 0.0;
  std::size_t max_out_degree = 0;
  std::size_t max_in_degree = 0;
  // Directed distances inside the largest weakly connected component,
  // averaged over reachable ordered pairs only.
  std::size_t diameter = 0;
  double avg_shortest_path = 0.0;
  std::size_t largest_wcc = 0;
  std::size_t scc_count = 0;  // strongly connected components with >= 2 nodes
  DegreeCcdf ccdf;
};

MetricsReport graph_metrics(const AdjacencyGraph& graph);

std::string metrics_json(const MetricsReport& report);
std::string feasibility_json(const FeasibilityReport& report, const EpisodeSet& episodes, bool per_episode = true);
std::string ccdf_csv(const std::vector<CcdfPoint>& points);

}  // namespace tracegraph
