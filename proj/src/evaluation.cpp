#include "tracegraph/evaluation.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace tracegraph {

EpisodeFeasibility check_episode_feasibility(const AdjacencyGraph& graph, const Episode& episode) {
  const auto& m = episode.members;
  std::unordered_map<UserId, std::size_t> position;
  position.reserve(m.size());
  for (std::size_t p = 0; p < m.size(); ++p) position.emplace(m[p].user, p);

  // Edges only point forward in episode order, so one sweep suffices.
  std::vector<bool> reached(m.size(), false);
  if (!m.empty()) reached[0] = true;
  for (std::size_t a = 0; a < m.size(); ++a) {
    if (!reached[a] || m[a].user >= graph.node_count()) continue;
    for (UserId v : graph.out_neighbors(m[a].user)) {
      auto it = position.find(v);
      if (it != position.end() && it->second > a) reached[it->second] = true;
    }
  }
  EpisodeFeasibility out;
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (!reached[p]) out.unreachable.push_back(m[p].user);
  }
  out.feasible = out.unreachable.empty();
  return out;
}

FeasibilityReport feasibility_rate(const AdjacencyGraph& graph, const EpisodeSet& episodes) {
  FeasibilityReport report;
  report.per_episode.reserve(episodes.size());
  std::size_t ok = 0;
  for (std::size_t s = 0; s < episodes.size(); ++s) {
    auto f = check_episode_feasibility(graph, episodes.episodes[s]);
    report.per_episode.push_back(f.feasible);
    if (f.feasible) {
      ++ok;
    } else {
      report.unexplained.emplace(s, std::move(f.unreachable));
    }
  }
  report.rate = episodes.size() ? static_cast<double>(ok) / static_cast<double>(episodes.size()) : 0.0;
  return report;
}

namespace {

std::vector<CcdfPoint> ccdf_of(std::vector<std::size_t> degrees) {
  std::vector<CcdfPoint> out;
  if (degrees.empty()) return out;
  std::sort(degrees.begin(), degrees.end());
  const double n = static_cast<double>(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (i == 0 || degrees[i] != degrees[i - 1]) {
      out.push_back({degrees[i], static_cast<double>(degrees.size() - i) / n});
    }
  }
  return out;
}

std::size_t count_nontrivial_sccs(const AdjacencyGraph& g) {
  // Iterative Tarjan.
  const std::size_t n = g.node_count();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<UserId> stack;
  std::size_t next_index = 0, count = 0;
  struct Frame {
    UserId node;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (UserId start = 0; start < n; ++start) {
    if (index[start] != kUnvisited) continue;
    call.push_back({start, 0});
    index[start] = low[start] = next_index++;
    stack.push_back(start);
    on_stack[start] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto nbrs = g.out_neighbors(f.node);
      if (f.edge < nbrs.size()) {
        const UserId v = nbrs[f.edge++];
        if (index[v] == kUnvisited) {
          index[v] = low[v] = next_index++;
          stack.push_back(v);
          on_stack[v] = true;
          call.push_back({v, 0});
        } else if (on_stack[v]) {
          low[f.node] = std::min(low[f.node], index[v]);
        }
        continue;
      }
      const UserId u = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[u]);
      if (low[u] == index[u]) {
        std::size_t size = 0;
        UserId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          ++size;
        } while (w != u);
        if (size >= 2) ++count;
      }
    }
  }
  return count;
}

std::vector<UserId> largest_weak_component(const AdjacencyGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges()) {
    const std::size_t a = find(e.src), b = find(e.dst);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> size(n, 0);
  for (std::size_t u = 0; u < n; ++u) ++size[find(u)];
  std::size_t best = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (size[r] > size[best]) best = r;  // ties keep the smallest root
  }
  std::vector<UserId> nodes;
  for (std::size_t u = 0; u < n; ++u) {
    if (find(u) == best) nodes.push_back(static_cast<UserId>(u));
  }
  return nodes;
}

}  // namespace

DegreeCcdf degree_ccdf(const AdjacencyGraph& graph) {
  std::vector<std::size_t> out(graph.node_count()), in(graph.node_count());
  for (UserId u = 0; u < graph.node_count(); ++u) {
    out[u] = graph.out_degree(u);
    in[u] = graph.in_degree(u);
  }
  return {ccdf_of(std::move(out)), ccdf_of(std::move(in))};
}

MetricsReport graph_metrics(const AdjacencyGraph& graph) {
  MetricsReport r;
  const std::size_t n = graph.node_count();
  r.node_count = n;
  r.edge_count = graph.edge_count();
  if (n == 0) return r;
  r.avg_out_degree = static_cast<double>(r.edge_count) / static_cast<double>(n);
  for (UserId u = 0; u < n; ++u) {
    r.max_out_degree = std::max(r.max_out_degree, graph.out_degree(u));
    r.max_in_degree = std::max(r.max_in_degree, graph.in_degree(u));
  }

  const auto component = largest_weak_component(graph);
  r.largest_wcc = component.size();
  std::vector<std::size_t> dist(n, static_cast<std::size_t>(-1));
  std::vector<UserId> touched;
  std::queue<UserId> frontier;
  double sum = 0.0;
  std::size_t reachable_pairs = 0;
  for (UserId s : component) {
    dist[s] = 0;
    touched.assign(1, s);
    frontier.push(s);
    while (!frontier.empty()) {
      const UserId u = frontier.front();
      frontier.pop();
      for (UserId v : graph.out_neighbors(u)) {
        if (dist[v] != static_cast<std::size_t>(-1)) continue;
        dist[v] = dist[u] + 1;
        touched.push_back(v);
        frontier.push(v);
        r.diameter = std::max(r.diameter, dist[v]);
        sum += static_cast<double>(dist[v]);
        ++reachable_pairs;
      }
    }
    for (UserId v : touched) dist[v] = static_cast<std::size_t>(-1);
  }
  r.avg_shortest_path = reachable_pairs ? sum / static_cast<double>(reachable_pairs) : 0.0;
  r.scc_count = count_nontrivial_sccs(graph);
  r.ccdf = degree_ccdf(graph);
  return r;
}

std::string metrics_json(const MetricsReport& r) {
  return nlohmann::json{{"nodes", r.node_count},
                        {"edges", r.edge_count},
                        {"avg_out_degree", r.avg_out_degree},
                        {"max_out_degree", r.max_out_degree},
                        {"max_in_degree", r.max_in_degree},
                        {"diameter", r.diameter},
                        {"avg_shortest_path", r.avg_shortest_path},
                        {"largest_wcc_nodes", r.largest_wcc},
                        {"scc_count", r.scc_count}}
      .dump(2);
}

std::string feasibility_json(const FeasibilityReport& report, const EpisodeSet& episodes, bool per_episode) {
  nlohmann::json j;
  j["episodes"] = report.per_episode.size();
  j["feasible"] = std::count(report.per_episode.begin(), report.per_episode.end(), true);
  j["rate"] = report.rate;
  nlohmann::json unexplained = nlohmann::json::object();
  for (const auto& [s, users] : report.unexplained) {
    nlohmann::json names = nlohmann::json::array();
    for (UserId u : users) names.push_back(episodes.users[u]);
    unexplained[episodes.episodes[s].pid] = names;
  }
  j["unexplained"] = unexplained;
  if (per_episode) {
    nlohmann::json flags = nlohmann::json::object();
    for (std::size_t s = 0; s < report.per_episode.size(); ++s) {
      flags[episodes.episodes[s].pid] = static_cast<bool>(report.per_episode[s]);
    }
    j["per_episode"] = flags;
  }
  return j.dump(2);
}

std::string ccdf_csv(const std::vector<CcdfPoint>& points) {
  std::ostringstream out;
  out.precision(17);
  out << "degree,fraction\n";
  for (const auto& p : points) out << p.degree << ',' << p.fraction << '\n';
  return out.str();
}

}  // namespace tracegraph
