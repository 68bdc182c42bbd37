#include "tracegraph/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tracegraph {

AdjacencyGraph infer_star(const EpisodeSet& episodes) {
  std::vector<UserPair> edges;
  for (const auto& e : episodes.episodes) {
    for (std::size_t b = 1; b < e.size(); ++b) edges.push_back({e.root(), e.members[b].user});
  }
  return AdjacencyGraph(episodes.user_count(), std::move(edges));
}

AdjacencyGraph infer_chain(const EpisodeSet& episodes) {
  std::vector<UserPair> edges;
  for (const auto& e : episodes.episodes) {
    for (std::size_t b = 1; b < e.size(); ++b) edges.push_back({e.members[b - 1].user, e.members[b].user});
  }
  return AdjacencyGraph(episodes.user_count(), std::move(edges));
}

std::vector<std::uint32_t> compute_direct_counts(const EpisodeSet& episodes, const PairStats& m) {
  std::vector<std::uint32_t> direct(m.size(), 0);
  for (const auto& e : episodes.episodes) {
    for (std::size_t b = 1; b < e.size(); ++b) ++direct[*m.index_of({e.root(), e.members[b].user})];
  }
  return direct;
}

NewmanResult infer_newman_vanilla(const PairStats& m, const std::vector<std::uint32_t>& direct,
                                  std::size_t user_count, const EMConfig& config, double threshold) {
  if (direct.size() != m.size()) throw std::invalid_argument("direct counts do not match the pair count");
  SigmaVector sigma{std::vector<double>(m.size())};
  for (PairIndex k = 0; k < m.size(); ++k) {
    if (direct[k] > m.count(k)) throw std::invalid_argument("direct count exceeds co-occurrence count");
    sigma.values[k] = static_cast<double>(direct[k]) / m.count(k);
  }
  NewmanResult out;
  out.em = run_em_fixed_sigma(m, sigma, user_count, config);
  out.graph = threshold_graph(out.em.q, m, user_count, threshold);
  return out;
}

SaitoResult infer_saito(const EpisodeSet& episodes, const PairStats& m, const SaitoConfig& config, double threshold) {
  if (!(config.epsilon > 0.0) || config.max_iterations < 1) throw std::invalid_argument("invalid SaitoConfig");
  // Candidate activators of each (episode, non-root member).
  const ConstraintSet candidates = build_constraints(episodes, m);

  // Failed activation chances: episodes containing i but not j. Episodes
  // holding both contribute to M_ij or M_ji.
  std::vector<std::uint32_t> appearances(episodes.user_count(), 0);
  for (const auto& e : episodes.episodes) {
    for (const auto& member : e.members) ++appearances[member.user];
  }
  std::vector<double> trials(m.size());
  for (PairIndex k = 0; k < m.size(); ++k) {
    const auto& p = m.pair(k);
    trials[k] = static_cast<double>(appearances[p.src] - m.count(k) - m.count_of({p.dst, p.src})) + m.count(k);
  }

  SaitoResult out;
  out.k.values.assign(m.size(), std::clamp(config.k_init, config.k_floor, 1.0));
  std::vector<double> acc(m.size());
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& c : candidates.constraints) {
      double miss = 1.0;
      for (PairIndex k : c.vars) miss *= 1.0 - out.k.values[k];
      const double p = 1.0 - miss;
      for (PairIndex k : c.vars) acc[k] += out.k.values[k] / p;
    }
    double delta = 0.0;
    for (PairIndex k = 0; k < m.size(); ++k) {
      const double next = std::clamp(acc[k] / trials[k], config.k_floor, 1.0);
      delta += (next - out.k.values[k]) * (next - out.k.values[k]);
      out.k.values[k] = next;
    }
    out.iterations = it;
    if (std::sqrt(delta) < config.epsilon) {
      out.converged = true;
      break;
    }
  }

  std::vector<UserPair> edges;
  for (PairIndex k = 0; k < m.size(); ++k) {
    if (out.k.values[k] > threshold) edges.push_back(m.pair(k));
  }
  out.graph = AdjacencyGraph(episodes.user_count(), std::move(edges));
  return out;
}

}  // namespace tracegraph
