#include "tracegraph/synth.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace tracegraph {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }  // [0, 1)
  bool bernoulli(double p) { return unit() < p; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(unit() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

void SynthConfig::validate() const {
  if (n < 2) throw std::invalid_argument("synth: n must be at least 2");
  if (!(edge_density >= 0.0 && edge_density <= 1.0)) throw std::invalid_argument("synth: edge density must lie in [0, 1]");
  if (!(activation_prob >= 0.0 && activation_prob <= 1.0)) {
    throw std::invalid_argument("synth: activation probability must lie in [0, 1]");
  }
  if (cascades < 1) throw std::invalid_argument("synth: at least one cascade is required");
  const double span = (static_cast<double>(max_steps) + 1.0) * (static_cast<double>(n) + 1.0);
  if (span * static_cast<double>(cascades) > 0.5 * static_cast<double>(std::numeric_limits<Timestamp>::max())) {
    throw std::invalid_argument("synth: timestamps would overflow");
  }
}

std::string synth_user_name(std::size_t node) { return "u" + std::to_string(node); }

AdjacencyGraph generate_graph(const SynthConfig& config) {
  config.validate();
  Rng rng(splitmix64(config.seed));
  std::vector<UserPair> edges;
  for (std::size_t i = 0; i < config.n; ++i) {
    for (std::size_t j = 0; j < config.n; ++j) {
      if (i == j) continue;
      if (rng.bernoulli(config.edge_density)) edges.push_back({static_cast<UserId>(i), static_cast<UserId>(j)});
    }
  }
  return AdjacencyGraph(config.n, std::move(edges));
}

Trace generate_trace(const AdjacencyGraph& graph, const SynthConfig& config) {
  config.validate();
  if (graph.node_count() != config.n) throw std::invalid_argument("synth: graph size differs from config.n");
  const std::size_t n = config.n;
  const auto step_width = static_cast<Timestamp>(n + 1);
  const auto span = static_cast<Timestamp>(config.max_steps + 1) * step_width;

  std::vector<PostRecord> records;
  std::vector<bool> infected(n);
  std::vector<UserId> active;    // infected before the current step
  std::vector<bool> fresh(n);
  std::vector<UserId> newly;
  for (std::size_t c = 0; c < config.cascades; ++c) {
    Rng rng(splitmix64(config.seed ^ splitmix64(c + 1)));
    const Timestamp base = static_cast<Timestamp>(c) * span;
    const std::string pid = "c" + std::to_string(c);
    const auto root = static_cast<UserId>(rng.below(n));
    records.push_back({pid, base, synth_user_name(root), std::nullopt});

    std::fill(infected.begin(), infected.end(), false);
    infected[root] = true;
    active.assign(1, root);
    std::size_t reposts = 0;
    for (std::size_t step = 1; step <= config.max_steps && config.activation_prob > 0.0; ++step) {
      bool susceptible_left = false;
      for (UserId i : active) {
        for (UserId j : graph.out_neighbors(i)) {
          if (!infected[j]) susceptible_left = true;
        }
      }
      if (!susceptible_left) break;

      newly.clear();
      for (UserId i : active) {  // kept in node order
        for (UserId j : graph.out_neighbors(i)) {
          if (infected[j] || fresh[j]) continue;
          if (rng.bernoulli(config.activation_prob)) {
            fresh[j] = true;
            newly.push_back(j);
          }
        }
      }
      std::sort(newly.begin(), newly.end());
      for (std::size_t rank = 0; rank < newly.size(); ++rank) {
        const UserId j = newly[rank];
        fresh[j] = false;
        infected[j] = true;
        const Timestamp t = base + static_cast<Timestamp>(step) * step_width + static_cast<Timestamp>(rank);
        records.push_back({pid + "r" + std::to_string(reposts++), t, synth_user_name(j), pid});
      }
      active.insert(active.end(), newly.begin(), newly.end());
      std::sort(active.begin(), active.end());
    }
  }
  return Trace::from_records(std::move(records));
}

}  // namespace tracegraph
