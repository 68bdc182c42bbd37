#include "tracegraph/episodes.hpp"

#include <algorithm>
#include <unordered_set>

#include "tracegraph/error.hpp"

namespace tracegraph {

EpisodeSet build_episodes(const Trace& trace) {
  EpisodeSet set;
  set.users = trace.users();

  std::unordered_map<std::string_view, std::size_t> episode_of;
  for (const auto& r : trace.records()) {
    if (!r.is_original()) continue;
    episode_of.emplace(r.pid, set.episodes.size());
    Episode e;
    e.pid = r.pid;
    e.members.push_back({*trace.user_id(r.uid), r.t});
    set.episodes.push_back(std::move(e));
  }

  std::vector<std::unordered_set<UserId>> present(set.episodes.size());
  for (std::size_t s = 0; s < set.episodes.size(); ++s) present[s].insert(set.episodes[s].root());

  for (const auto& r : trace.records()) {
    if (r.is_original()) continue;
    auto it = episode_of.find(*r.rid);
    if (it == episode_of.end()) {
      throw ValidationError("repost '" + r.pid + "' references unknown original '" + *r.rid + "'");
    }
    // equal timestamps are allowed; the root stays first regardless of log order
    if (r.t < set.episodes[it->second].members.front().t) {
      throw ValidationError("repost '" + r.pid + "' precedes its original '" + *r.rid + "'");
    }
    const UserId u = *trace.user_id(r.uid);
    Episode& e = set.episodes[it->second];
    if (!present[it->second].insert(u).second) {
      throw ValidationError("user '" + r.uid + "' appears twice in episode '" + e.pid + "' (repost '" + r.pid + "')");
    }
    e.members.push_back({u, r.t});
  }
  return set;
}

PairStats::PairStats(std::vector<UserPair> pairs, std::vector<std::uint32_t> counts)
    : pairs_(std::move(pairs)), counts_(std::move(counts)) {
  index_.reserve(pairs_.size());
  for (PairIndex k = 0; k < pairs_.size(); ++k) index_.emplace(key(pairs_[k]), k);
}

std::optional<PairIndex> PairStats::index_of(UserPair p) const {
  auto it = index_.find(key(p));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t PairStats::count_of(UserPair p) const {
  auto k = index_of(p);
  return k ? counts_[*k] : 0;
}

PairStats count_ordered_pairs(const EpisodeSet& episodes) {
  std::unordered_map<std::uint64_t, std::uint32_t> acc;
  for (const auto& e : episodes.episodes) {
    const auto& m = e.members;
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        ++acc[(std::uint64_t{m[a].user} << 32) | m[b].user];
      }
    }
  }
  std::vector<std::pair<UserPair, std::uint32_t>> entries;
  entries.reserve(acc.size());
  for (const auto& [k, c] : acc) {
    entries.push_back({UserPair{static_cast<UserId>(k >> 32), static_cast<UserId>(k & 0xffffffffu)}, c});
  }
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<UserPair> pairs;
  std::vector<std::uint32_t> counts;
  pairs.reserve(entries.size());
  counts.reserve(entries.size());
  for (const auto& [p, c] : entries) {
    pairs.push_back(p);
    counts.push_back(c);
  }
  return PairStats(std::move(pairs), std::move(counts));
}

}  // namespace tracegraph
