#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tracegraph/trace.hpp"

namespace tracegraph {

struct EpisodeMember {
  UserId user = 0;
  Timestamp t = 0;
  friend bool operator==(const EpisodeMember&, const EpisodeMember&) = default;
};

/// The author of an original post followed by everyone who reposted it, in
/// chronological order. members.front() is always the root.
struct Episode {
  std::string pid;
  std::vector<EpisodeMember> members;

  UserId root() const { return members.front().user; }
  std::size_t size() const noexcept { return members.size(); }
};

struct EpisodeSet {
  std::vector<Episode> episodes;
  std::vector<std::string> users;  // dense UserId -> uid

  std::size_t user_count() const noexcept { return users.size(); }
  std::size_t size() const noexcept { return episodes.size(); }
};

/// Throws ValidationError for a repost that precedes its original, a repost
/// of an unknown pid or a user appearing twice in one episode.
EpisodeSet build_episodes(const Trace& trace);

/// Ordered user pair (src precedes dst); the propagation direction src -> dst.
struct UserPair {
  UserId src = 0;
  UserId dst = 0;
  friend auto operator<=>(const UserPair&, const UserPair&) = default;
};

using PairIndex = std::uint32_t;

/// Sparse episode co-occurrence counts: count(i, j) is the number of
/// episodes in which i appears before j. Only positive counts are stored;
/// pairs are kept in lexicographic order and PairIndex refers to that order.
class PairStats {
 public:
  PairStats() = default;
  PairStats(std::vector<UserPair> pairs, std::vector<std::uint32_t> counts);

  std::size_t size() const noexcept { return pairs_.size(); }  // L
  bool empty() const noexcept { return pairs_.empty(); }
  const std::vector<UserPair>& pairs() const noexcept { return pairs_; }
  const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }
  const UserPair& pair(PairIndex k) const { return pairs_[k]; }
  std::uint32_t count(PairIndex k) const { return counts_[k]; }

  std::optional<PairIndex> index_of(UserPair p) const;
  std::uint32_t count_of(UserPair p) const;

 private:
  static std::uint64_t key(UserPair p) { return (std::uint64_t{p.src} << 32) | p.dst; }

  std::vector<UserPair> pairs_;
  std::vector<std::uint32_t> counts_;
  std::unordered_map<std::uint64_t, PairIndex> index_;
};

PairStats count_ordered_pairs(const EpisodeSet& episodes);

}  // namespace tracegraph
