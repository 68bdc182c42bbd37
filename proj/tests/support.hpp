#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracegraph/constraints.hpp"
#include "tracegraph/episodes.hpp"
#include "tracegraph/trace.hpp"

namespace tracegraph::test {

using Members = std::vector<std::string>;

/// Trace with one original per entry of `episodes` (authored by the first
/// member) followed by its reposts. Timestamps increase globally, so the
/// member order is the chronological order.
inline Trace make_trace(const std::vector<Members>& episodes) {
  std::vector<PostRecord> records;
  Timestamp t = 0;
  for (std::size_t s = 0; s < episodes.size(); ++s) {
    const std::string pid = "s" + std::to_string(s);
    for (std::size_t k = 0; k < episodes[s].size(); ++k) {
      PostRecord r{k == 0 ? pid : pid + "r" + std::to_string(k), ++t, episodes[s][k], std::nullopt};
      if (k > 0) r.rid = pid;
      records.push_back(std::move(r));
    }
  }
  return Trace::from_records(std::move(records));
}

/// EpisodeSet built directly, including one-member episodes that the
/// preprocessing step would drop.
inline EpisodeSet make_episodes(const std::vector<Members>& episodes) {
  EpisodeSet set;
  std::map<std::string, UserId> index;
  auto id = [&](const std::string& name) {
    auto [it, inserted] = index.try_emplace(name, static_cast<UserId>(set.users.size()));
    if (inserted) set.users.push_back(name);
    return it->second;
  };
  Timestamp t = 0;
  for (std::size_t s = 0; s < episodes.size(); ++s) {
    Episode e{"s" + std::to_string(s), {}};
    for (const auto& name : episodes[s]) e.members.push_back({id(name), ++t});
    set.episodes.push_back(std::move(e));
  }
  return set;
}

inline UserId uid(const EpisodeSet& set, const std::string& name) {
  for (std::size_t k = 0; k < set.users.size(); ++k) {
    if (set.users[k] == name) return static_cast<UserId>(k);
  }
  throw std::out_of_range("unknown user " + name);
}

inline UserPair upair(const EpisodeSet& set, const std::string& a, const std::string& b) {
  return {uid(set, a), uid(set, b)};
}

/// Constraint variable sets rendered with user names, e.g. {"a>b", "c>b"}.
inline std::vector<std::vector<std::string>> named_vars(const ConstraintSet& cs, const EpisodeSet& set,
                                                        const PairStats& pairs) {
  std::vector<std::vector<std::string>> out;
  for (const auto& c : cs.constraints) {
    std::vector<std::string> vars;
    for (PairIndex k : c.vars) vars.push_back(set.users[pairs.pair(k).src] + ">" + set.users[pairs.pair(k).dst]);
    out.push_back(std::move(vars));
  }
  return out;
}

}  // namespace tracegraph::test
