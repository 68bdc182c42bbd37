#include "tracegraph/constraints.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <json.hpp>

namespace tracegraph {

std::size_t FixedAssignments::fixed_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

ConstraintSet build_constraints(const EpisodeSet& episodes, const PairStats& pairs) {
  ConstraintSet cs;
  cs.pair_count = pairs.size();
  for (std::size_t s = 0; s < episodes.episodes.size(); ++s) {
    const auto& m = episodes.episodes[s].members;
    for (std::size_t b = 1; b < m.size(); ++b) {
      Constraint c;
      c.episode = s;
      c.target = m[b].user;
      c.vars.reserve(b);
      for (std::size_t a = 0; a < b; ++a) {
        c.vars.push_back(*pairs.index_of({m[a].user, m[b].user}));
      }
      std::sort(c.vars.begin(), c.vars.end());
      cs.constraints.push_back(std::move(c));
    }
  }
  return cs;
}

SingletonReduction fix_singletons(const ConstraintSet& cs) {
  SingletonReduction out{FixedAssignments(cs.pair_count), ConstraintSet{{}, cs.pair_count}};
  for (const auto& c : cs.constraints) {
    if (c.vars.size() == 1) out.fixed.set(c.vars.front(), 1.0);
  }
  // Fixing never shrinks a constraint, so one sweep reaches the fixpoint.
  for (const auto& c : cs.constraints) {
    const bool satisfied = std::any_of(c.vars.begin(), c.vars.end(), [&](PairIndex k) { return out.fixed.is_fixed(k); });
    if (!satisfied) out.remaining.constraints.push_back(c);
  }
  return out;
}

ConstraintSet remove_dominated(const ConstraintSet& cs) {
  // Variables of constraints on different targets are disjoint, so
  // dominance only has to be checked inside each target bucket.
  std::map<UserId, std::vector<std::size_t>> buckets;
  for (std::size_t k = 0; k < cs.constraints.size(); ++k) buckets[cs.constraints[k].target].push_back(k);

  std::vector<bool> keep(cs.constraints.size(), false);
  for (auto& [target, ids] : buckets) {
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
      const auto& ca = cs.constraints[a];
      const auto& cb = cs.constraints[b];
      if (ca.vars.size() != cb.vars.size()) return ca.vars.size() < cb.vars.size();
      return ca.episode < cb.episode;
    });
    std::vector<std::size_t> kept;
    for (std::size_t id : ids) {
      const auto& v = cs.constraints[id].vars;
      const bool dominated = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
        const auto& u = cs.constraints[k].vars;
        return std::includes(v.begin(), v.end(), u.begin(), u.end());
      });
      if (!dominated) {
        kept.push_back(id);
        keep[id] = true;
      }
    }
  }
  ConstraintSet out{{}, cs.pair_count};
  for (std::size_t k = 0; k < cs.constraints.size(); ++k) {
    if (keep[k]) out.constraints.push_back(cs.constraints[k]);
  }
  std::sort(out.constraints.begin(), out.constraints.end(), [](const Constraint& a, const Constraint& b) {
    return std::tie(a.episode, a.target) < std::tie(b.episode, b.target);
  });
  return out;
}

ReducedConstraints reduce_constraints(const EpisodeSet& episodes, const PairStats& pairs) {
  ReducedConstraints r;
  r.original = build_constraints(episodes, pairs);
  auto singles = fix_singletons(r.original);
  r.fixed = std::move(singles.fixed);
  r.reduced = remove_dominated(singles.remaining);
  r.report = {r.original.size(), singles.remaining.size(), r.reduced.size()};
  return r;
}

double max_violation(const ConstraintSet& cs, const std::vector<double>& sigma) {
  double worst = 0.0;
  for (const auto& c : cs.constraints) {
    double sum = 0.0;
    for (PairIndex k : c.vars) sum += sigma[k];
    worst = std::max(worst, 1.0 - sum);
  }
  return worst;
}

std::vector<std::string> constraint_dump(const ConstraintSet& cs, const EpisodeSet& episodes,
                                         const PairStats& pairs) {
  std::vector<std::string> lines;
  lines.reserve(cs.size());
  for (const auto& c : cs.constraints) {
    nlohmann::json vars = nlohmann::json::array();
    for (PairIndex k : c.vars) {
      const auto& p = pairs.pair(k);
      vars.push_back({episodes.users[p.src], episodes.users[p.dst]});
    }
    nlohmann::json j{{"episode", episodes.episodes[c.episode].pid}, {"target", episodes.users[c.target]}, {"vars", vars}};
    lines.push_back(j.dump());
  }
  return lines;
}

std::string reduction_report_json(const ReductionReport& report) {
  return nlohmann::json{{"before", report.before},
                        {"after_singleton", report.after_singleton},
                        {"after_dominance", report.after_dominance}}
      .dump(2);
}

}  // namespace tracegraph
