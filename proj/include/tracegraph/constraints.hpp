#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tracegraph/episodes.hpp"

namespace tracegraph {

/// Covering constraint sum_{i before j in episode} sigma_ij >= 1 for one
/// non-root member j of one episode. `vars` is sorted by PairIndex.
struct Constraint {
  std::size_t episode = 0;
  UserId target = 0;
  std::vector<PairIndex> vars;
};

struct ConstraintSet {
  std::vector<Constraint> constraints;
  std::size_t pair_count = 0;  // number of LP columns (active pairs)

  std::size_t size() const noexcept { return constraints.size(); }
};

/// Per-pair sigma values decided before the LP. Unset entries are free.
class FixedAssignments {
 public:
  FixedAssignments() = default;
  explicit FixedAssignments(std::size_t pair_count) : values_(pair_count) {}

  std::size_t pair_count() const noexcept { return values_.size(); }
  bool is_fixed(PairIndex k) const { return values_[k].has_value(); }
  double value(PairIndex k) const { return *values_[k]; }
  const std::optional<double>& get(PairIndex k) const { return values_[k]; }
  void set(PairIndex k, double v) { values_[k] = v; }
  std::size_t fixed_count() const;

 private:
  std::vector<std::optional<double>> values_;
};

/// One constraint per (episode, non-root member); exactly T - S of them.
ConstraintSet build_constraints(const EpisodeSet& episodes, const PairStats& pairs);

struct SingletonReduction {
  FixedAssignments fixed;
  ConstraintSet remaining;
};

/// Fixes sigma = 1 for every single-variable constraint and drops every
/// constraint that one of those fixed variables already satisfies.
SingletonReduction fix_singletons(const ConstraintSet& cs);

/// Drops every constraint whose variable set contains another constraint's
/// variable set. Among identical sets the first in (episode, target) order
/// survives. The result is subset-minimal and does not depend on input order.
ConstraintSet remove_dominated(const ConstraintSet& cs);

struct ReductionReport {
  std::size_t before = 0;
  std::size_t after_singleton = 0;
  std::size_t after_dominance = 0;
};

struct ReducedConstraints {
  ConstraintSet original;
  ConstraintSet reduced;
  FixedAssignments fixed;
  ReductionReport report;
};

ReducedConstraints reduce_constraints(const EpisodeSet& episodes, const PairStats& pairs);

/// Largest violation of any constraint (0 when all hold) for a sigma vector
/// indexed by PairIndex.
double max_violation(const ConstraintSet& cs, const std::vector<double>& sigma);

/// JSON lines {episode, target, vars:[[i,j],...]} using user names.
std::vector<std::string> constraint_dump(const ConstraintSet& cs, const EpisodeSet& episodes,
                                         const PairStats& pairs);

std::string reduction_report_json(const ReductionReport& report);

}  // namespace tracegraph
