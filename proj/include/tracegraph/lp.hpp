#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tracegraph/constraints.hpp"

namespace tracegraph {

/// sigma_ij for every active pair, indexed by PairIndex. Values lie in [0, 1].
struct SigmaVector {
  std::vector<double> values;
};

/// max sum_k objective[k] * sigma[k] over the covering polytope of
/// `constraints`, 0 <= sigma <= 1, with `fixed` entries pinned.
struct LPProblem {
  std::vector<double> objective;
  ConstraintSet constraints;
  FixedAssignments fixed;
};

/// Penalty that makes every coefficient W - lambda nonpositive: max(W).
/// Throws std::invalid_argument for an empty W.
double compute_lambda(std::span<const double> w);

struct LpOptions {
  std::size_t threads = 1;
  double feasibility_tol = 1e-6;
};

/// Dense LP  min (primary, secondary)  s.t.  A x >= rhs, 0 <= x <= upper,
/// minimized lexicographically. A must be nonnegative so x = upper is a
/// feasible start.
struct DenseCoverLp {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // rows x cols, row-major
  std::vector<double> rhs;
  std::vector<double> upper;
  std::vector<double> primary;
  std::vector<double> secondary;
};

struct SimplexOptions {
  bool bland = false;        // smallest-index pricing from the first pivot
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 0;  // 0: derived from the problem size
};

struct SimplexResult {
  std::vector<double> x;
  std::size_t iterations = 0;
};

/// Bounded-variable primal simplex on a dense tableau. Throws SolverError
/// on an infeasible start or when the iteration cap is hit.
SimplexResult solve_dense_cover_lp(const DenseCoverLp& lp, const SimplexOptions& options = {});

/// Splits a constraint set into independent blocks once and solves the
/// sigma LP for any objective vector against it. Ties at the optimum are
/// resolved by minimum total sigma, then by the simplex's smallest-index
/// pivoting order, which follows lexicographic pair order.
class SigmaLpSolver {
 public:
  SigmaLpSolver(const ConstraintSet& constraints, FixedAssignments fixed, LpOptions options = {});

  SigmaVector solve(std::span<const double> objective) const;

  std::size_t component_count() const noexcept { return components_.size(); }
  std::size_t largest_component() const noexcept;

 private:
  struct Component {
    std::vector<PairIndex> vars;               // global indices, sorted
    std::vector<std::vector<std::size_t>> rows;  // local variable indices
    std::vector<double> rhs;
  };

  std::vector<double> solve_component(const Component& c, std::span<const double> objective) const;

  FixedAssignments fixed_;
  LpOptions options_;
  std::vector<Component> components_;
  std::vector<bool> in_component_;
};

SigmaVector solve_sigma_lp(const LPProblem& problem, const LpOptions& options = {});

/// Objective value sum_k objective[k] * sigma[k].
double lp_objective(std::span<const double> objective, const SigmaVector& sigma);

/// CPLEX LP text rendering of the problem (columns named x<PairIndex>).
std::string to_cplex_lp(const LPProblem& problem);

}  // namespace tracegraph
