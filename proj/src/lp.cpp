#include "tracegraph/lp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

class BoundedSimplex {
 public:
  BoundedSimplex(const DenseCoverLp& lp, const SimplexOptions& options)
      : lp_(lp), opt_(options), m_(lp.rows), n_(lp.cols), total_(lp.cols + lp.rows) {}

  SimplexResult run() {
    init();
    const std::size_t cap = opt_.max_iterations ? opt_.max_iterations : 200 * (m_ + n_) + 1000;
    bool bland = opt_.bland;
    std::size_t degenerate_run = 0;
    std::size_t it = 0;
    for (; it < cap; ++it) {
      const std::ptrdiff_t q = choose_entering(bland);
      if (q < 0) return {extract(), it};
      const double step = iterate(static_cast<std::size_t>(q), bland);
      degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
      if (degenerate_run > 50) bland = true;
    }
    throw SolverError("simplex iteration cap (" + std::to_string(cap) + ") reached on a " + std::to_string(m_) +
                      "x" + std::to_string(n_) + " block");
  }

 private:
  double upper(std::size_t j) const { return j < n_ ? lp_.upper[j] : kInf; }
  double& tab(std::size_t i, std::size_t j) { return t_[i * total_ + j]; }

  void init() {
    t_.assign(m_ * total_, 0.0);
    beta_.assign(m_, 0.0);
    basis_.resize(m_);
    state_.assign(total_, VarState::AtUpper);
    for (std::size_t i = 0; i < m_; ++i) {
      double row_at_upper = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const double a = lp_.a[i * n_ + j];
        tab(i, j) = -a;
        row_at_upper += a * lp_.upper[j];
      }
      tab(i, n_ + i) = 1.0;
      beta_[i] = row_at_upper - lp_.rhs[i];
      if (beta_[i] < -1e-12) {
        throw SolverError("covering LP is infeasible: row " + std::to_string(i) + " cannot reach its bound");
      }
      beta_[i] = std::max(beta_[i], 0.0);
      basis_[i] = n_ + i;
      state_[n_ + i] = VarState::Basic;
    }
    d1_.assign(total_, 0.0);
    d2_.assign(total_, 0.0);
    double scale1 = 1.0, scale2 = 1.0;
    for (std::size_t j = 0; j < n_; ++j) {
      d1_[j] = lp_.primary[j];
      d2_[j] = lp_.secondary[j];
      scale1 = std::max(scale1, std::abs(lp_.primary[j]));
      scale2 = std::max(scale2, std::abs(lp_.secondary[j]));
    }
    tol1_ = 1e-9 * scale1;
    tol2_ = 1e-9 * scale2;
  }

  // Signed improvement rate per unit step: negative means improving.
  // Returns {primary, secondary} for moving j off its current bound.
  std::pair<double, double> rate(std::size_t j) const {
    const double dir = state_[j] == VarState::AtLower ? 1.0 : -1.0;
    return {dir * d1_[j], dir * d2_[j]};
  }

  bool can_move(std::size_t j) const {
    if (state_[j] == VarState::Basic) return false;
    if (state_[j] == VarState::AtUpper && upper(j) == kInf) return false;
    return upper(j) > 0.0;
  }

  std::ptrdiff_t choose_entering(bool bland) const {
    // Primary objective first; the secondary only moves along directions
    // that leave the primary unchanged.
    std::ptrdiff_t best = -1;
    double best_rate = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      if (!can_move(j)) continue;
      const double r = rate(j).first;
      if (r < -tol1_) {
        if (bland) return static_cast<std::ptrdiff_t>(j);
        if (best < 0 || r < best_rate) {
          best = static_cast<std::ptrdiff_t>(j);
          best_rate = r;
        }
      }
    }
    if (best >= 0) return best;
    for (std::size_t j = 0; j < total_; ++j) {
      if (!can_move(j)) continue;
      const auto [r1, r2] = rate(j);
      if (std::abs(r1) <= tol1_ && r2 < -tol2_) {
        if (bland) return static_cast<std::ptrdiff_t>(j);
        if (best < 0 || r2 < best_rate) {
          best = static_cast<std::ptrdiff_t>(j);
          best_rate = r2;
        }
      }
    }
    return best;
  }

  double iterate(std::size_t q, bool bland) {
    const double dir = state_[q] == VarState::AtLower ? 1.0 : -1.0;
    double step = upper(q);  // bound flip distance
    std::ptrdiff_t leave = -1;
    bool leave_to_upper = false;
    double leave_mag = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double rate_i = -dir * t_[i * total_ + q];
      double limit;
      bool to_upper;
      if (rate_i < -opt_.pivot_tol) {
        limit = beta_[i] / -rate_i;
        to_upper = false;
      } else if (rate_i > opt_.pivot_tol && upper(basis_[i]) < kInf) {
        limit = (upper(basis_[i]) - beta_[i]) / rate_i;
        to_upper = true;
      } else {
        continue;
      }
      limit = std::max(limit, 0.0);
      const double mag = std::abs(rate_i);
      if (limit < step - 1e-12) {
        step = limit;
      } else if (leave < 0 || limit > step + 1e-12) {
        continue;  // a bound flip wins ties against rows
      } else if (bland ? basis_[i] > basis_[static_cast<std::size_t>(leave)] : mag <= leave_mag) {
        continue;
      }
      leave = static_cast<std::ptrdiff_t>(i);
      leave_to_upper = to_upper;
      leave_mag = mag;
    }
    if (step == kInf) throw SolverError("covering LP is unbounded");

    for (std::size_t i = 0; i < m_; ++i) beta_[i] += -dir * t_[i * total_ + q] * step;

    if (leave < 0) {
      state_[q] = state_[q] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
      return step;
    }

    const auto r = static_cast<std::size_t>(leave);
    const std::size_t out = basis_[r];
    state_[out] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
    const double entering_value = (dir > 0 ? 0.0 : upper(q)) + dir * step;
    state_[q] = VarState::Basic;
    basis_[r] = q;
    beta_[r] = entering_value;
    pivot(r, q);
    return step;
  }

  void pivot(std::size_t r, std::size_t q) {
    double* row_r = &t_[r * total_];
    const double inv = 1.0 / row_r[q];
    for (std::size_t j = 0; j < total_; ++j) row_r[j] *= inv;
    row_r[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row_i = &t_[i * total_];
      const double f = row_i[q];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < total_; ++j) row_i[j] -= f * row_r[j];
      row_i[q] = 0.0;
    }
    for (auto* d : {&d1_, &d2_}) {
      const double f = (*d)[q];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < total_; ++j) (*d)[j] -= f * row_r[j];
      (*d)[q] = 0.0;
    }
  }

  std::vector<double> extract() const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      x[j] = state_[j] == VarState::AtUpper ? lp_.upper[j] : 0.0;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) x[basis_[i]] = beta_[i];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      x[j] = std::clamp(x[j], 0.0, lp_.upper[j]);
      if (x[j] < 1e-11) x[j] = 0.0;
      if (lp_.upper[j] - x[j] < 1e-11) x[j] = lp_.upper[j];
    }
    return x;
  }

  const DenseCoverLp& lp_;
  SimplexOptions opt_;
  std::size_t m_, n_, total_;
  std::vector<double> t_;
  std::vector<double> beta_;
  std::vector<std::size_t> basis_;
  std::vector<VarState> state_;
  std::vector<double> d1_, d2_;
  double tol1_ = 1e-9, tol2_ = 1e-9;
};

double worst_row_violation(const DenseCoverLp& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < lp.cols; ++j) s += lp.a[i * lp.cols + j] * x[j];
    worst = std::max(worst, lp.rhs[i] - s);
  }
  return worst;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace

double compute_lambda(std::span<const double> w) {
  if (w.empty()) throw std::invalid_argument("compute_lambda: empty weight vector");
  return *std::max_element(w.begin(), w.end());
}

SimplexResult solve_dense_cover_lp(const DenseCoverLp& lp, const SimplexOptions& options) {
  for (double a : lp.a) {
    if (a < 0.0) throw std::invalid_argument("solve_dense_cover_lp: constraint matrix must be nonnegative");
  }
  return BoundedSimplex(lp, options).run();
}

SigmaLpSolver::SigmaLpSolver(const ConstraintSet& constraints, FixedAssignments fixed, LpOptions options)
    : fixed_(std::move(fixed)), options_(options), in_component_(constraints.pair_count, false) {
  if (fixed_.pair_count() != constraints.pair_count) {
    throw std::invalid_argument("SigmaLpSolver: fixed assignments sized for a different pair set");
  }
  // Substitute fixed values; drop rows they already satisfy.
  struct Row {
    std::vector<PairIndex> vars;
    double rhs;
  };
  std::vector<Row> rows;
  for (const auto& c : constraints.constraints) {
    Row row{{}, 1.0};
    for (PairIndex k : c.vars) {
      if (fixed_.is_fixed(k)) {
        row.rhs -= fixed_.value(k);
      } else {
        row.vars.push_back(k);
      }
    }
    if (row.rhs <= 0.0) continue;
    if (row.vars.empty()) {
      throw SolverError("constraint for target " + std::to_string(c.target) + " in episode " +
                        std::to_string(c.episode) + " is infeasible under the fixed assignments");
    }
    rows.push_back(std::move(row));
  }

  UnionFind uf(constraints.pair_count);
  for (const auto& row : rows) {
    for (std::size_t a = 1; a < row.vars.size(); ++a) uf.unite(row.vars[0], row.vars[a]);
  }
  std::vector<std::ptrdiff_t> comp_of_root(constraints.pair_count, -1);
  for (const auto& row : rows) {
    const std::size_t root = uf.find(row.vars[0]);
    if (comp_of_root[root] < 0) {
      comp_of_root[root] = static_cast<std::ptrdiff_t>(components_.size());
      components_.emplace_back();
    }
  }
  for (PairIndex k = 0; k < constraints.pair_count; ++k) {
    if (fixed_.is_fixed(k)) continue;
    const auto c = comp_of_root[uf.find(k)];
    if (c < 0) continue;
    components_[static_cast<std::size_t>(c)].vars.push_back(k);
    in_component_[k] = true;
  }
  for (const auto& row : rows) {
    auto& comp = components_[static_cast<std::size_t>(comp_of_root[uf.find(row.vars[0])])];
    std::vector<std::size_t> local;
    local.reserve(row.vars.size());
    for (PairIndex k : row.vars) {
      local.push_back(static_cast<std::size_t>(std::lower_bound(comp.vars.begin(), comp.vars.end(), k) - comp.vars.begin()));
    }
    comp.rows.push_back(std::move(local));
    comp.rhs.push_back(row.rhs);
  }
}

std::size_t SigmaLpSolver::largest_component() const noexcept {
  std::size_t best = 0;
  for (const auto& c : components_) best = std::max(best, c.vars.size());
  return best;
}

std::vector<double> SigmaLpSolver::solve_component(const Component& c, std::span<const double> objective) const {
  DenseCoverLp lp;
  lp.rows = c.rows.size();
  lp.cols = c.vars.size();
  lp.a.assign(lp.rows * lp.cols, 0.0);
  for (std::size_t i = 0; i < lp.rows; ++i) {
    for (std::size_t j : c.rows[i]) lp.a[i * lp.cols + j] = 1.0;
  }
  lp.rhs = c.rhs;
  lp.upper.assign(lp.cols, 1.0);
  lp.primary.resize(lp.cols);
  lp.secondary.assign(lp.cols, 1.0);
  for (std::size_t j = 0; j < lp.cols; ++j) lp.primary[j] = -objective[c.vars[j]];

  auto x = solve_dense_cover_lp(lp).x;
  if (worst_row_violation(lp, x) > options_.feasibility_tol * 1e-3) {
    SimplexOptions strict;
    strict.bland = true;
    strict.pivot_tol = 1e-11;
    x = solve_dense_cover_lp(lp, strict).x;
    const double v = worst_row_violation(lp, x);
    if (v > options_.feasibility_tol) {
      throw SolverError("sigma LP block of " + std::to_string(lp.cols) + " variables violates a constraint by " +
                        std::to_string(v) + " after re-solve");
    }
  }
  return x;
}

SigmaVector SigmaLpSolver::solve(std::span<const double> objective) const {
  if (objective.size() != in_component_.size()) {
    throw std::invalid_argument("SigmaLpSolver::solve: objective has the wrong length");
  }
  SigmaVector sigma{std::vector<double>(objective.size(), 0.0)};
  for (PairIndex k = 0; k < objective.size(); ++k) {
    if (fixed_.is_fixed(k)) {
      sigma.values[k] = fixed_.value(k);
    } else if (!in_component_[k]) {
      // Unconstrained: ties at zero go to 0 under the minimum-sum rule.
      sigma.values[k] = objective[k] > 0.0 ? 1.0 : 0.0;
    }
  }

  std::vector<std::vector<double>> results(components_.size());
  const std::size_t threads = std::max<std::size_t>(1, std::min(options_.threads, components_.size()));
  if (threads == 1) {
    for (std::size_t c = 0; c < components_.size(); ++c) results[c] = solve_component(components_[c], objective);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t c = next++; c < components_.size(); c = next++) {
              results[c] = solve_component(components_[c], objective);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& vars = components_[c].vars;
    for (std::size_t j = 0; j < vars.size(); ++j) sigma.values[vars[j]] = results[c][j];
  }
  return sigma;
}

SigmaVector solve_sigma_lp(const LPProblem& problem, const LpOptions& options) {
  return SigmaLpSolver(problem.constraints, problem.fixed, options).solve(problem.objective);
}

double lp_objective(std::span<const double> objective, const SigmaVector& sigma) {
  double total = 0.0;
  for (std::size_t k = 0; k < objective.size(); ++k) total += objective[k] * sigma.values[k];
  return total;
}

std::string to_cplex_lp(const LPProblem& problem) {
  std::ostringstream out;
  out.precision(17);
  out << "\\ sigma covering LP\nMaximize\n obj:";
  bool any = false;
  for (std::size_t k = 0; k < problem.objective.size(); ++k) {
    const double c = problem.objective[k];
    if (k > 0 && k % 8 == 0) out << "\n   ";
    out << (c < 0 ? " - " : " + ") << std::abs(c) << " x" << k;
    any = true;
  }
  if (!any) out << " 0 x0";
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < problem.constraints.constraints.size(); ++r) {
    const auto& c = problem.constraints.constraints[r];
    out << " c" << r << ":";
    for (std::size_t a = 0; a < c.vars.size(); ++a) {
      if (a > 0 && a % 16 == 0) out << "\n   ";
      out << (a ? " + x" : " x") << c.vars[a];
    }
    out << " >= 1\n";
  }
  out << "Bounds\n";
  for (std::size_t k = 0; k < problem.objective.size(); ++k) {
    if (problem.fixed.pair_count() == problem.objective.size() && problem.fixed.is_fixed(static_cast<PairIndex>(k))) {
      out << " x" << k << " = " << problem.fixed.value(static_cast<PairIndex>(k)) << "\n";
    } else {
      out << " 0 <= x" << k << " <= 1\n";
    }
  }
  out << "End\n";
  return out.str();
}

}  // namespace tracegraph
