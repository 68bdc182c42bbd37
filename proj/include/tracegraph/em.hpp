#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tracegraph/constraints.hpp"
#include "tracegraph/graph.hpp"
#include "tracegraph/lp.hpp"

namespace tracegraph {

/// Global model parameters: alpha and beta are the propagation rates through
/// existing and non-existing edges, rho the prior edge density.
struct EMParams {
  double alpha = 0.5;
  double beta = 0.5;
  double rho = 0.5;
  friend bool operator==(const EMParams&, const EMParams&) = default;
};

inline constexpr double kParamFloor = 1e-9;

/// Clamps into [1e-9, 1 - 1e-9].
double clamp_param(double x);

/// Posterior edge probabilities for active pairs (indexed by PairIndex).
/// Every inactive pair carries `implicit`, the prior rho.
struct QMatrix {
  std::vector<double> values;
  double implicit = 0.0;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double l2_delta = 0.0;
  double bound = 0.0;         // expected log-posterior bound at the E-step
  double lp_objective = 0.0;  // sum sigma (W - lambda) after the M-step
  double lambda = 0.0;
  EMParams params;            // parameters entering the iteration
};

/// Read-only view handed to EMConfig::observer after every M-step.
struct IterationSnapshot {
  std::size_t iteration;
  const SigmaVector& sigma;
  const QMatrix& q;
  const EMParams& params;
};

struct EMConfig {
  double epsilon = 1e-3;
  std::size_t max_iterations = 500;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::optional<EMParams> initial;  // overrides the seeded draw
  std::function<void(const IterationSnapshot&)> observer;
};

struct EMResult {
  EMParams params;
  SigmaVector sigma;
  QMatrix q;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  std::vector<std::string> warnings;
};

/// Posterior Q_ij given sigma and parameters, evaluated in log space.
/// Pairs with count 0 get exactly rho. Throws std::domain_error when alpha
/// or beta lies outside (0, 1).
QMatrix compute_q(const PairStats& m, const SigmaVector& sigma, const EMParams& params);

/// LP weights W_ij = M_ij (Q_ij logit(alpha) + (1 - Q_ij) logit(beta)).
std::vector<double> compute_w(const PairStats& m, const QMatrix& q, const EMParams& params);

/// Raw closed-form updates; std::nullopt when the denominator vanishes.
std::optional<double> alpha_ratio(const PairStats& m, const SigmaVector& sigma, const QMatrix& q);
std::optional<double> beta_ratio(const PairStats& m, const SigmaVector& sigma, const QMatrix& q);
double rho_ratio(const QMatrix& q, std::size_t user_count);

/// Clamped updates; fall back to `previous` on a zero denominator.
double update_alpha(const PairStats& m, const SigmaVector& sigma, const QMatrix& q, double previous);
double update_beta(const PairStats& m, const SigmaVector& sigma, const QMatrix& q, double previous);
double update_rho(const QMatrix& q, std::size_t user_count);

/// Right-hand side of the Jensen bound for the factorized q(A), dropping
/// the constant log Gamma.
double expected_log_posterior_bound(const PairStats& m, const SigmaVector& sigma, const QMatrix& q,
                                    const EMParams& params, std::size_t user_count);

/// Seeded initial parameters, each uniform on (0, 1), ordered alpha > beta.
EMParams initial_params(std::uint64_t seed);

/// Constrained EM: alternates the closed-form E-step with the sigma LP and
/// parameter updates until the L2 change of the active-pair Q vector falls
/// below config.epsilon.
EMResult run_em(const EpisodeSet& episodes, const PairStats& m, const ConstraintSet& reduced,
                const FixedAssignments& fixed, const EMConfig& config);

/// The same loop with sigma held at `sigma` throughout (no LP step).
EMResult run_em_fixed_sigma(const PairStats& m, const SigmaVector& sigma, std::size_t user_count,
                            const EMConfig& config);

/// Active pairs with Q_ij strictly above `threshold`.
AdjacencyGraph threshold_graph(const QMatrix& q, const PairStats& m, std::size_t user_count, double threshold = 0.5);

}  // namespace tracegraph
