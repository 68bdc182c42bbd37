#include "tracegraph/em.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tracegraph {

namespace {

void require_open_unit(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error(std::string(name) + " must lie strictly inside (0, 1), got " + std::to_string(x));
  }
}

void require_sizes(const PairStats& m, std::size_t n, const char* what) {
  if (n != m.size()) throw std::invalid_argument(std::string(what) + " does not match the pair count");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double logit(double p) { return std::log(p) - std::log1p(-p); }

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

EMResult em_loop(const PairStats& m, std::size_t user_count, SigmaVector sigma, const SigmaLpSolver* lp,
                 const EMConfig& config) {
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("EMConfig: epsilon must be positive");
  if (config.max_iterations < 1) throw std::invalid_argument("EMConfig: max_iterations must be at least 1");
  require_sizes(m, sigma.values.size(), "sigma");

  EMResult result;
  EMParams params = config.initial.value_or(initial_params(config.seed));
  params = {clamp_param(params.alpha), clamp_param(params.beta), clamp_param(params.rho)};

  QMatrix previous{std::vector<double>(m.size(), params.rho), params.rho};
  QMatrix q;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    q = compute_q(m, sigma, params);
    IterationRecord rec;
    rec.iteration = it;
    rec.l2_delta = l2_distance(q.values, previous.values);
    rec.bound = expected_log_posterior_bound(m, sigma, q, params, user_count);
    rec.params = params;
    result.iterations = it;
    if (rec.l2_delta < config.epsilon) {
      result.converged = true;
      result.history.push_back(rec);
      break;
    }

    if (lp != nullptr) {
      auto w = compute_w(m, q, params);
      rec.lambda = compute_lambda(w);
      for (double& x : w) x -= rec.lambda;
      sigma = lp->solve(w);
      rec.lp_objective = lp_objective(w, sigma);
    }

    const auto a = alpha_ratio(m, sigma, q);
    const auto b = beta_ratio(m, sigma, q);
    if (!a) result.warnings.push_back("iteration " + std::to_string(it) + ": alpha update has no weight; kept previous");
    if (!b) result.warnings.push_back("iteration " + std::to_string(it) + ": beta update has no weight; kept previous");
    params.alpha = a ? clamp_param(*a) : params.alpha;
    params.beta = b ? clamp_param(*b) : params.beta;
    params.rho = update_rho(q, user_count);
    result.history.push_back(rec);

    if (config.observer) config.observer(IterationSnapshot{it, sigma, q, params});
    previous = q;
  }
  result.params = params;
  result.sigma = std::move(sigma);
  result.q = std::move(q);
  return result;
}

}  // namespace

double clamp_param(double x) { return std::clamp(x, kParamFloor, 1.0 - kParamFloor); }

QMatrix compute_q(const PairStats& m, const SigmaVector& sigma, const EMParams& params) {
  require_open_unit(params.alpha, "alpha");
  require_open_unit(params.beta, "beta");
  if (!(params.rho >= 0.0 && params.rho <= 1.0)) throw std::domain_error("rho must lie in [0, 1]");
  require_sizes(m, sigma.values.size(), "sigma");

  QMatrix q{std::vector<double>(m.size(), params.rho), params.rho};
  if (params.alpha == params.beta) return q;  // likelihood ratio is 1

  const double log_rho = std::log(params.rho);
  const double log_not_rho = std::log1p(-params.rho);
  const double log_a = std::log(params.alpha), log_na = std::log1p(-params.alpha);
  const double log_b = std::log(params.beta), log_nb = std::log1p(-params.beta);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double mk = m.count(static_cast<PairIndex>(k));
    if (mk == 0.0) continue;
    const double hits = mk * sigma.values[k];
    const double misses = mk * (1.0 - sigma.values[k]);
    const double edge = log_rho + hits * log_a + misses * log_na;
    const double no_edge = log_not_rho + hits * log_b + misses * log_nb;
    q.values[k] = 1.0 / (1.0 + std::exp(no_edge - edge));
  }
  return q;
}

std::vector<double> compute_w(const PairStats& m, const QMatrix& q, const EMParams& params) {
  require_open_unit(params.alpha, "alpha");
  require_open_unit(params.beta, "beta");
  require_sizes(m, q.values.size(), "Q");
  const double la = logit(params.alpha);
  const double lb = logit(params.beta);
  std::vector<double> w(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double qk = q.values[k];
    w[k] = m.count(static_cast<PairIndex>(k)) * (qk * la + (1.0 - qk) * lb);
  }
  return w;
}

std::optional<double> alpha_ratio(const PairStats& m, const SigmaVector& sigma, const QMatrix& q) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double wk = m.count(static_cast<PairIndex>(k)) * q.values[k];
    num += wk * sigma.values[k];
    den += wk;
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

std::optional<double> beta_ratio(const PairStats& m, const SigmaVector& sigma, const QMatrix& q) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double wk = m.count(static_cast<PairIndex>(k)) * (1.0 - q.values[k]);
    num += wk * sigma.values[k];
    den += wk;
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

double rho_ratio(const QMatrix& q, std::size_t user_count) {
  if (user_count < 2) throw std::invalid_argument("rho update needs at least two users");
  const double ordered_pairs = static_cast<double>(user_count) * static_cast<double>(user_count - 1);
  double active = 0.0;
  for (double x : q.values) active += x;
  const double inactive = ordered_pairs - static_cast<double>(q.values.size());
  return (active + q.implicit * inactive) / ordered_pairs;
}

double update_alpha(const PairStats& m, const SigmaVector& sigma, const QMatrix& q, double previous) {
  const auto r = alpha_ratio(m, sigma, q);
  return r ? clamp_param(*r) : previous;
}

double update_beta(const PairStats& m, const SigmaVector& sigma, const QMatrix& q, double previous) {
  const auto r = beta_ratio(m, sigma, q);
  return r ? clamp_param(*r) : previous;
}

double update_rho(const QMatrix& q, std::size_t user_count) { return clamp_param(rho_ratio(q, user_count)); }

double expected_log_posterior_bound(const PairStats& m, const SigmaVector& sigma, const QMatrix& q,
                                    const EMParams& params, std::size_t user_count) {
  const double log_rho = std::log(params.rho), log_not_rho = std::log1p(-params.rho);
  const double log_a = std::log(params.alpha), log_na = std::log1p(-params.alpha);
  const double log_b = std::log(params.beta), log_nb = std::log1p(-params.beta);
  double total = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double mk = m.count(static_cast<PairIndex>(k));
    const double hits = mk * sigma.values[k];
    const double misses = mk - hits;
    const double edge = log_rho + hits * log_a + misses * log_na;
    const double no_edge = log_not_rho + hits * log_b + misses * log_nb;
    const double qk = q.values[k];
    total += qk * edge + (1.0 - qk) * no_edge - xlogx(qk) - xlogx(1.0 - qk);
  }
  if (user_count >= 2) {
    const double inactive =
        static_cast<double>(user_count) * static_cast<double>(user_count - 1) - static_cast<double>(m.size());
    const double qi = q.implicit;
    total += inactive * (qi * log_rho + (1.0 - qi) * log_not_rho - xlogx(qi) - xlogx(1.0 - qi));
  }
  return total;
}

EMParams initial_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53; };
  const double u1 = unit(), u2 = unit(), u3 = unit();
  return {std::max(u1, u2), std::min(u1, u2), u3};
}

EMResult run_em(const EpisodeSet& episodes, const PairStats& m, const ConstraintSet& reduced,
                const FixedAssignments& fixed, const EMConfig& config) {
  SigmaLpSolver solver(reduced, fixed, LpOptions{config.threads});
  // Start from the all-ones point, which satisfies every covering constraint.
  SigmaVector sigma{std::vector<double>(m.size(), 1.0)};
  for (PairIndex k = 0; k < m.size(); ++k) {
    if (fixed.is_fixed(k)) sigma.values[k] = fixed.value(k);
  }
  return em_loop(m, episodes.user_count(), std::move(sigma), &solver, config);
}

EMResult run_em_fixed_sigma(const PairStats& m, const SigmaVector& sigma, std::size_t user_count,
                            const EMConfig& config) {
  return em_loop(m, user_count, sigma, nullptr, config);
}

AdjacencyGraph threshold_graph(const QMatrix& q, const PairStats& m, std::size_t user_count, double threshold) {
  require_sizes(m, q.values.size(), "Q");
  std::vector<UserPair> edges;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (q.values[k] > threshold) edges.push_back(m.pair(static_cast<PairIndex>(k)));
  }
  return AdjacencyGraph(user_count, std::move(edges));
}

}  // namespace tracegraph
