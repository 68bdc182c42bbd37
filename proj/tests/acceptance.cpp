// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "support.hpp"
#include "tracegraph/baselines.hpp"
#include "tracegraph/evaluation.hpp"
#include "tracegraph/io.hpp"
#include "tracegraph/pipeline.hpp"
#include "tracegraph/synth.hpp"

using namespace tracegraph;

namespace {

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

SynthConfig benchmark_config(std::uint64_t seed) {
  SynthConfig c;
  c.n = 200;
  c.edge_density = 0.02;
  c.cascades = 500;
  c.activation_prob = 0.3;
  c.seed = seed;
  return c;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// One benchmark trace with every method's output and the bookkeeping the
/// criteria need.
struct BenchmarkRun {
  std::uint64_t seed = 0;
  AdjacencyGraph truth;
  PreparedTrace prepared;
  InferenceOutput cem, newman, saito, star, chain;
  double worst_violation = 0.0;  // over all M-steps, against the unreduced set
  std::size_t observed_steps = 0;
  double seconds = 0.0;
};

BenchmarkRun run_benchmark(std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  BenchmarkRun run;
  run.seed = seed;
  const auto cfg = benchmark_config(seed);
  run.truth = generate_graph(cfg);
  run.prepared = prepare_trace(generate_trace(run.truth, cfg));
  const auto original = build_constraints(run.prepared.episodes, run.prepared.pairs);

  InferOptions options;
  options.em.epsilon = 1e-3;
  options.em.seed = seed;
  options.em.threads = 1;
  options.em.observer = [&](const IterationSnapshot& s) {
    ++run.observed_steps;
    run.worst_violation = std::max(run.worst_violation, max_violation(original, s.sigma.values));
  };
  run.cem = run_method(run.prepared, Method::ConstrainedEm, options);
  options.em.observer = nullptr;
  run.newman = run_method(run.prepared, Method::Newman, options);
  run.saito = run_method(run.prepared, Method::Saito, options);
  run.star = run_method(run.prepared, Method::Star, options);
  run.chain = run_method(run.prepared, Method::Chain, options);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

double feasibility(const BenchmarkRun& r, const InferenceOutput& out) {
  return feasibility_rate(out.graph, r.prepared.episodes).rate;
}

/// Ground-truth edges expressed in the trace's user numbering.
AdjacencyGraph truth_in_trace_ids(const BenchmarkRun& r) {
  std::vector<UserPair> mapped;
  for (const auto& e : r.truth.edges()) {
    const auto a = r.prepared.trace.user_id(synth_user_name(e.src));
    const auto b = r.prepared.trace.user_id(synth_user_name(e.dst));
    if (a && b) mapped.push_back({*a, *b});
  }
  return AdjacencyGraph(r.prepared.episodes.user_count(), mapped);
}

LPProblem random_lp(std::mt19937_64& rng) {
  const std::size_t vars = 1 + rng() % 8;
  std::uniform_real_distribution<double> unit(-5.0, 5.0);
  std::vector<double> w(vars);
  const bool integral = rng() % 2 == 0;
  for (double& x : w) x = integral ? static_cast<double>(static_cast<int>(rng() % 5)) - 2.0 : unit(rng);
  const double lambda = compute_lambda(w);
  for (double& x : w) x -= lambda;
  ConstraintSet cs;
  cs.pair_count = vars;
  const std::size_t rows = 1 + rng() % 6;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<PairIndex> s;
    for (std::size_t k = 0; k < vars; ++k) {
      if (rng() % 3 == 0) s.push_back(static_cast<PairIndex>(k));
    }
    if (s.empty()) s.push_back(static_cast<PairIndex>(rng() % vars));
    cs.constraints.push_back({r, 0, s});
  }
  FixedAssignments fixed(vars);
  for (std::size_t k = 0; k < vars; ++k) {
    if (rng() % 8 == 0) fixed.set(static_cast<PairIndex>(k), 1.0);
  }
  return {w, cs, fixed};
}

std::vector<test::Members> random_members(std::mt19937_64& rng, std::size_t users, std::size_t originals,
                                          std::size_t max_size) {
  std::vector<test::Members> eps;
  for (std::size_t s = 0; s < originals; ++s) {
    std::vector<std::string> pool;
    for (std::size_t u = 0; u < users; ++u) pool.push_back("u" + std::to_string(u));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(2 + rng() % (std::min(max_size, users) - 1));
    eps.push_back(pool);
  }
  return eps;
}

}  // namespace

int main() {
  std::printf("benchmark: n=200 edge_density=0.02 cascades=500 activation_prob=0.3 max_steps=%zu epsilon=0.001 "
              "seeds=1..5\n",
              SynthConfig{}.max_steps);
  std::vector<BenchmarkRun> runs;
  for (std::uint64_t seed : kSeeds) {
    runs.push_back(run_benchmark(seed));
    const auto& r = runs.back();
    std::printf("  seed %llu: T=%zu S=%zu N=%zu L=%zu, constrained-em %zu iterations%s in %.2fs (all methods)\n",
                static_cast<unsigned long long>(r.seed), r.prepared.trace.post_count(),
                r.prepared.trace.original_count(), r.prepared.trace.user_count(), r.prepared.pairs.size(),
                r.cem.em->iterations, r.cem.em->converged ? "" : " (not converged)", r.seconds);
  }

  report(1, "constraint count equals T - S", [&] {
    std::size_t traces = 0;
    bool ok = true;
    auto check = [&](const PreparedTrace& p) {
      ++traces;
      ok &= build_constraints(p.episodes, p.pairs).size() == p.trace.post_count() - p.trace.original_count();
    };
    for (const auto& r : runs) check(r.prepared);
    std::mt19937_64 rng(1001);
    for (int k = 0; k < 500; ++k) check(prepare_trace(test::make_trace(random_members(rng, 2 + rng() % 10, 1 + rng() % 20, 10))));
    return Outcome{ok, std::to_string(traces) + " traces, exact"};
  });

  report(2, "constraint reduction is solution-preserving", [&] {
    std::mt19937_64 rng(1002);
    int instances = 0, ok = 0;
    long points = 0;
    while (instances < 100) {
      const auto prepared = prepare_trace(test::make_trace(random_members(rng, 3 + rng() % 2, 1 + rng() % 4, 4)));
      if (prepared.pairs.size() > 6) continue;
      ++instances;
      const auto r = reduce_constraints(prepared.episodes, prepared.pairs);
      const long n = oracle::grid_preserves(r.original, r.reduced, r.fixed, prepared.pairs.size(), 0.25);
      if (n >= 0) {
        ++ok;
        points += n;
      }
    }
    return Outcome{ok == 100, std::to_string(ok) + "/100 traces, " + std::to_string(points) +
                                  " reduced-feasible grid points all satisfy the original set"};
  });

  report(3, "LP optimum matches vertex enumeration", [&] {
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const auto p = random_lp(rng);
      const double got = lp_objective(p.objective, solve_sigma_lp(p));
      worst = std::max(worst, std::abs(got - oracle::enumerate_vertices(p).primary));
    }
    return Outcome{worst <= 1e-9, "200 instances, max |difference| = " + fmt(worst, 17)};
  });

  report(4, "E-step matches 50-digit evaluation", [&] {
    std::mt19937_64 rng(1004);
    std::uniform_real_distribution<double> rate(0.01, 0.99), unit(0.0, 1.0), prior(1e-4, 0.9999);
    double worst = 0.0;
    bool prior_exact = true;
    for (int k = 0; k < 1000; ++k) {
      const std::uint32_t m = k % 10 == 0 ? 0 : static_cast<std::uint32_t>(1 + rng() % 50);
      const double s = unit(rng), a = rate(rng), b = rate(rng), r = prior(rng);
      const double got = compute_q(PairStats({{0, 1}}, {m}), {{s}}, {a, b, r}).values[0];
      const double want = oracle::posterior_q(m, s, a, b, r);
      worst = std::max(worst, std::abs(got - want) / want);
      if (m == 0) prior_exact &= got == r;
    }
    return Outcome{worst <= 1e-12 && prior_exact,
                   "1000 tuples, max relative error " + fmt(worst, 17) + (prior_exact ? ", M=0 gives rho exactly" : ", M=0 mismatch")};
  });

  report(5, "constrained-em feasibility >= 0.95", [&] {
    double worst = 1.0;
    std::string per;
    for (const auto& r : runs) {
      const double f = feasibility(r, r.cem);
      worst = std::min(worst, f);
      per += (per.empty() ? "" : " ") + fmt(f);
    }
    return Outcome{worst >= 0.95, "per seed " + per};
  });

  report(6, "star and chain feasibility = 1", [&] {
    bool ok = true;
    for (const auto& r : runs) ok &= feasibility(r, r.star) == 1.0 && feasibility(r, r.chain) == 1.0;
    std::mt19937_64 rng(1006);
    for (int k = 0; k < 200; ++k) {
      const auto set = test::make_episodes(random_members(rng, 2 + rng() % 12, 1 + rng() % 25, 12));
      ok &= feasibility_rate(infer_star(set), set).rate == 1.0 && feasibility_rate(infer_chain(set), set).rate == 1.0;
    }
    return Outcome{ok, "5 benchmark traces and 200 random traces, exact"};
  });

  report(7, "feasibility ordering constrained-em > saito, newman", [&] {
    bool ok = true;
    std::string per;
    for (const auto& r : runs) {
      const double c = feasibility(r, r.cem), s = feasibility(r, r.saito), n = feasibility(r, r.newman);
      ok &= c > s && c > n;
      per += (per.empty() ? "" : "; ") + fmt(c) + " vs " + fmt(s) + ", " + fmt(n);
    }
    return Outcome{ok, "per seed (cem vs saito, newman): " + per};
  });

  report(8, "edge count constrained-em < star, chain", [&] {
    bool ok = true;
    std::string per;
    for (const auto& r : runs) {
      const auto c = r.cem.graph.edge_count(), s = r.star.graph.edge_count(), h = r.chain.graph.edge_count();
      ok &= c < s && c < h;
      per += (per.empty() ? "" : "; ") + std::to_string(c) + " vs " + std::to_string(s) + ", " + std::to_string(h);
    }
    return Outcome{ok, "per seed (cem vs star, chain): " + per};
  });

  report(9, "every M-step satisfies the unreduced constraints", [&] {
    double worst = 0.0;
    std::size_t steps = 0;
    for (const auto& r : runs) {
      worst = std::max(worst, r.worst_violation);
      steps += r.observed_steps;
    }
    return Outcome{worst <= 1e-6 && steps > 0,
                   std::to_string(steps) + " M-steps checked, max violation " + fmt(worst, 12)};
  });

  report(10, "Q saturation for M >= 10", [&] {
    bool gate = true, target = true;
    std::string per;
    for (const auto& r : runs) {
      std::size_t pairs = 0, saturated = 0;
      for (PairIndex k = 0; k < r.prepared.pairs.size(); ++k) {
        if (r.prepared.pairs.count(k) < 10) continue;
        ++pairs;
        const double q = r.cem.em->q.values[k];
        if (std::min(q, 1.0 - q) <= 0.05) ++saturated;
      }
      const double share = pairs ? static_cast<double>(saturated) / static_cast<double>(pairs) : 0.0;
      gate &= share >= 0.80;
      target &= share >= 0.90;
      per += (per.empty() ? "" : " ") + fmt(share) + "(" + std::to_string(pairs) + ")";
    }
    return Outcome{gate, "share per seed (pairs): " + per + (target ? "; >= 0.90 on every seed" : "; below 0.90 on some seed")};
  });

  report(11, "ground-truth recovery on pairs with M >= 5", [&] {
    std::vector<double> precision, recall;
    for (const auto& r : runs) {
      const auto truth = truth_in_trace_ids(r);
      std::size_t tp = 0, inferred = 0, actual = 0;
      for (PairIndex k = 0; k < r.prepared.pairs.size(); ++k) {
        if (r.prepared.pairs.count(k) < 5) continue;
        const auto& p = r.prepared.pairs.pair(k);
        const bool in_truth = truth.has_edge(p), in_graph = r.cem.graph.has_edge(p);
        tp += in_truth && in_graph;
        inferred += in_graph;
        actual += in_truth;
      }
      precision.push_back(inferred ? static_cast<double>(tp) / static_cast<double>(inferred) : 0.0);
      recall.push_back(actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0);
    }
    const double p = median(precision), rc = median(recall);
    std::string per;
    for (std::size_t k = 0; k < precision.size(); ++k) per += (k ? " " : "") + fmt(precision[k], 3) + "/" + fmt(recall[k], 3);
    return Outcome{p >= 0.8 && rc >= 0.8, "median precision " + fmt(p) + ", recall " + fmt(rc) + " (per seed " + per + ")"};
  });

  report(12, "byte-identical reruns in single-threaded mode", [&] {
    auto pipeline = [] {
      const auto cfg = benchmark_config(kSeeds[0]);
      const auto text = serialize_trace(generate_trace(generate_graph(cfg), cfg));
      const auto prepared = prepare_trace(parse_trace(text));
      InferOptions options;
      options.em.seed = kSeeds[0];
      options.em.threads = 1;
      const auto out = run_method(prepared, Method::ConstrainedEm, options);
      return std::pair{edges_tsv("constrained-em", out.rows, prepared.episodes.users),
                       params_json("constrained-em", *out.em, options.em.epsilon)};
    };
    const auto a = pipeline(), b = pipeline();
    const bool same = a.first == b.first && a.second == b.second;
    return Outcome{same, "edges TSV " + std::to_string(a.first.size()) + " bytes, params JSON " +
                             std::to_string(a.second.size()) + " bytes, " + (same ? "identical" : "differ")};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
