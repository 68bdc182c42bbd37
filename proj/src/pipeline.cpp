#include "tracegraph/pipeline.hpp"

#include <json.hpp>
#include <stdexcept>

namespace tracegraph {

PreparedTrace prepare_trace(const Trace& raw) {
  PreparedTrace p;
  auto cleaned = preprocess(raw);
  p.trace = std::move(cleaned.trace);
  p.removed = cleaned.removed;
  p.episodes = build_episodes(p.trace);
  p.pairs = count_ordered_pairs(p.episodes);
  return p;
}

std::string preprocess_summary_json(const PreparedTrace& p) {
  nlohmann::ordered_json j;
  j["T"] = p.trace.post_count();
  j["S"] = p.trace.original_count();
  j["N"] = p.trace.user_count();
  j["L"] = p.pairs.size();
  j["removed_counts"] = {{"no_reposts", p.removed.no_reposts},
                         {"unknown_original", p.removed.unknown_original},
                         {"duplicate", p.removed.duplicate},
                         {"self_repost", p.removed.self_repost}};
  return j.dump(2) + "\n";
}

std::string_view method_name(Method m) { return kMethodNames[static_cast<std::size_t>(m)]; }

Method parse_method(std::string_view name) {
  for (std::size_t k = 0; k < std::size(kMethodNames); ++k) {
    if (kMethodNames[k] == name) return static_cast<Method>(k);
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected constrained-em, newman, saito, star or chain)");
}

namespace {

std::vector<EdgeRow> indicator_rows(const PairStats& pairs, const AdjacencyGraph& g) {
  std::vector<EdgeRow> rows;
  rows.reserve(pairs.size());
  for (PairIndex k = 0; k < pairs.size(); ++k) {
    const double on = g.has_edge(pairs.pair(k)) ? 1.0 : 0.0;
    rows.push_back({pairs.pair(k), pairs.count(k), on, on});
  }
  return rows;
}

std::vector<EdgeRow> em_rows(const PairStats& pairs, const EMResult& em) {
  std::vector<EdgeRow> rows;
  rows.reserve(pairs.size());
  for (PairIndex k = 0; k < pairs.size(); ++k) {
    rows.push_back({pairs.pair(k), pairs.count(k), em.sigma.values[k], em.q.values[k]});
  }
  return rows;
}

}  // namespace

InferenceOutput run_method(const PreparedTrace& p, Method method, const InferOptions& options) {
  InferenceOutput out{method, {}, {}, std::nullopt, std::nullopt};
  const std::size_t n = p.episodes.user_count();
  switch (method) {
    case Method::Star:
      out.graph = infer_star(p.episodes);
      out.rows = indicator_rows(p.pairs, out.graph);
      break;
    case Method::Chain:
      out.graph = infer_chain(p.episodes);
      out.rows = indicator_rows(p.pairs, out.graph);
      break;
    case Method::ConstrainedEm: {
      const auto reduced = reduce_constraints(p.episodes, p.pairs);
      out.reduction = reduced.report;
      out.em = run_em(p.episodes, p.pairs, reduced.reduced, reduced.fixed, options.em);
      out.graph = threshold_graph(out.em->q, p.pairs, n, options.threshold);
      out.rows = em_rows(p.pairs, *out.em);
      break;
    }
    case Method::Newman: {
      auto r = infer_newman_vanilla(p.pairs, compute_direct_counts(p.episodes, p.pairs), n, options.em, options.threshold);
      out.graph = std::move(r.graph);
      out.em = std::move(r.em);
      out.rows = em_rows(p.pairs, *out.em);
      break;
    }
    case Method::Saito: {
      SaitoConfig cfg;
      cfg.epsilon = options.em.epsilon;
      cfg.max_iterations = options.em.max_iterations;
      auto r = infer_saito(p.episodes, p.pairs, cfg, options.threshold);
      out.graph = std::move(r.graph);
      out.saito_iterations = r.iterations;
      out.saito_converged = r.converged;
      out.rows.reserve(p.pairs.size());
      for (PairIndex k = 0; k < p.pairs.size(); ++k) {
        out.rows.push_back({p.pairs.pair(k), p.pairs.count(k), r.k.values[k], r.k.values[k]});
      }
      break;
    }
  }
  return out;
}

}  // namespace tracegraph
