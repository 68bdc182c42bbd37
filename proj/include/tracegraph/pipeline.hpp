#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracegraph/baselines.hpp"
#include "tracegraph/constraints.hpp"
#include "tracegraph/em.hpp"
#include "tracegraph/io.hpp"
#include "tracegraph/trace.hpp"

namespace tracegraph {

/// Everything derived from a cleaned trace that the inference methods share.
struct PreparedTrace {
  Trace trace;
  PreprocessReport removed;
  EpisodeSet episodes;
  PairStats pairs;
};

PreparedTrace prepare_trace(const Trace& raw);

/// {T, S, N, L, removed_counts}
std::string preprocess_summary_json(const PreparedTrace& prepared);

enum class Method { ConstrainedEm, Newman, Saito, Star, Chain };

inline constexpr std::string_view kMethodNames[] = {"constrained-em", "newman", "saito", "star", "chain"};

std::string_view method_name(Method m);
/// Throws std::invalid_argument for an unknown name.
Method parse_method(std::string_view name);

struct InferOptions {
  EMConfig em;
  double threshold = 0.5;
};

struct InferenceOutput {
  Method method;
  AdjacencyGraph graph;
  std::vector<EdgeRow> rows;          // one per active pair
  std::optional<EMResult> em;         // constrained-em and newman
  std::optional<ReductionReport> reduction;
  std::size_t saito_iterations = 0;
  bool saito_converged = false;
};

InferenceOutput run_method(const PreparedTrace& prepared, Method method, const InferOptions& options);

}  // namespace tracegraph
