#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracegraph/constraints.hpp"
#include "tracegraph/em.hpp"
#include "tracegraph/graph.hpp"
#include "tracegraph/trace.hpp"

namespace tracegraph {

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string join_lines(const std::vector<std::string>& lines);

/// Shortest representation that round-trips.
std::string format_double(double x);

/// One row of the per-method edges file.
struct EdgeRow {
  UserPair pair;
  std::uint32_t m = 0;
  double sigma = 0.0;
  double score = 0.0;  // Q_ij, k_ij, or a 0/1 indicator
};

/// "# method: <name>" comment, then the header i j M_ij sigma_ij Q_ij.
std::string edges_tsv(std::string_view method, const std::vector<EdgeRow>& rows, const std::vector<std::string>& users);

using NamedEdge = std::pair<std::string, std::string>;

/// Reads an edges file. Lines starting with '#' and a header row are
/// skipped. Two-column rows are edges; five-column rows are edges when
/// their last column is strictly above `threshold`.
std::vector<NamedEdge> parse_edge_list(const std::vector<std::string>& lines, double threshold = 0.5);

/// Maps named edges onto user indices. Unknown names raise a
/// ValidationError listing them unless `ignore_unknown`, in which case the
/// affected edges are dropped and counted in `dropped`.
AdjacencyGraph resolve_edges(const std::vector<NamedEdge>& edges, const std::vector<std::string>& users,
                             bool ignore_unknown = false, std::size_t* dropped = nullptr);

/// Two-column edge list "i j" with node names.
std::string edge_list_tsv(const AdjacencyGraph& graph, const std::vector<std::string>& names);

std::string params_json(std::string_view method, const EMResult& result, double epsilon);
std::string history_csv(const std::vector<IterationRecord>& history);

}  // namespace tracegraph
