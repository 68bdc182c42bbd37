#include "tracegraph/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != '\t' && line[j] != ' ' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return lines;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("error while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

std::string edges_tsv(std::string_view method, const std::vector<EdgeRow>& rows, const std::vector<std::string>& users) {
  std::string out = "# method: " + std::string(method) + "\ni\tj\tM_ij\tsigma_ij\tQ_ij\n";
  for (const auto& r : rows) {
    out += users[r.pair.src];
    out += '\t';
    out += users[r.pair.dst];
    out += '\t';
    out += std::to_string(r.m);
    out += '\t';
    out += format_double(r.sigma);
    out += '\t';
    out += format_double(r.score);
    out += '\n';
  }
  return out;
}

std::vector<NamedEdge> parse_edge_list(const std::vector<std::string>& lines, double threshold) {
  std::vector<NamedEdge> edges;
  bool first_row = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = lines[n];
    if (line.starts_with('#')) continue;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (first_row) {
      first_row = false;
      if (f[0] == "i" && f.size() >= 2 && f[1] == "j") continue;  // header
    }
    if (f.size() == 2) {
      edges.emplace_back(std::string(f[0]), std::string(f[1]));
    } else if (f.size() == 5) {
      double score = 0.0;
      auto [ptr, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), score);
      if (ec != std::errc{} || ptr != f[4].data() + f[4].size()) {
        throw ParseError(n + 1, "score '" + std::string(f[4]) + "' is not a number");
      }
      if (score > threshold) edges.emplace_back(std::string(f[0]), std::string(f[1]));
    } else {
      throw ParseError(n + 1, "expected 2 or 5 columns, found " + std::to_string(f.size()));
    }
  }
  return edges;
}

AdjacencyGraph resolve_edges(const std::vector<NamedEdge>& edges, const std::vector<std::string>& users,
                             bool ignore_unknown, std::size_t* dropped) {
  std::unordered_map<std::string_view, UserId> index;
  for (UserId u = 0; u < users.size(); ++u) index.emplace(users[u], u);
  std::set<std::string> unknown;
  std::vector<UserPair> resolved;
  std::size_t skipped = 0;
  for (const auto& [a, b] : edges) {
    auto ia = index.find(a);
    auto ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      if (ia == index.end()) unknown.insert(a);
      if (ib == index.end()) unknown.insert(b);
      ++skipped;
      continue;
    }
    resolved.push_back({ia->second, ib->second});
  }
  if (!unknown.empty() && !ignore_unknown) {
    std::string msg = "graph references " + std::to_string(unknown.size()) + " id(s) absent from the trace:";
    std::size_t shown = 0;
    for (const auto& u : unknown) {
      if (shown++ == 20) {
        msg += " ...";
        break;
      }
      msg += " " + u;
    }
    throw ValidationError(msg);
  }
  if (dropped) *dropped = skipped;
  return AdjacencyGraph(users.size(), std::move(resolved));
}

std::string edge_list_tsv(const AdjacencyGraph& graph, const std::vector<std::string>& names) {
  std::string out = "i\tj\n";
  for (const auto& e : graph.edges()) out += names[e.src] + '\t' + names[e.dst] + '\n';
  return out;
}

std::string params_json(std::string_view method, const EMResult& result, double epsilon) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["alpha"] = result.params.alpha;
  j["beta"] = result.params.beta;
  j["rho"] = result.params.rho;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["epsilon"] = epsilon;
  return j.dump(2) + "\n";
}

std::string history_csv(const std::vector<IterationRecord>& history) {
  std::string out = "iteration,l2_delta,bound,lp_objective,lambda,alpha,beta,rho\n";
  for (const auto& r : history) {
    out += std::to_string(r.iteration) + ',' + format_double(r.l2_delta) + ',' + format_double(r.bound) + ',' +
           format_double(r.lp_objective) + ',' + format_double(r.lambda) + ',' + format_double(r.params.alpha) + ',' +
           format_double(r.params.beta) + ',' + format_double(r.params.rho) + '\n';
  }
  return out;
}

}  // namespace tracegraph
