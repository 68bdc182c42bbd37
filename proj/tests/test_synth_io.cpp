#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "support.hpp"
#include "tracegraph/error.hpp"
#include "tracegraph/evaluation.hpp"
#include "tracegraph/io.hpp"
#include "tracegraph/pipeline.hpp"
#include "tracegraph/synth.hpp"

using namespace tracegraph;
using namespace tracegraph::test;

namespace {

SynthConfig config(std::size_t n, double density, std::size_t cascades, double prob, std::uint64_t seed = 1) {
  SynthConfig c;
  c.n = n;
  c.edge_density = density;
  c.cascades = cascades;
  c.activation_prob = prob;
  c.seed = seed;
  return c;
}

std::vector<std::string> member_names(const EpisodeSet& set, const Episode& e) {
  std::vector<std::string> out;
  for (const auto& m : e.members) out.push_back(set.users[m.user]);
  return out;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("graph density extremes and a binomial bound") {
    CHECK(generate_graph(config(20, 0.0, 1, 0.3)).edge_count() == 0);
    CHECK(generate_graph(config(20, 1.0, 1, 0.3)).edge_count() == 20 * 19);
    const double mean = 100.0 * 99.0 * 0.05, sd = std::sqrt(mean * 0.95);
    const auto edges = static_cast<double>(generate_graph(config(100, 0.05, 1, 0.3, 7)).edge_count());
    CHECK(std::abs(edges - mean) <= 3.0 * sd);
  }

  TEST_CASE("zero activation probability leaves lone originals") {
    const auto c = config(10, 0.5, 25, 0.0);
    const auto trace = generate_trace(generate_graph(c), c);
    CHECK(trace.post_count() == 25);
    CHECK(trace.original_count() == 25);
  }

  TEST_CASE("certain activation follows a directed path in order") {
    const AdjacencyGraph path(3, {{0, 1}, {1, 2}});
    auto c = config(3, 0.0, 30, 1.0);
    const auto set = build_episodes(generate_trace(path, c));
    REQUIRE(set.size() == 30);
    for (const auto& e : set.episodes) {
      const auto root = set.users[e.root()];
      if (root == "u0") CHECK(member_names(set, e) == std::vector<std::string>{"u0", "u1", "u2"});
      if (root == "u1") CHECK(member_names(set, e) == std::vector<std::string>{"u1", "u2"});
      if (root == "u2") CHECK(e.size() == 1);
    }
  }

  TEST_CASE("certain activation from a star root reaches every leaf in one step") {
    const AdjacencyGraph star(4, {{0, 1}, {0, 2}, {0, 3}});
    const auto trace = generate_trace(star, config(4, 0.0, 40, 1.0, 3));
    const auto set = build_episodes(trace);
    bool seen = false;
    for (const auto& e : set.episodes) {
      if (set.users[e.root()] != "u0") continue;
      seen = true;
      CHECK(member_names(set, e) == std::vector<std::string>{"u0", "u1", "u2", "u3"});
    }
    CHECK(seen);
  }

  TEST_CASE("the generating graph explains every cascade") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto c = config(40 + seed * 5, 0.05, 80, 0.2 + 0.05 * static_cast<double>(seed % 5), seed);
      const auto truth = generate_graph(c);
      const auto trace = generate_trace(truth, c);
      const auto set = build_episodes(trace);  // throws if a user repeats within an episode
      std::vector<UserPair> mapped;
      for (const auto& e : truth.edges()) {
        const auto a = trace.user_id(synth_user_name(e.src)), b = trace.user_id(synth_user_name(e.dst));
        if (a && b) mapped.push_back({*a, *b});
      }
      CHECK(feasibility_rate(AdjacencyGraph(set.user_count(), mapped), set).rate == 1.0);
    }
  }

  TEST_CASE("generation is deterministic per seed") {
    const auto c = config(50, 0.05, 60, 0.4, 21);
    CHECK(serialize_trace(generate_trace(generate_graph(c), c)) ==
          serialize_trace(generate_trace(generate_graph(c), c)));
    const auto d = config(50, 0.05, 60, 0.4, 22);
    CHECK(generate_graph(c).edges() != generate_graph(d).edges());
  }

  TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(config(1, 0.1, 1, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(config(5, 1.5, 1, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(config(5, 0.1, 0, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(config(5, 0.1, 1, -0.1).validate(), std::invalid_argument);
    CHECK_NOTHROW(config(5, 0.1, 1, 0.1).validate());
  }
}

TEST_SUITE("io") {
  TEST_CASE("doubles round-trip through their text form") {
    for (double x : {0.0, 1.0, 0.1, 1e-9, 1.0 - 1e-9, 0.8767123287671232, 3.0380356126095356e-14}) {
      CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.25) == "0.25");
  }

  TEST_CASE("edges file layout and parsing") {
    const std::vector<std::string> users{"alice", "bob", "carol"};
    const std::vector<EdgeRow> rows{{{0, 1}, 3, 1.0, 0.9}, {{1, 2}, 1, 0.0, 0.5}, {{2, 0}, 2, 0.5, 0.51}};
    const auto text = edges_tsv("constrained-em", rows, users);
    CHECK(text.rfind("# method: constrained-em\ni\tj\tM_ij\tsigma_ij\tQ_ij\nalice\tbob\t3\t1\t0.9\n", 0) == 0);

    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t pos; (pos = text.find('\n', start)) != std::string::npos; start = pos + 1) {
      lines.push_back(text.substr(start, pos - start));
    }
    CHECK(parse_edge_list(lines) == std::vector<NamedEdge>{{"alice", "bob"}, {"carol", "alice"}});
    CHECK(parse_edge_list(lines, 0.95).empty());
    CHECK(parse_edge_list({"i\tj", "a\tb", "# note", "", "b\tc"}) == std::vector<NamedEdge>{{"a", "b"}, {"b", "c"}});
    CHECK_THROWS_AS(parse_edge_list({"a\tb\tc"}), ParseError);
  }

  TEST_CASE("edge resolution reports unknown ids") {
    const std::vector<std::string> users{"a", "b"};
    const auto g = resolve_edges({{"a", "b"}}, users);
    CHECK(g.has_edge({0, 1}));
    try {
      resolve_edges({{"a", "zed"}, {"q", "b"}}, users);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      CHECK(what.find("zed") != std::string::npos);
      CHECK(what.find("q") != std::string::npos);
    }
    std::size_t dropped = 0;
    const auto kept = resolve_edges({{"a", "zed"}, {"b", "a"}}, users, true, &dropped);
    CHECK(dropped == 1);
    CHECK(kept.edge_count() == 1);
  }

  TEST_CASE("atomic writes and reads") {
    const auto dir = std::filesystem::temp_directory_path() / "tracegraph_io_test";
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "x.txt", "one\ntwo\r\n\nthree");
    CHECK(read_lines(dir / "x.txt") == std::vector<std::string>{"one", "two", "", "three"});
    write_file_atomic(dir / "x.txt", "replaced\n");
    CHECK(read_lines(dir / "x.txt") == std::vector<std::string>{"replaced"});
    CHECK(join_lines({"a", "b"}) == "a\nb\n");
    CHECK_THROWS_AS(read_lines(dir / "missing.txt"), IoError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("params and history files") {
    EMResult r;
    r.params = {0.9, 0.01, 0.05};
    r.iterations = 12;
    r.converged = true;
    IterationRecord h;
    h.iteration = 1;
    h.l2_delta = 0.5;
    r.history.push_back(h);
    const auto j = nlohmann::ordered_json::parse(params_json("newman", r, 1e-3));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"method", "alpha", "beta", "rho", "iterations", "converged", "epsilon"});
    CHECK(j["alpha"] == 0.9);
    CHECK(j["converged"] == true);
    CHECK(history_csv(r.history).rfind("iteration,l2_delta,bound,lp_objective,lambda,alpha,beta,rho\n1,0.5,", 0) == 0);
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("method names round-trip") {
    for (auto m : {Method::ConstrainedEm, Method::Newman, Method::Saito, Method::Star, Method::Chain}) {
      CHECK(parse_method(method_name(m)) == m);
    }
    CHECK_THROWS_AS(parse_method("pagerank"), std::invalid_argument);
  }

  TEST_CASE("preprocessing summary") {
    const auto prepared = prepare_trace(parse_trace({"p1\t1\ta\t-1", "p2\t2\tb\tp1", "p3\t3\tc\tp1", "p4\t4\td\t-1"}));
    const auto j = nlohmann::json::parse(preprocess_summary_json(prepared));
    CHECK(j["T"] == 3);
    CHECK(j["S"] == 1);
    CHECK(j["N"] == 3);
    CHECK(j["L"] == 3);
    CHECK(j["removed_counts"]["no_reposts"] == 1);
  }

  TEST_CASE("every method reports one row per active pair") {
    const auto prepared = prepare_trace(make_trace({{"r", "a", "b"}, {"r", "b"}, {"a", "b", "r"}, {"r", "a"}}));
    for (auto m : {Method::ConstrainedEm, Method::Newman, Method::Saito, Method::Star, Method::Chain}) {
      const auto out = run_method(prepared, m, {});
      REQUIRE(out.rows.size() == prepared.pairs.size());
      for (std::size_t k = 0; k < out.rows.size(); ++k) {
        CHECK(out.rows[k].pair == prepared.pairs.pair(static_cast<PairIndex>(k)));
        CHECK(out.rows[k].m == prepared.pairs.count(static_cast<PairIndex>(k)));
        CHECK(out.rows[k].score >= 0.0);
        CHECK(out.rows[k].score <= 1.0);
      }
      CHECK(out.em.has_value() == (m == Method::ConstrainedEm || m == Method::Newman));
      CHECK(out.reduction.has_value() == (m == Method::ConstrainedEm));
    }
    const auto star = run_method(prepared, Method::Star, {});
    const auto& set = prepared.episodes;
    for (const auto& row : star.rows) {
      const bool root_edge = (set.users[row.pair.src] == "r" && set.users[row.pair.dst] != "r") ||
                             (set.users[row.pair.src] == "a" && set.users[row.pair.dst] == "b") ||
                             (set.users[row.pair.src] == "a" && set.users[row.pair.dst] == "r");
      CHECK(row.score == (root_edge ? 1.0 : 0.0));
    }
  }
}
