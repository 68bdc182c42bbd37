// tracegraph: infer a trace-feasible follower graph from a post/repost log.
//
//   tracegraph synth      generate a ground-truth graph and SI cascade trace
//   tracegraph preprocess clean a raw trace
//   tracegraph infer      run one inference method
//   tracegraph evaluate   feasibility and graph metrics for an edges file
//   tracegraph report     run every method and tabulate the comparison

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "tracegraph/error.hpp"
#include "tracegraph/evaluation.hpp"
#include "tracegraph/io.hpp"
#include "tracegraph/pipeline.hpp"
#include "tracegraph/synth.hpp"

#ifndef TRACEGRAPH_VERSION
#define TRACEGRAPH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace tracegraph;
using json = nlohmann::ordered_json;

namespace {

struct Common {
  std::size_t threads = 0;
};

struct TraceInput {
  std::string path;
  std::string delimiter = "tab";
  std::string order = "pid,t,uid,rid";
};

struct EmFlags {
  double epsilon = 1e-3;
  std::size_t max_iterations = 500;
  std::uint64_t seed = 1;
  double threshold = 0.5;
};

class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) : start_(std::chrono::steady_clock::now()) {
    j_["command"] = std::move(command);
    j_["argv"] = json::array();
    for (int i = 0; i < argc; ++i) j_["argv"].push_back(argv[i]);
    j_["version"] = TRACEGRAPH_VERSION;
    j_["inputs"] = json::object();
    j_["config"] = json::object();
    j_["outputs"] = json::array();
  }
  json& inputs() { return j_["inputs"]; }
  json& config() { return j_["config"]; }
  void output(const fs::path& p) { j_["outputs"].push_back(p.string()); }
  void write(const fs::path& path) {
    j_["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file_atomic(path, j_.dump(2) + "\n");
  }

 private:
  json j_;
  std::chrono::steady_clock::time_point start_;
};

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

Delimiter parse_delimiter(const std::string& name) {
  if (name == "tab") return Delimiter::Tab;
  if (name == "comma") return Delimiter::Comma;
  if (name == "space" || name == "whitespace") return Delimiter::Whitespace;
  throw CLI::ValidationError("--delimiter", "expected tab, comma or space");
}

TraceFormat format_of(const TraceInput& in) { return TraceFormat::with_order(in.order, parse_delimiter(in.delimiter)); }

Trace load_trace(const TraceInput& in) { return parse_trace(read_lines(in.path), format_of(in)); }

fs::path make_out_dir(const std::string& requested, const std::string& command, std::uint64_t seed) {
  fs::path dir = requested;
  if (dir.empty()) {
    const std::time_t now = std::time(nullptr);
    std::ostringstream name;
    name << command << '-' << std::put_time(std::gmtime(&now), "%Y%m%dT%H%M%SZ") << "-s" << seed;
    dir = fs::path("runs") / name.str();
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void add_trace_flags(CLI::App* cmd, TraceInput& in) {
  cmd->add_option("--delimiter", in.delimiter, "Field delimiter: tab, comma or space")
      ->envname("TRACEGRAPH_DELIMITER")
      ->capture_default_str();
  cmd->add_option("--format", in.order, "Column order, e.g. pid,t,uid,rid")
      ->envname("TRACEGRAPH_FORMAT")
      ->capture_default_str();
}

void add_em_flags(CLI::App* cmd, EmFlags& f) {
  cmd->add_option("--epsilon", f.epsilon, "Convergence threshold on the L2 change of Q")
      ->envname("TRACEGRAPH_EPSILON")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iters", f.max_iterations, "Iteration cap")
      ->envname("TRACEGRAPH_MAX_ITERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed for the random parameter initialization")
      ->envname("TRACEGRAPH_SEED")
      ->capture_default_str();
  cmd->add_option("--threshold", f.threshold, "Edge threshold (strict >) on Q / k")
      ->envname("TRACEGRAPH_THRESHOLD")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

InferOptions infer_options(const EmFlags& f, std::size_t threads) {
  InferOptions o;
  o.em.epsilon = f.epsilon;
  o.em.max_iterations = f.max_iterations;
  o.em.seed = f.seed;
  o.em.threads = threads;
  o.threshold = f.threshold;
  return o;
}

void record_em_config(Manifest& m, const EmFlags& f, std::size_t threads) {
  m.config()["epsilon"] = f.epsilon;
  m.config()["max_iterations"] = f.max_iterations;
  m.config()["seed"] = f.seed;
  m.config()["threshold"] = f.threshold;
  m.config()["threads"] = threads;
}

json params_for(const InferenceOutput& out, double epsilon) {
  if (out.em) return json::parse(params_json(method_name(out.method), *out.em, epsilon));
  json j;
  j["method"] = method_name(out.method);
  if (out.method == Method::Saito) {
    j["iterations"] = out.saito_iterations;
    j["converged"] = out.saito_converged;
    j["epsilon"] = epsilon;
  }
  return j;
}

/// Writes edges.tsv, params.json and, where applicable, history.csv and
/// reduction.json for one method.
void write_inference(const fs::path& dir, const PreparedTrace& prepared, const InferenceOutput& out, double epsilon,
                     Manifest& manifest) {
  const auto edges = dir / "edges.tsv";
  write_file_atomic(edges, edges_tsv(method_name(out.method), out.rows, prepared.episodes.users));
  manifest.output(edges);
  const auto params = dir / "params.json";
  write_file_atomic(params, params_for(out, epsilon).dump(2) + "\n");
  manifest.output(params);
  if (out.em) {
    const auto history = dir / "history.csv";
    write_file_atomic(history, history_csv(out.em->history));
    manifest.output(history);
  }
  if (out.reduction) {
    const auto reduction = dir / "reduction.json";
    write_file_atomic(reduction, reduction_report_json(*out.reduction) + "\n");
    manifest.output(reduction);
  }
}

json evaluation_summary(const AdjacencyGraph& graph, const PreparedTrace& prepared, const fs::path& dir,
                        bool per_episode, Manifest& manifest) {
  const auto feas = feasibility_rate(graph, prepared.episodes);
  const auto metrics = graph_metrics(graph);
  const std::pair<fs::path, std::string> files[] = {
      {dir / "feasibility.json", feasibility_json(feas, prepared.episodes, per_episode) + "\n"},
      {dir / "metrics.json", metrics_json(metrics) + "\n"},
      {dir / "ccdf_out.csv", ccdf_csv(metrics.ccdf.out)},
      {dir / "ccdf_in.csv", ccdf_csv(metrics.ccdf.in)},
  };
  for (const auto& [path, content] : files) {
    write_file_atomic(path, content);
    manifest.output(path);
  }
  json j = json::parse(metrics_json(metrics));
  j["feasibility_rate"] = feas.rate;
  j["feasible_episodes_pct"] = 100.0 * feas.rate;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-feasible social graph inference"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", TRACEGRAPH_VERSION);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (0: all cores; 1: deterministic reference mode)")
      ->envname("TRACEGRAPH_THREADS");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Clean a raw trace and report its statistics");
  TraceInput pre_in;
  std::string pre_out;
  pre->add_option("--input,-i", pre_in.path, "Raw trace")->required()->envname("TRACEGRAPH_INPUT");
  pre->add_option("--output,-o", pre_out, "Cleaned trace destination")->required()->envname("TRACEGRAPH_OUTPUT");
  add_trace_flags(pre, pre_in);

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a ground-truth graph and an SI cascade trace");
  SynthConfig sc;
  std::string syn_dir;
  syn->add_option("--n", sc.n, "Nodes")->envname("TRACEGRAPH_N")->capture_default_str();
  syn->add_option("--density", sc.edge_density, "Edge probability")->envname("TRACEGRAPH_DENSITY")->capture_default_str();
  syn->add_option("--cascades", sc.cascades, "Original posts")->envname("TRACEGRAPH_CASCADES")->capture_default_str();
  syn->add_option("--prob", sc.activation_prob, "Per-edge per-step activation probability")
      ->envname("TRACEGRAPH_PROB")
      ->capture_default_str();
  syn->add_option("--max-steps", sc.max_steps, "Cascade horizon in steps")
      ->envname("TRACEGRAPH_MAX_STEPS")
      ->capture_default_str();
  syn->add_option("--seed", sc.seed, "Random seed")->envname("TRACEGRAPH_SEED")->capture_default_str();
  syn->add_option("--out-dir", syn_dir, "Output directory")->envname("TRACEGRAPH_OUT_DIR");

  // infer
  auto* inf = app.add_subcommand("infer", "Infer a graph with one method");
  TraceInput inf_in;
  EmFlags inf_flags;
  std::string method = "constrained-em";
  std::string inf_dir;
  bool dump_constraints = false, dump_lp = false;
  inf->add_option("--method,-m", method, "constrained-em | newman | saito | star | chain")
      ->envname("TRACEGRAPH_METHOD")
      ->capture_default_str();
  inf->add_option("--trace,-t", inf_in.path, "Trace (cleaned or raw)")->required()->envname("TRACEGRAPH_TRACE");
  inf->add_option("--out-dir", inf_dir, "Output directory")->envname("TRACEGRAPH_OUT_DIR");
  inf->add_flag("--dump-constraints", dump_constraints, "Write constraints.jsonl (original and reduced)");
  inf->add_flag("--dump-lp", dump_lp, "Write the first-iteration sigma LP in CPLEX LP format");
  add_trace_flags(inf, inf_in);
  add_em_flags(inf, inf_flags);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Feasibility and graph metrics for an edges file");
  TraceInput ev_in;
  std::string graph_path, ev_dir;
  double ev_threshold = 0.5;
  bool no_per_episode = false, ignore_unknown = false;
  ev->add_option("--graph,-g", graph_path, "edges.tsv or two-column edge list")->required()->envname("TRACEGRAPH_GRAPH");
  ev->add_option("--trace,-t", ev_in.path, "Trace the graph should explain")->required()->envname("TRACEGRAPH_TRACE");
  ev->add_option("--threshold", ev_threshold, "Edge threshold (strict >) on the score column")
      ->envname("TRACEGRAPH_THRESHOLD")
      ->capture_default_str();
  ev->add_option("--out-dir", ev_dir, "Output directory")->envname("TRACEGRAPH_OUT_DIR");
  ev->add_flag("--no-per-episode", no_per_episode, "Omit per-episode booleans from feasibility.json");
  ev->add_flag("--ignore-unknown", ignore_unknown, "Drop edges whose ids are absent from the trace");
  add_trace_flags(ev, ev_in);

  // report
  auto* rep = app.add_subcommand("report", "Run every method on a trace and tabulate the comparison");
  TraceInput rep_in;
  EmFlags rep_flags;
  std::string rep_dir;
  rep->add_option("--trace,-t", rep_in.path, "Trace")->required()->envname("TRACEGRAPH_TRACE");
  rep->add_option("--out-dir", rep_dir, "Output directory")->envname("TRACEGRAPH_OUT_DIR");
  add_trace_flags(rep, rep_in);
  add_em_flags(rep, rep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::size_t threads = resolve_threads(common.threads);
  try {
    if (*pre) {
      Manifest manifest("preprocess", argc, argv);
      manifest.inputs()["trace"] = pre_in.path;
      const auto format = format_of(pre_in);
      const auto prepared = prepare_trace(parse_trace(read_lines(pre_in.path), format));
      write_file_atomic(pre_out, join_lines(serialize_trace(prepared.trace, format)));
      manifest.output(pre_out);
      const std::string summary = preprocess_summary_json(prepared);
      const fs::path summary_path = fs::path(pre_out).string() + ".summary.json";
      write_file_atomic(summary_path, summary);
      manifest.output(summary_path);
      manifest.write(fs::path(pre_out).string() + ".manifest.json");
      std::cout << summary;
    } else if (*syn) {
      sc.validate();
      const fs::path dir = make_out_dir(syn_dir, "synth", sc.seed);
      Manifest manifest("synth", argc, argv);
      manifest.config() = {{"n", sc.n},           {"density", sc.edge_density}, {"cascades", sc.cascades},
                           {"prob", sc.activation_prob}, {"max_steps", sc.max_steps}, {"seed", sc.seed}};
      const auto graph = generate_graph(sc);
      const auto trace = generate_trace(graph, sc);
      std::vector<std::string> names(sc.n);
      for (std::size_t u = 0; u < sc.n; ++u) names[u] = synth_user_name(u);
      write_file_atomic(dir / "trace.tsv", join_lines(serialize_trace(trace)));
      write_file_atomic(dir / "ground_truth.tsv", edge_list_tsv(graph, names));
      manifest.output(dir / "trace.tsv");
      manifest.output(dir / "ground_truth.tsv");
      manifest.write(dir / "manifest.json");
      std::cout << json{{"out_dir", dir.string()},
                        {"records", trace.post_count()},
                        {"originals", trace.original_count()},
                        {"ground_truth_edges", graph.edge_count()}}
                       .dump(2)
                << "\n";
    } else if (*inf) {
      const Method m = parse_method(method);
      const fs::path dir = make_out_dir(inf_dir, "infer-" + method, inf_flags.seed);
      Manifest manifest("infer", argc, argv);
      manifest.inputs()["trace"] = inf_in.path;
      manifest.config()["method"] = method;
      record_em_config(manifest, inf_flags, threads);
      const auto prepared = prepare_trace(load_trace(inf_in));
      const auto options = infer_options(inf_flags, threads);
      if (dump_constraints || dump_lp) {
        const auto reduced = reduce_constraints(prepared.episodes, prepared.pairs);
        if (dump_constraints) {
          write_file_atomic(dir / "constraints.jsonl",
                            join_lines(constraint_dump(reduced.original, prepared.episodes, prepared.pairs)));
          write_file_atomic(dir / "constraints_reduced.jsonl",
                            join_lines(constraint_dump(reduced.reduced, prepared.episodes, prepared.pairs)));
          manifest.output(dir / "constraints.jsonl");
          manifest.output(dir / "constraints_reduced.jsonl");
        }
        if (dump_lp && !prepared.pairs.empty()) {
          // The LP the first M-step solves.
          const EMParams p0 = initial_params(inf_flags.seed);
          SigmaVector start{std::vector<double>(prepared.pairs.size(), 1.0)};
          auto w = compute_w(prepared.pairs, compute_q(prepared.pairs, start, p0), p0);
          const double lambda = compute_lambda(w);
          for (double& x : w) x -= lambda;
          write_file_atomic(dir / "sigma.lp", to_cplex_lp({w, reduced.reduced, reduced.fixed}));
          manifest.output(dir / "sigma.lp");
        }
      }
      const auto out = run_method(prepared, m, options);
      write_inference(dir, prepared, out, inf_flags.epsilon, manifest);
      if (out.em) {
        for (const auto& w : out.em->warnings) std::cerr << "warning: " << w << "\n";
      }
      manifest.write(dir / "manifest.json");
      json summary = params_for(out, inf_flags.epsilon);
      summary["out_dir"] = dir.string();
      summary["edges"] = out.graph.edge_count();
      std::cout << summary.dump(2) << "\n";
    } else if (*ev) {
      const fs::path dir = make_out_dir(ev_dir, "evaluate", 0);
      Manifest manifest("evaluate", argc, argv);
      manifest.inputs()["graph"] = graph_path;
      manifest.inputs()["trace"] = ev_in.path;
      manifest.config()["threshold"] = ev_threshold;
      const auto prepared = prepare_trace(load_trace(ev_in));
      std::size_t dropped = 0;
      const auto graph = resolve_edges(parse_edge_list(read_lines(graph_path), ev_threshold), prepared.episodes.users,
                                       ignore_unknown, &dropped);
      json summary = evaluation_summary(graph, prepared, dir, !no_per_episode, manifest);
      summary["dropped_unknown_edges"] = dropped;
      summary["out_dir"] = dir.string();
      manifest.write(dir / "manifest.json");
      std::cout << summary.dump(2) << "\n";
    } else if (*rep) {
      const fs::path dir = make_out_dir(rep_dir, "report", rep_flags.seed);
      Manifest manifest("report", argc, argv);
      manifest.inputs()["trace"] = rep_in.path;
      record_em_config(manifest, rep_flags, threads);
      const auto prepared = prepare_trace(load_trace(rep_in));
      const auto options = infer_options(rep_flags, threads);
      json table = json::array();
      std::string tsv =
          "method\tfeasible_pct\tedges\tavg_out_degree\tmax_out_degree\tmax_in_degree\tdiameter\tavg_shortest_path\tscc_count\n";
      for (Method m : {Method::ConstrainedEm, Method::Saito, Method::Star, Method::Chain, Method::Newman}) {
        const fs::path sub = dir / std::string(method_name(m));
        fs::create_directories(sub);
        const auto out = run_method(prepared, m, options);
        write_inference(sub, prepared, out, rep_flags.epsilon, manifest);
        json row = evaluation_summary(out.graph, prepared, sub, false, manifest);
        row["method"] = method_name(m);
        std::ostringstream line;
        line << method_name(m) << '\t' << std::fixed << std::setprecision(2) << row["feasible_episodes_pct"].get<double>()
             << '\t' << row["edges"].get<std::size_t>() << '\t' << row["avg_out_degree"].get<double>() << '\t'
             << row["max_out_degree"].get<std::size_t>() << '\t' << row["max_in_degree"].get<std::size_t>() << '\t'
             << row["diameter"].get<std::size_t>() << '\t' << row["avg_shortest_path"].get<double>() << '\t'
             << row["scc_count"].get<std::size_t>() << '\n';
        tsv += line.str();
        table.push_back(row);
      }
      write_file_atomic(dir / "report.tsv", tsv);
      write_file_atomic(dir / "report.json", table.dump(2) + "\n");
      manifest.output(dir / "report.tsv");
      manifest.output(dir / "report.json");
      manifest.write(dir / "manifest.json");
      std::cout << tsv;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
