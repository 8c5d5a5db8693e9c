#include "cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rggm/error.hpp"
#include "rggm/fit.hpp"
#include "rggm/io.hpp"
#include "rggm/oracle.hpp"
#include "rggm/sampler.hpp"
#include "rggm/verify.hpp"

namespace rggm::cli {

namespace {

using nlohmann::ordered_json;

struct Options {
  std::string command;
  std::string graph;
  std::string out;
  double alpha = 1.0;
  double beta = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t sweeps = 10000;
  std::optional<std::uint64_t> burnin;
  std::uint64_t thin = 1;
  int refresh_period = kDefaultRefreshPeriod;
  std::string kind = "edges";
  std::string scan = "systematic";
  std::size_t chains = 1;
  std::string stream;
  std::string suite = "all";
  std::size_t max_edges = 10;
  std::string snapshots;
  std::string format = "csv";
  bool gray = false;
};

ordered_json run_config(const Options& o) {
  ordered_json c;
  c["command"] = o.command;
  if (!o.graph.empty()) c["graph"] = o.graph;
  c["alpha"] = o.alpha;
  c["beta"] = o.beta;
  c["seed"] = o.seed;
  if (o.command == "sample" || o.command == "dynamics") {
    c["kind"] = o.command == "dynamics" ? "coupled" : o.kind;
    c["sweeps"] = o.sweeps;
    c["burnin"] = o.burnin ? ordered_json(*o.burnin) : ordered_json("default");
    c["thin"] = o.thin;
    c["scan"] = o.scan;
    c["refresh_period"] = o.refresh_period;
    c["chains"] = o.chains;
    if (!o.stream.empty()) c["stream"] = o.stream;
  }
  if (o.command == "verify") {
    c["suite"] = o.suite;
    c["max_edges"] = o.max_edges;
  }
  if (o.command == "fit") c["snapshots"] = o.snapshots;
  if (o.command == "export-table") c["format"] = o.format;
  if (o.command == "enumerate" || o.command == "export-table") c["gray"] = o.gray;
  if (!o.out.empty()) c["out"] = o.out;
  return c;
}

// Writes to `path` when given, else to `fallback`.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw DataError("cannot open output file " + path);
  body(file);
  if (!file) throw DataError("failed writing " + path);
}

ordered_json labels_json(const LabeledGraph& g) {
  ordered_json out = ordered_json::object();
  for (std::size_t id = 0; id < g.labels.size(); ++id) out[g.labels[id]] = id;
  return out;
}

ordered_json metadata(const Options& o, const LabeledGraph* graph, const Topology& top) {
  auto cfg = run_config(o);
  auto meta = make_metadata(cfg, o.seed, top);
  if (graph) meta["labels"] = labels_json(*graph);
  return meta;
}

ModelParams params_of(const Options& o) {
  ModelParams p{o.alpha, o.beta};
  p.validate();
  return p;
}

RunSettings settings_of(const Options& o) {
  RunSettings s;
  s.sweeps = o.sweeps;
  s.burnin = o.burnin;
  s.thin = o.thin;
  s.seed = o.seed;
  s.scan = parse_scan_order(o.scan);
  s.refresh_period = o.refresh_period;
  s.validate();
  return s;
}

int cmd_enumerate(const Options& o, std::ostream& out, bool as_export) {
  const auto params = params_of(o);
  const auto graph = load_graph(o.graph);
  EnumerateOptions opts;
  opts.gray_code = o.gray;
  opts.refresh_period = o.refresh_period;
  const auto table = enumerate(graph.topology, params, opts);
  const auto meta = metadata(o, &graph, graph.topology);
  const std::string format = as_export ? o.format : "csv";
  if (format != "csv" && format != "json") throw ConfigError("unknown format '" + format + "'");
  emit(o.out, out, [&](std::ostream& os) {
    if (format == "csv") {
      os << "# " << meta.dump() << '\n';
      write_table_csv(os, table);
    } else {
      ordered_json doc;
      doc["meta"] = meta;
      doc["table"] = to_json(table);
      os << doc.dump(2) << '\n';
    }
  });
  return kExitOk;
}

int cmd_sample(const Options& o, std::ostream& out, bool dynamics) {
  const auto params = params_of(o);
  const auto settings = settings_of(o);
  const auto graph = load_graph(o.graph);
  const auto& top = graph.topology;
  const ChainKind kind = dynamics ? ChainKind::Coupled : parse_chain_kind(o.kind);
  if (o.chains == 0) throw ConfigError("--chains must be >= 1");
  const auto meta = metadata(o, &graph, top);

  SampleSummary summary;
  const bool want_stream = dynamics || !o.stream.empty();
  if (want_stream) {
    if (o.chains != 1) throw ConfigError("streaming supports a single chain");
    std::ofstream file;
    std::ostream* sink_stream = &out;
    if (!o.stream.empty()) {
      file.open(o.stream);
      if (!file) throw DataError("cannot open stream file " + o.stream);
      sink_stream = &file;
    }
    *sink_stream << ordered_json{{"meta", meta}}.dump() << '\n';
    summary = run(top, params, settings, kind,
                  [&](const ChainState& chain) { *sink_stream << stream_record(chain).dump() << '\n'; });
    if (!*sink_stream) throw DataError("failed writing the sample stream");
  } else {
    summary = run_chains(top, params, settings, kind, o.chains);
  }

  // dynamics without --stream owns stdout for the stream
  if (dynamics && o.stream.empty() && o.out.empty()) return kExitOk;
  emit(o.out, out, [&](std::ostream& os) {
    ordered_json doc;
    doc["meta"] = meta;
    doc["summary"] = to_json(summary);
    os << doc.dump(2) << '\n';
  });
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const auto params = params_of(o);
  const auto reports = run_suite(o.suite, o.max_edges, params, o.seed);
  bool all_pass = true;
  ordered_json doc;
  doc["meta"] = make_metadata(run_config(o), o.seed, Topology());
  auto& arr = doc["reports"] = ordered_json::array();
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    all_pass = all_pass && r.pass();
  }
  doc["pass"] = all_pass;
  if (o.out.empty()) {
    print_report_table(err, reports);
    out << doc.dump(2) << '\n';
  } else {
    print_report_table(out, reports);
    emit(o.out, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  }
  return all_pass ? kExitOk : kExitNumerical;
}

int cmd_fit(const Options& o, std::ostream& out) {
  const auto init = params_of(o);
  const auto graph = load_graph(o.graph);
  const auto snaps = load_snapshots(o.snapshots, graph.topology);
  const auto result = fit_params(graph.topology, snaps, init);
  emit(o.out, out, [&](std::ostream& os) {
    ordered_json doc;
    doc["meta"] = metadata(o, &graph, graph.topology);
    doc["snapshots"] = snaps.size();
    doc["fit"] = to_json(result);
    os << doc.dump(2) << '\n';
  });
  return kExitOk;
}

void structured_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << ordered_json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Random Gaussian graphical model toolkit", "rggm"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(tool_version()));

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--alpha", o.alpha, "Node precision scale (> 0)");
    sub->add_option("--beta", o.beta, "Edge coupling strength (>= 0)");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output file (default: standard output)");
  };
  auto add_graph = [&](CLI::App* sub) {
    sub->add_option("--graph", o.graph, "Edge-list file")->required();
  };
  auto add_chain = [&](CLI::App* sub) {
    sub->add_option("--sweeps", o.sweeps, "Total sweeps/steps");
    sub->add_option("--burnin", o.burnin, "Discarded initial sweeps (default 10%)");
    sub->add_option("--thin", o.thin, "Keep every thin-th sweep after burn-in");
    sub->add_option("--refresh-period", o.refresh_period, "Flips between Cholesky refreshes (0 = never)");
    sub->add_option("--scan", o.scan, "systematic|random (edge chain)");
    sub->add_option("--stream", o.stream, "JSONL sample stream path");
  };

  auto* enumerate_cmd = app.add_subcommand("enumerate", "Exact edge marginal over all configurations (CSV)");
  add_model(enumerate_cmd);
  add_graph(enumerate_cmd);
  enumerate_cmd->add_flag("--gray", o.gray, "Gray-code rank-1 fast path");
  enumerate_cmd->add_option("--refresh-period", o.refresh_period, "Refresh period for --gray");

  auto* export_cmd = app.add_subcommand("export-table", "Exact table as CSV or JSON (with mixture covariance)");
  add_model(export_cmd);
  add_graph(export_cmd);
  export_cmd->add_option("--format", o.format, "csv|json");
  export_cmd->add_flag("--gray", o.gray, "Gray-code rank-1 fast path");

  auto* sample_cmd = app.add_subcommand("sample", "Run an MCMC chain and summarize");
  add_model(sample_cmd);
  add_graph(sample_cmd);
  add_chain(sample_cmd);
  sample_cmd->add_option("--kind", o.kind, "coupled|edges");
  sample_cmd->add_option("--chains", o.chains, "Independent chains (no stream)");

  auto* dynamics_cmd = app.add_subcommand("dynamics", "Coupled dynamics with the x stream on");
  add_model(dynamics_cmd);
  add_graph(dynamics_cmd);
  add_chain(dynamics_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "Run the property-verification suite");
  add_model(verify_cmd);
  verify_cmd->add_option("--suite", o.suite, "all|lemma1|lemma2|prop2|fkg|monotone|variance|martingale");
  verify_cmd->add_option("--max-edges", o.max_edges, "Largest catalog graph (edges)");

  auto* fit_cmd = app.add_subcommand("fit", "Pseudo-likelihood fit of (alpha, beta)");
  add_model(fit_cmd);
  add_graph(fit_cmd);
  fit_cmd->add_option("--snapshots", o.snapshots, "JSONL snapshots")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    structured_error(err, "usage", e.what());
    err << app.help();
    return kExitValidation;
  }

  o.command = app.get_subcommands().front()->get_name();
  try {
    if (o.command == "enumerate") return cmd_enumerate(o, out, false);
    if (o.command == "export-table") return cmd_enumerate(o, out, true);
    if (o.command == "sample") return cmd_sample(o, out, false);
    if (o.command == "dynamics") return cmd_sample(o, out, true);
    if (o.command == "verify") return cmd_verify(o, out, err);
    if (o.command == "fit") return cmd_fit(o, out);
  } catch (const NumericalError& e) {
    structured_error(err, e.kind(), e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    structured_error(err, e.kind(), e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    structured_error(err, "internal", e.what());
    return kExitNumerical;
  }
  structured_error(err, "usage", "unknown command");
  return kExitValidation;
}

}  // namespace rggm::cli
