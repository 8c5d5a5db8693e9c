#include "rggm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "rggm/error.hpp"

#ifndef RGGM_VERSION
#define RGGM_VERSION "0.0.0"
#endif

namespace rggm {

using nlohmann::ordered_json;

std::string_view tool_version() { return RGGM_VERSION; }

LabeledGraph parse_graph(std::istream& in) {
  LabeledGraph out;
  std::unordered_map<std::string, int> ids;
  auto id_of = [&](const std::string& label) {
    auto [it, inserted] = ids.try_emplace(label, static_cast<int>(out.labels.size()));
    if (inserted) out.labels.push_back(label);
    return it->second;
  };

  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.empty()) continue;
    if (fields.size() != 2) {
      throw DataError("line " + std::to_string(line_no) + ": expected two node labels, got " +
                      std::to_string(fields.size()));
    }
    if (fields[0] == fields[1]) {
      throw DataError("line " + std::to_string(line_no) + ": self-loop at '" + fields[0] + "'");
    }
    edges.push_back({id_of(fields[0]), id_of(fields[1])});
  }
  try {
    out.topology = Topology(static_cast<int>(out.labels.size()), std::move(edges));
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid graph: ") + e.what());
  }
  return out;
}

LabeledGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file " + path.string());
  return parse_graph(in);
}

std::vector<Snapshot> parse_snapshots(std::istream& in, const Topology& top) {
  std::vector<Snapshot> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "snapshot line " + std::to_string(line_no) + ": ";
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + e.what());
    }
    if (!record.is_object()) throw DataError(where + "expected a JSON object");
    if (record.contains("meta")) continue;
    if (!record.contains("config_bits_hex") || !record["config_bits_hex"].is_string()) {
      throw DataError(where + "missing config_bits_hex");
    }
    if (!record.contains("x") || !record["x"].is_array()) throw DataError(where + "missing x");
    const auto& xs = record["x"];
    if (xs.size() != static_cast<std::size_t>(top.node_count())) {
      throw DataError(where + "x has " + std::to_string(xs.size()) + " entries, expected " +
                      std::to_string(top.node_count()));
    }
    Snapshot snap;
    try {
      snap.config = EdgeConfig::from_hex(record["config_bits_hex"].get<std::string>(), top.edge_count());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    snap.x.resize(top.node_count());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!xs[i].is_number()) throw DataError(where + "x entries must be numbers");
      snap.x[static_cast<Eigen::Index>(i)] = xs[i].get<double>();
    }
    if (record.contains("weight")) {
      if (!record["weight"].is_number()) throw DataError(where + "weight must be a number");
      snap.weight = record["weight"].get<double>();
    }
    out.push_back(std::move(snap));
  }
  validate_snapshots(top, out);
  return out;
}

std::vector<Snapshot> load_snapshots(const std::filesystem::path& path, const Topology& top) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open snapshot file " + path.string());
  return parse_snapshots(in, top);
}

void write_snapshots(std::ostream& out, std::span<const Snapshot> snapshots) {
  for (const auto& snap : snapshots) {
    ordered_json record;
    record["config_bits_hex"] = snap.config.to_hex();
    record["x"] = std::vector<double>(snap.x.begin(), snap.x.end());
    record["weight"] = snap.weight;
    out << record.dump() << '\n';
  }
}

ordered_json make_metadata(const ordered_json& run_config, std::uint64_t seed, const Topology& top) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(top.hash()));
  ordered_json meta;
  meta["tool"] = "rggm";
  meta["version"] = std::string(tool_version());
  meta["run_config"] = run_config;
  meta["seed"] = seed;
  meta["topology_hash"] = hash;
  meta["nodes"] = top.node_count();
  meta["edges"] = top.edge_count();
  return meta;
}

namespace {

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

ordered_json finite_array(const std::vector<double>& v) {
  ordered_json out = ordered_json::array();
  for (double d : v) out.push_back(finite_or_null(d));
  return out;
}

}  // namespace

ordered_json to_json(const SampleSummary& s) {
  ordered_json out;
  out["kind"] = std::string(to_string(s.kind));
  ordered_json settings;
  settings["sweeps"] = s.settings.sweeps;
  settings["burnin"] = s.settings.resolved_burnin();
  settings["thin"] = s.settings.thin;
  settings["seed"] = s.settings.seed;
  settings["scan"] = std::string(to_string(s.settings.scan));
  settings["refresh_period"] = s.settings.refresh_period;
  out["settings"] = settings;
  out["chains"] = s.chains;
  out["retained"] = s.retained;
  out["edge_marginals"] = finite_array(s.edge_marginals);
  out["edge_marginal_se"] = finite_array(s.edge_marginal_se);
  out["ess_per_edge"] = finite_array(s.ess_per_edge);
  out["mean_logdet"] = finite_or_null(s.mean_logdet);
  out["mean_logdet_se"] = finite_or_null(s.mean_logdet_se);
  if (!s.x_variance_estimates.empty()) {
    out["x_variance_estimates"] = finite_array(s.x_variance_estimates);
    out["x_variance_se"] = finite_array(s.x_variance_se);
  }
  out["edge_flips"] = s.edge_flips;
  out["flips_per_step"] = s.flips_per_step;
  if (!s.config_frequencies.empty()) out["config_frequencies"] = s.config_frequencies;
  return out;
}

ordered_json to_json(const FitResult& r) {
  ordered_json out;
  out["alpha_hat"] = r.alpha_hat;
  out["beta_hat"] = r.beta_hat;
  out["objective"] = r.objective;
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["gradient_norm"] = r.gradient_norm;
  out["se_alpha"] = finite_or_null(r.se_alpha);
  out["se_beta"] = finite_or_null(r.se_beta);
  out["se_alpha_naive"] = finite_or_null(r.se_alpha_naive);
  out["se_beta_naive"] = finite_or_null(r.se_beta_naive);
  return out;
}

ordered_json to_json(const MeasureTable& table, bool with_mixture_covariance) {
  const std::size_t n = table.edge_count();
  ordered_json out;
  out["alpha"] = table.params.alpha;
  out["beta"] = table.params.beta;
  out["log_kappa"] = table.log_kappa;
  ordered_json rows = ordered_json::array();
  std::vector<double> marginals(n, 0.0);
  for (const auto& r : table.rows) {
    rows.push_back({{"config_bits_hex", EdgeConfig::from_mask(r.mask, n).to_hex()},
                    {"half_logdet", r.half_logdet},
                    {"prob", r.prob}});
    for (std::size_t k = 0; k < n; ++k) {
      if (r.mask >> k & 1U) marginals[k] += r.prob;
    }
  }
  out["edge_marginals"] = marginals;
  if (with_mixture_covariance) {
    const auto cov = mixture_covariance(table);
    ordered_json matrix = ordered_json::array();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      std::vector<double> row(cov.cols());
      for (Eigen::Index j = 0; j < cov.cols(); ++j) row[static_cast<std::size_t>(j)] = cov(i, j);
      matrix.push_back(row);
    }
    out["mixture_covariance"] = matrix;
  }
  out["rows"] = rows;
  return out;
}

ordered_json stream_record(const ChainState& chain) {
  ordered_json out;
  out["t"] = chain.t;
  out["config_bits_hex"] = chain.config.to_hex();
  out["logdet_sigma"] = chain.cov.logdet_sigma() + 0.0;  // no -0
  if (chain.x.size() > 0) out["x"] = std::vector<double>(chain.x.begin(), chain.x.end());
  return out;
}

}  // namespace rggm
