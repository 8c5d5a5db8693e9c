#include "rggm/sampler.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "rggm/error.hpp"
#include "rggm/parallel.hpp"
#include "rggm/stats.hpp"

namespace rggm {

ChainKind parse_chain_kind(std::string_view name) {
  if (name == "coupled") return ChainKind::Coupled;
  if (name == "edges" || name == "edge_only") return ChainKind::EdgeOnly;
  throw ConfigError("unknown chain kind '" + std::string(name) + "'");
}

std::string_view to_string(ChainKind kind) {
  return kind == ChainKind::Coupled ? "coupled" : "edges";
}

ScanOrder parse_scan_order(std::string_view name) {
  if (name == "systematic") return ScanOrder::Systematic;
  if (name == "random") return ScanOrder::Random;
  throw ConfigError("unknown scan order '" + std::string(name) + "'");
}

std::string_view to_string(ScanOrder scan) {
  return scan == ScanOrder::Systematic ? "systematic" : "random";
}

std::uint64_t RunSettings::resolved_burnin() const noexcept {
  return burnin.value_or(sweeps / 10);
}

std::uint64_t RunSettings::retained() const noexcept {
  const auto b = resolved_burnin();
  if (sweeps <= b || thin == 0) return 0;
  return (sweeps - b) / thin;
}

void RunSettings::validate() const {
  if (sweeps == 0) throw ConfigError("sweeps must be positive");
  if (thin == 0) throw ConfigError("thin must be >= 1");
  if (resolved_burnin() >= sweeps) throw ConfigError("burnin must be smaller than sweeps");
  if (refresh_period < 0) throw ConfigError("refresh period must be non-negative");
}

ChainState init_chain(const Topology& top, const ModelParams& params, std::uint64_t seed,
                      int refresh_period, std::uint64_t stream) {
  params.validate();
  ChainState chain{EdgeConfig(top.edge_count()), NodeVector(top.node_count()),
                   CovarianceState::empty(top.node_count(), params.alpha, refresh_period),
                   make_rng(seed, stream), std::normal_distribution<double>(0.0, 1.0), 0};
  const double scale = 1.0 / std::sqrt(params.alpha);
  for (int i = 0; i < top.node_count(); ++i) chain.x[i] = scale * chain.normal(chain.rng);
  return chain;
}

void coupled_step(ChainState& chain, const Topology& top, const ModelParams& params) {
  const auto& edges = top.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double p = edge_prob_given_x(chain.x, edges[k].i, edges[k].j, params.beta);
    chain.config.set(k, uniform01(chain.rng) < p);
  }

  SymMatrix q = build_precision(top, chain.config, params);
  Eigen::LLT<SymMatrix> factor(q);
  if (factor.info() != Eigen::Success) throw NumericalError("Cholesky failed in coupled step");

  // Q = L L^T, so x = L^{-T} z has covariance Q^{-1}.
  NodeVector z(top.node_count());
  for (int i = 0; i < top.node_count(); ++i) z[i] = chain.normal(chain.rng);
  chain.x = factor.matrixU().solve(z);

  chain.cov = CovarianceState::from_factor(std::move(q), factor, chain.cov.refresh_period());
  ++chain.t;
}

void edge_sweep(ChainState& chain, const Topology& top, const ModelParams& params,
                ScanOrder scan) {
  const std::size_t n = top.edge_count();
  if (n == 0) {
    ++chain.t;
    return;
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t k = scan == ScanOrder::Systematic ? s : pick(chain.rng);
    const auto [i, j] = top.edge(k);
    if (chain.config.test(k)) chain.cov.remove_edge(i, j, params.beta);
    const double q = one_edge_conditional(chain.cov, i, j, params.beta);
    const bool on = uniform01(chain.rng) < q;
    if (on) chain.cov.add_edge(i, j, params.beta);
    chain.config.set(k, on);
  }
  ++chain.t;
}

namespace {

std::uint64_t hamming(const EdgeConfig& a, const EdgeConfig& b) {
  auto wa = a.words();
  auto wb = b.words();
  std::uint64_t d = 0;
  for (std::size_t w = 0; w < wa.size(); ++w) d += std::popcount(wa[w] ^ wb[w]);
  return d;
}

}  // namespace

SampleSummary run(const Topology& top, const ModelParams& params, const RunSettings& settings,
                  ChainKind kind, const SampleSink& sink, std::uint64_t stream) {
  settings.validate();
  params.validate();

  const std::size_t n = top.edge_count();
  const int m = top.node_count();
  const std::uint64_t burnin = settings.resolved_burnin();
  const std::size_t batch = BatchMeans::default_batch_size(settings.retained());
  const bool coupled = kind == ChainKind::Coupled;
  const bool track_configs = n <= SampleSummary::kMaxTrackedEdges;

  std::vector<BatchMeans> edge_stats(n, BatchMeans(batch));
  std::vector<BatchMeans> x_stats(coupled ? m : 0, BatchMeans(batch));
  BatchMeans logdet_stats(batch);
  std::vector<double> config_counts(track_configs ? (std::size_t{1} << n) : 0, 0.0);

  auto chain = init_chain(top, params, settings.seed, settings.refresh_period, stream);
  if (!coupled) chain.x.resize(0);

  std::uint64_t flips = 0;
  EdgeConfig previous = chain.config;
  for (std::uint64_t step = 1; step <= settings.sweeps; ++step) {
    if (coupled) {
      coupled_step(chain, top, params);
    } else {
      edge_sweep(chain, top, params, settings.scan);
    }
    flips += hamming(previous, chain.config);
    previous = chain.config;

    if (step <= burnin || (step - burnin) % settings.thin != 0) continue;
    for (std::size_t k = 0; k < n; ++k) edge_stats[k].add(chain.config.test(k) ? 1.0 : 0.0);
    for (int i = 0; i < static_cast<int>(x_stats.size()); ++i) x_stats[i].add(chain.x[i] * chain.x[i]);
    logdet_stats.add(chain.cov.logdet_sigma());
    if (track_configs) config_counts[chain.config.to_mask()] += 1.0;
    if (sink) sink(chain);
  }

  SampleSummary summary;
  summary.kind = kind;
  summary.settings = settings;
  summary.settings.burnin = burnin;
  summary.retained = logdet_stats.count();
  for (const auto& s : edge_stats) {
    summary.edge_marginals.push_back(s.mean());
    summary.edge_marginal_se.push_back(s.standard_error());
    summary.ess_per_edge.push_back(s.effective_sample_size());
  }
  summary.mean_logdet = logdet_stats.mean();
  summary.mean_logdet_se = logdet_stats.standard_error();
  for (const auto& s : x_stats) {
    summary.x_variance_estimates.push_back(s.mean());
    summary.x_variance_se.push_back(s.standard_error());
  }
  summary.edge_flips = flips;
  summary.flips_per_step = static_cast<double>(flips) / static_cast<double>(settings.sweeps);
  if (track_configs && summary.retained > 0) {
    for (auto& c : config_counts) c /= static_cast<double>(summary.retained);
  }
  summary.config_frequencies = std::move(config_counts);
  return summary;
}

SampleSummary run_chains(const Topology& top, const ModelParams& params,
                         const RunSettings& settings, ChainKind kind, std::size_t chains) {
  if (chains == 0) throw ConfigError("need at least one chain");
  std::vector<SampleSummary> parts(chains);
  parallel_blocks(chains, chains, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) parts[c] = run(top, params, settings, kind, {}, c);
  });
  return merge(parts);
}

namespace {

void average_into(std::vector<double>& acc, const std::vector<double>& v, double k) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i] / k;
}

void square_sum_into(std::vector<double>& acc, const std::vector<double>& v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i] * v[i];
}

}  // namespace

SampleSummary merge(const std::vector<SampleSummary>& parts) {
  if (parts.empty()) throw ConfigError("nothing to merge");
  const double k = static_cast<double>(parts.size());
  SampleSummary out;
  out.kind = parts.front().kind;
  out.settings = parts.front().settings;
  out.chains = 0;
  double logdet_se_sq = 0.0;
  std::uint64_t steps = 0;
  for (const auto& p : parts) {
    out.chains += p.chains;
    out.retained += p.retained;
    average_into(out.edge_marginals, p.edge_marginals, k);
    square_sum_into(out.edge_marginal_se, p.edge_marginal_se);
    if (out.ess_per_edge.empty()) out.ess_per_edge.assign(p.ess_per_edge.size(), 0.0);
    for (std::size_t i = 0; i < p.ess_per_edge.size(); ++i) out.ess_per_edge[i] += p.ess_per_edge[i];
    out.mean_logdet += p.mean_logdet / k;
    logdet_se_sq += p.mean_logdet_se * p.mean_logdet_se;
    average_into(out.x_variance_estimates, p.x_variance_estimates, k);
    square_sum_into(out.x_variance_se, p.x_variance_se);
    out.edge_flips += p.edge_flips;
    steps += p.settings.sweeps * p.chains;
    average_into(out.config_frequencies, p.config_frequencies, k);
  }
  for (auto& s : out.edge_marginal_se) s = std::sqrt(s) / k;
  for (auto& s : out.x_variance_se) s = std::sqrt(s) / k;
  out.mean_logdet_se = std::sqrt(logdet_se_sq) / k;
  out.flips_per_step = steps == 0 ? 0.0 : static_cast<double>(out.edge_flips) / static_cast<double>(steps);
  return out;
}

}  // namespace rggm
