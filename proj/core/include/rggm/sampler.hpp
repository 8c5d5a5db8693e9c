#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "rggm/graph.hpp"
#include "rggm/linalg.hpp"
#include "rggm/model.hpp"
#include "rggm/params.hpp"
#include "rggm/rng.hpp"

namespace rggm {

enum class ChainKind {
  Coupled,   // alternate A ~ mu(a | x) and X ~ N(0, Sigma(a))
  EdgeOnly,  // heat bath on mu_A through the one-edge conditional
};

enum class ScanOrder { Systematic, Random };

ChainKind parse_chain_kind(std::string_view name);
std::string_view to_string(ChainKind kind);
ScanOrder parse_scan_order(std::string_view name);
std::string_view to_string(ScanOrder scan);

struct ChainState {
  EdgeConfig config;
  NodeVector x;  // empty for edge-only chains
  CovarianceState cov;
  Rng rng;
  std::normal_distribution<double> normal;
  std::uint64_t t = 0;
};

struct RunSettings {
  std::uint64_t sweeps = 10000;
  std::optional<std::uint64_t> burnin;  // default: 10% of sweeps
  std::uint64_t thin = 1;
  std::uint64_t seed = 1;
  ScanOrder scan = ScanOrder::Systematic;
  int refresh_period = kDefaultRefreshPeriod;

  std::uint64_t resolved_burnin() const noexcept;
  std::uint64_t retained() const noexcept;
  // ConfigError unless sweeps > burnin and thin >= 1.
  void validate() const;
};

struct SampleSummary {
  ChainKind kind = ChainKind::EdgeOnly;
  RunSettings settings;  // burnin resolved
  std::size_t chains = 1;
  std::size_t retained = 0;

  std::vector<double> edge_marginals;
  std::vector<double> edge_marginal_se;  // batch means
  std::vector<double> ess_per_edge;

  double mean_logdet = 0.0;
  double mean_logdet_se = 0.0;

  // Coupled chains only: E[X_i^2] (the mean is known to be zero).
  std::vector<double> x_variance_estimates;
  std::vector<double> x_variance_se;

  // Edge state changes per executed step, over the whole run.
  std::uint64_t edge_flips = 0;
  double flips_per_step = 0.0;

  // Empirical distribution of retained configurations, indexed by mask.
  // Filled only when the topology has at most kMaxTrackedEdges edges.
  static constexpr std::size_t kMaxTrackedEdges = 16;
  std::vector<double> config_frequencies;
};

// A(0) = 0, X(0) ~ N(0, alpha^{-1} I), Sigma = alpha^{-1} I exactly. The
// generator is stream `stream` of `seed`.
ChainState init_chain(const Topology& top, const ModelParams& params, std::uint64_t seed,
                      int refresh_period = kDefaultRefreshPeriod, std::uint64_t stream = 0);

// One step of the coupled dynamics: every edge redrawn from mu(a | x), then
// x redrawn from N(0, Sigma(a)) through a fresh Cholesky factor of Q(a).
void coupled_step(ChainState& chain, const Topology& top, const ModelParams& params);

// One heat-bath sweep of n single-edge updates over mu_A, maintaining Sigma
// incrementally.
void edge_sweep(ChainState& chain, const Topology& top, const ModelParams& params,
                ScanOrder scan = ScanOrder::Systematic);

// Called for every retained step.
using SampleSink = std::function<void(const ChainState&)>;

SampleSummary run(const Topology& top, const ModelParams& params, const RunSettings& settings,
                  ChainKind kind, const SampleSink& sink = {}, std::uint64_t stream = 0);

// Independent chains on streams 0..chains-1 of settings.seed, run
// concurrently and merged.
SampleSummary run_chains(const Topology& top, const ModelParams& params,
                         const RunSettings& settings, ChainKind kind, std::size_t chains);

// Pooled summary: means averaged, standard errors combined as
// sqrt(sum se^2) / k, ESS and flip counts summed.
SampleSummary merge(const std::vector<SampleSummary>& parts);

}  // namespace rggm
