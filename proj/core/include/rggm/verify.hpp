#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rggm/graph.hpp"
#include "rggm/params.hpp"

namespace rggm {

// Algebraic identities are exact in real arithmetic; inequalities may hold
// with equality, so they get a rounding allowance below zero instead.
inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kMarginTolerance = 1e-12;
inline constexpr double kSampledSigmas = 3.0;

// One measured quantity inside a check. Identity parts pass when the worst
// residual is <= tolerance; inequality parts when the worst margin is
// >= -tolerance.
struct CheckPart {
  enum class Kind { Identity, Inequality };

  std::string name;
  Kind kind = Kind::Identity;
  double tolerance = kIdentityTolerance;
  std::size_t instances = 0;
  double worst = 0.0;  // max residual, or min margin
  nlohmann::json witness;

  bool pass() const noexcept;
  // Record one observation; `witness` is only invoked when it becomes the worst.
  void observe(double value, const std::function<nlohmann::json()>& witness);
};

struct CheckReport {
  std::string name;
  std::deque<CheckPart> parts;  // deque: add_part references stay valid
  nlohmann::json details;  // trajectories and other context

  bool pass() const noexcept;
  std::size_t instances() const noexcept;
  double max_residual() const noexcept;  // over identity parts (0 if none)
  double worst_margin() const noexcept;  // over inequality parts (+inf if none)
  // Witness of the first failing part, else of the first part.
  nlohmann::json witness() const;

  CheckPart& add_part(std::string name, CheckPart::Kind kind, double tolerance);
};

nlohmann::ordered_json to_json(const CheckReport& report);
void print_report_table(std::ostream& out, std::span<const CheckReport> reports);

struct CheckOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
};

// ---- single-instance residuals (also used to reproduce witnesses) ----------

struct Lemma1Residuals {
  double logdet = 0.0;    // |log|Sigma(a+e)| - log|Sigma(a)| + log(1 + beta delta)|
  double gap = 0.0;       // |(1 - beta delta')(1 + beta delta) - 1|
};
// Edge k must be absent from `config`. Both sides come from fresh Cholesky
// factorizations.
Lemma1Residuals lemma1_residuals(const Topology& top, const EdgeConfig& config, std::size_t k,
                                 const ModelParams& params);

struct Lemma2Residuals {
  double sigma = 0.0;  // max entrywise |rank-1 Sigma' - inverse of Q'|
  double gap = 0.0;    // |delta'_kl predicted - delta'_kl from the inverse|
};
Lemma2Residuals lemma2_residuals(const Topology& top, const EdgeConfig& config, std::size_t k,
                                 int node_k, int node_l, const ModelParams& params);

// Summands log(1 + beta delta_l(A^(l-1))) of the telescoping sum obtained by
// inserting the present edges in canonical order (0 for absent edges).
std::vector<double> martingale_increments(const Topology& top, const EdgeConfig& config,
                                          const ModelParams& params);

// ---- checks -----------------------------------------------------------------

// Determinant update and gap identity on random (config, absent edge) pairs.
CheckReport check_lemma1(const Topology& top, const ModelParams& params, const CheckOptions& options);

// Rank-1 covariance update against an independent inverse, plus the gap
// update for random node pairs.
CheckReport check_lemma2(const Topology& top, const ModelParams& params, const CheckOptions& options);

// Exhaustive one-edge conditional vs enumeration ratio (tol 1e-10) and the
// two closed forms against each other (tol 1e-12). Needs n <= 12.
CheckReport check_prop2(const Topology& top, const ModelParams& params);

struct FkgOptions {
  std::size_t exhaustive_max_edges = 4;
  std::size_t sampled_pairs = 2000;  // used above the exhaustive limit
  std::uint64_t seed = 1;
};

// Lattice condition over config pairs, covariance inequality for a library
// of increasing functions, and one-point monotonicity of the conditional.
CheckReport check_fkg(const Topology& top, const ModelParams& params, const FkgOptions& options = {});

// The FKG check over alpha in {0.5, 1, 2} x beta in {0, 0.5, 1, 4}.
CheckReport check_fkg_grid(const Topology& top, const FkgOptions& options = {});

// An increasing edge event on the first topology of a nested family.
struct IncreasingEvent {
  enum class Kind { AllPresent, AnyPresent };
  Kind kind = Kind::AllPresent;
  std::vector<std::size_t> edges;

  bool contains(const EdgeConfig& config) const;
  std::string describe() const;
};

struct MonotoneOptions {
  std::size_t exact_max_edges = 20;  // enumeration up to here, sampling beyond
  std::uint64_t sweeps = 40000;
  std::uint64_t seed = 1;
};

// mu_n(B) along the family must be nondecreasing: exactly within 1e-12
// while enumerable, within 3 combined batch-means SEs when sampled. Also
// checks mu_m(B) = mu_n(B | new edges absent) between enumerable neighbours.
CheckReport check_monotone_nested(std::span<const Topology> sequence, const IncreasingEvent& event,
                                  const ModelParams& params, const MonotoneOptions& options = {});

// For random a <= a': diag Sigma and every delta_ij decrease.
CheckReport check_variance_monotone(const Topology& top, const ModelParams& params,
                                    const CheckOptions& options);

struct MartingaleOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::size_t exhaustive_max_edges = 6;
};

// Telescoping representation of -log|Sigma(a)| on random configs and, for
// small n, the sub-martingale inequality computed from the exact table.
CheckReport check_martingale(const Topology& top, const ModelParams& params,
                             const MartingaleOptions& options = {});

// ---- suite --------------------------------------------------------------------

struct NamedTopology {
  std::string name;
  Topology topology;
};

// Paths P2..P11, cycles C3..C10, stars S2..S11, complete K2..K4, restricted
// to at most `max_edges` edges.
std::vector<NamedTopology> topology_catalog(std::size_t max_edges);

std::vector<std::string_view> suite_names();

// suite is "all" or one of suite_names(). Checks run concurrently, each on
// its own RNG stream of `seed`.
std::vector<CheckReport> run_suite(std::string_view suite, std::size_t max_edges,
                                   const ModelParams& params, std::uint64_t seed);

}  // namespace rggm
