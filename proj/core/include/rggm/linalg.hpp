#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rggm/graph.hpp"
#include "rggm/params.hpp"

namespace rggm {

using SymMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kDefaultRefreshPeriod = 64;

// Q(a) = alpha I + beta L(a), L the Laplacian of the active edges.
SymMatrix build_precision(const Topology& top, const EdgeConfig& config,
                          const ModelParams& params);

// |(1 - beta delta') (1 + beta delta) - 1|: zero whenever delta' is the gap
// variance after adding the edge whose pre-add gap variance is delta.
double delta_prime_identity_residual(double delta, double delta_prime, double beta);

// Sigma(a) = Q(a)^{-1} held explicitly, with log|Sigma(a)| as a running
// scalar and Q(a) itself kept so a refresh can rebuild from scratch.
//
// Edge flips are O(m^2) Sherman-Morrison updates. Every `refresh_period`
// flips the state is rebuilt by Cholesky to bound floating-point drift
// (period 0 disables periodic refresh). Single writer; copies are
// independent.
class CovarianceState {
 public:
  CovarianceState() = default;

  // Throws NumericalError when Q is not positive definite.
  static CovarianceState from_precision(SymMatrix precision,
                                        int refresh_period = kDefaultRefreshPeriod);

  // Same, reusing an existing factorization of `precision`.
  static CovarianceState from_factor(SymMatrix precision,
                                     const Eigen::LLT<SymMatrix>& factor,
                                     int refresh_period = kDefaultRefreshPeriod);

  // alpha^{-1} I, exact.
  static CovarianceState empty(int nodes, double alpha,
                               int refresh_period = kDefaultRefreshPeriod);

  int dimension() const noexcept { return static_cast<int>(sigma_.rows()); }
  const SymMatrix& sigma() const noexcept { return sigma_; }
  const SymMatrix& precision() const noexcept { return precision_; }
  double logdet_sigma() const noexcept { return logdet_sigma_; }
  int flips_since_refresh() const noexcept { return flips_since_refresh_; }
  int refresh_period() const noexcept { return refresh_period_; }
  void set_refresh_period(int period);

  // sigma_ii + sigma_jj - 2 sigma_ij; DomainError when i == j.
  double delta(int i, int j) const;

  // Adds beta (e_i - e_j)(e_i - e_j)^T to Q. Returns the pre-add delta_ij;
  // log|Sigma| drops by log(1 + beta delta_ij).
  double add_edge(int i, int j, double beta);

  // Exact inverse of add_edge. Returns the post-removal delta_ij. When the
  // guard 1 - beta delta'_ij <= 1e-12 trips, the state is refreshed and the
  // update retried; a second failure throws NumericalError.
  double remove_edge(int i, int j, double beta);

  // Recompute Sigma and log|Sigma| from Q by Cholesky.
  void refresh();

 private:
  void apply_rank_one(int i, int j, double coefficient);
  void count_flip();
  void check_nodes(int i, int j) const;

  SymMatrix precision_;
  SymMatrix sigma_;
  double logdet_sigma_ = 0.0;
  int flips_since_refresh_ = 0;
  int refresh_period_ = kDefaultRefreshPeriod;
  Vector work_;  // rank-1 direction, reused to avoid an allocation per flip
};

// Convenience: state for (top, config, params) via a fresh Cholesky.
CovarianceState covariance_for(const Topology& top, const EdgeConfig& config,
                               const ModelParams& params,
                               int refresh_period = kDefaultRefreshPeriod);

// log|Q| from a Cholesky factor: 2 sum log L_kk.
double logdet_from_factor(const Eigen::LLT<SymMatrix>& factor);

}  // namespace rggm
