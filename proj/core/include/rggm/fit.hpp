#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rggm/graph.hpp"
#include "rggm/model.hpp"
#include "rggm/params.hpp"

namespace rggm {

// One observed (a, x) pair. Snapshots are treated as independent draws.
struct Snapshot {
  EdgeConfig config;
  NodeVector x;
  double weight = 1.0;
};

// Throws DataError on non-finite x or non-positive weight and ConfigError
// on shape mismatches.
void validate_snapshots(const Topology& top, std::span<const Snapshot> snapshots);

// sum_s w_s log mu(a_s | x_s): the logistic edge likelihood.
double edge_loglik(const Topology& top, std::span<const Snapshot> snapshots, double beta);

// sum_s w_s log phi(x_s | 0, Sigma(a_s)) with
// log phi = 1/2 log|Q(a)| - 1/2 x^T Q(a) x - (m/2) log 2 pi.
double gaussian_loglik(const Topology& top, std::span<const Snapshot> snapshots,
                       const ModelParams& params);

// Sum of the two conditional log-likelihoods. The joint normalizer is never
// needed, which is the point of using conditionals.
double pseudo_loglik(const Topology& top, std::span<const Snapshot> snapshots,
                     const ModelParams& params);

// The same objective, precomputed for repeated evaluation: Laplacian
// spectra make log|alpha I + beta L| = sum log(alpha + beta lambda_k), so
// each evaluation is O(N (m + n)) instead of N Cholesky factorizations.
class PseudoLikelihood {
 public:
  PseudoLikelihood(const Topology& top, std::span<const Snapshot> snapshots);

  double value(double alpha, double beta) const;
  // d/d(alpha, beta) of value().
  std::array<double, 2> gradient(double alpha, double beta) const;
  // Second derivatives: {d2/dalpha2, d2/dalpha dbeta, d2/dbeta2}.
  std::array<double, 3> hessian(double alpha, double beta) const;
  // Weighted per-snapshot scores w_s * grad l_s, for the sandwich estimate.
  std::vector<std::array<double, 2>> scores(double alpha, double beta) const;

  std::size_t snapshot_count() const noexcept { return terms_.size(); }

 private:
  struct Term {
    double weight = 1.0;
    std::vector<double> laplacian_spectrum;
    double x_norm_sq = 0.0;
    double x_laplacian_x = 0.0;
    std::vector<double> gaps_on;   // (x_i - x_j)^2 / 2 for present edges
    std::vector<double> gaps_off;  // ... for absent edges
  };
  std::vector<Term> terms_;
  int m_ = 0;
};

struct FitBounds {
  double alpha_min = ModelParams::kMinAlpha;
  double alpha_max = 1e8;
  double beta_max = 1e6;
};

struct FitOptions {
  int max_iterations = 500;
  double param_tolerance = 1e-8;      // max |step| in (log alpha, log(beta + eps))
  double objective_tolerance = 1e-10;
  double gradient_tolerance = 1e-6;   // relative to 1 + |objective|
};

struct FitResult {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // projected, in (alpha, beta)
  // Sandwich (robust) standard errors H^{-1} K H^{-1}; the naive
  // observed-information ones are reported alongside.
  double se_alpha = 0.0;
  double se_beta = 0.0;
  double se_alpha_naive = 0.0;
  double se_beta_naive = 0.0;
};

// Maximizes pseudo_loglik over (log alpha, log(beta + 1e-12)) by cyclic
// coordinate search with golden-section line searches (plus a pattern move
// along each cycle's net step). Never throws on non-convergence.
FitResult fit_params(const Topology& top, std::span<const Snapshot> snapshots,
                     const ModelParams& init = {1.0, 1.0}, const FitBounds& bounds = {},
                     const FitOptions& options = {});

}  // namespace rggm
