#include "rggm/linalg.hpp"

#include <cmath>
#include <string>

#include "rggm/error.hpp"

namespace rggm {

namespace {

constexpr double kRemovalGuard = 1e-12;

}  // namespace

SymMatrix build_precision(const Topology& top, const EdgeConfig& config,
                          const ModelParams& params) {
  params.validate();
  require_compatible(top, config);
  const int m = top.node_count();
  SymMatrix q = SymMatrix::Identity(m, m) * params.alpha;
  const auto& edges = top.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!config.test(k)) continue;
    const auto [i, j] = edges[k];
    q(i, i) += params.beta;
    q(j, j) += params.beta;
    q(i, j) -= params.beta;
    q(j, i) -= params.beta;
  }
  return q;
}

double delta_prime_identity_residual(double delta, double delta_prime, double beta) {
  return std::abs((1.0 - beta * delta_prime) * (1.0 + beta * delta) - 1.0);
}

double logdet_from_factor(const Eigen::LLT<SymMatrix>& factor) {
  const auto& lower = factor.matrixLLT();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < lower.rows(); ++k) sum += std::log(lower(k, k));
  return 2.0 * sum;
}

CovarianceState CovarianceState::from_precision(SymMatrix precision, int refresh_period) {
  Eigen::LLT<SymMatrix> factor(precision);
  return from_factor(std::move(precision), factor, refresh_period);
}

CovarianceState CovarianceState::from_factor(SymMatrix precision,
                                             const Eigen::LLT<SymMatrix>& factor,
                                             int refresh_period) {
  if (factor.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of the precision matrix failed");
  }
  CovarianceState cs;
  cs.set_refresh_period(refresh_period);
  const auto m = precision.rows();
  cs.sigma_ = factor.solve(SymMatrix::Identity(m, m));
  cs.sigma_ = 0.5 * (cs.sigma_ + cs.sigma_.transpose()).eval();
  cs.logdet_sigma_ = -logdet_from_factor(factor);
  cs.precision_ = std::move(precision);
  return cs;
}

CovarianceState CovarianceState::empty(int nodes, double alpha, int refresh_period) {
  ModelParams{alpha, 0.0}.validate();
  CovarianceState cs;
  cs.set_refresh_period(refresh_period);
  cs.precision_ = SymMatrix::Identity(nodes, nodes) * alpha;
  cs.sigma_ = SymMatrix::Identity(nodes, nodes) / alpha;
  cs.logdet_sigma_ = -nodes * std::log(alpha);
  return cs;
}

void CovarianceState::set_refresh_period(int period) {
  if (period < 0) throw ConfigError("refresh period must be non-negative");
  refresh_period_ = period;
}

void CovarianceState::check_nodes(int i, int j) const {
  const int m = dimension();
  if (i < 0 || j < 0 || i >= m || j >= m) {
    throw DomainError("node index out of range");
  }
  if (i == j) throw DomainError("gap variance needs two distinct nodes");
}

double CovarianceState::delta(int i, int j) const {
  check_nodes(i, j);
  return sigma_(i, i) + sigma_(j, j) - 2.0 * sigma_(i, j);
}

void CovarianceState::apply_rank_one(int i, int j, double coefficient) {
  // Sigma -= c * w w^T with w = Sigma (e_i - e_j)
  work_ = sigma_.col(i) - sigma_.col(j);
  for (Eigen::Index c = 0; c < sigma_.cols(); ++c) sigma_.col(c) -= (coefficient * work_(c)) * work_;
}

void CovarianceState::count_flip() {
  ++flips_since_refresh_;
  if (refresh_period_ > 0 && flips_since_refresh_ >= refresh_period_) refresh();
}

double CovarianceState::add_edge(int i, int j, double beta) {
  const double d = delta(i, j);
  if (beta == 0.0) return d;
  const double denom = 1.0 + beta * d;
  apply_rank_one(i, j, beta / denom);
  logdet_sigma_ -= std::log1p(beta * d);
  precision_(i, i) += beta;
  precision_(j, j) += beta;
  precision_(i, j) -= beta;
  precision_(j, i) -= beta;
  count_flip();
  return d;
}

double CovarianceState::remove_edge(int i, int j, double beta) {
  check_nodes(i, j);
  if (beta == 0.0) return delta(i, j);
  double d_prime = delta(i, j);
  double denom = 1.0 - beta * d_prime;
  if (!(denom > kRemovalGuard)) {
    refresh();
    d_prime = delta(i, j);
    denom = 1.0 - beta * d_prime;
    if (!(denom > kRemovalGuard)) {
      throw NumericalError("edge removal guard failed after refresh: 1 - beta*delta' = " +
                           std::to_string(denom));
    }
  }
  apply_rank_one(i, j, -beta / denom);
  logdet_sigma_ -= std::log(denom);
  precision_(i, i) -= beta;
  precision_(j, j) -= beta;
  precision_(i, j) += beta;
  precision_(j, i) += beta;
  count_flip();
  return delta(i, j);
}

void CovarianceState::refresh() {
  Eigen::LLT<SymMatrix> factor(precision_);
  if (factor.info() != Eigen::Success) {
    throw NumericalError("Cholesky refresh failed; precision matrix corrupted");
  }
  const auto m = precision_.rows();
  sigma_ = factor.solve(SymMatrix::Identity(m, m));
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
  logdet_sigma_ = -logdet_from_factor(factor);
  flips_since_refresh_ = 0;
}

CovarianceState covariance_for(const Topology& top, const EdgeConfig& config,
                               const ModelParams& params, int refresh_period) {
  return CovarianceState::from_precision(build_precision(top, config, params),
                                         refresh_period);
}

}  // namespace rggm
