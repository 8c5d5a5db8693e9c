#pragma once

#include <cstddef>

#include "rggm/graph.hpp"
#include "rggm/linalg.hpp"
#include "rggm/params.hpp"

namespace rggm {

using NodeVector = Eigen::VectorXd;

// H(a, x) = alpha sum x_i^2 + beta sum_{(i,j) in E} a_ij (x_i - x_j)^2,
// evaluated as the explicit sum (equal to x^T Q(a) x).
double hamiltonian(const Topology& top, const EdgeConfig& config, const NodeVector& x,
                   const ModelParams& params);

// -H(a, x) / 2. The normalizer Z is not computed.
double log_joint_unnormalized(const Topology& top, const EdgeConfig& config,
                              const NodeVector& x, const ModelParams& params);

// P(a_ij = 1 | x) = 1 / (1 + exp(beta (x_i - x_j)^2 / 2)), always in [0, 1/2].
// The 1/2 comes from the exp(-H/2) joint; it is what makes the coupled chain
// leave mu_A invariant.
// The exponent is capped at 700; beyond it the exact limit 0 is returned.
double edge_prob_given_x(const NodeVector& x, int i, int j, double beta);

// log P(a_ij = value | x), computed with a stable softplus so the fitter
// never loses precision in the tails.
double edge_log_prob_given_x(const NodeVector& x, int i, int j, double beta, bool value);

// Law of X given A = a: N(0, Sigma(a)). The mean is identically zero, so
// the covariance state is the whole specification.
CovarianceState x_given_a_law(const Topology& top, const EdgeConfig& config,
                              const ModelParams& params);

// mu(A_ij = 1 | all other edges) for an edge (i, j) absent from the config
// that `cs` represents: 1 / (1 + sqrt(1 + beta delta_ij)).
double one_edge_conditional(const CovarianceState& cs, int i, int j, double beta);

// Checked form: throws ContractError if edge k is present in `config`.
// `cs` must represent `config`.
double one_edge_conditional(const CovarianceState& cs, const Topology& top,
                            const EdgeConfig& config, std::size_t k, double beta);

// Equivalent ratio form sqrt(delta1) / (sqrt(delta0) + sqrt(delta1)), with
// delta0 the gap variance without the edge and delta1 with it.
double one_edge_conditional_ratio(double delta_without, double delta_with);

}  // namespace rggm
