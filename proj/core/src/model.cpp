#include "rggm/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "rggm/error.hpp"

namespace rggm {

void ModelParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ConfigError("model parameters must be finite");
  }
  if (alpha < kMinAlpha) {
    std::ostringstream msg;
    msg << "alpha must be >= " << kMinAlpha << ", got " << alpha;
    throw ConfigError(msg.str());
  }
  if (beta < 0.0) {
    std::ostringstream msg;
    msg << "beta must be >= 0, got " << beta;
    throw ConfigError(msg.str());
  }
}

namespace {

constexpr double kExponentCap = 700.0;

void require_nodes(const Topology& top, const NodeVector& x) {
  if (x.size() != top.node_count()) {
    throw ConfigError("node vector has length " + std::to_string(x.size()) +
                      " but topology has " + std::to_string(top.node_count()) + " nodes");
  }
}

void require_pair(const NodeVector& x, int i, int j) {
  if (i == j) throw DomainError("edge endpoints must differ");
  if (i < 0 || j < 0 || i >= x.size() || j >= x.size()) {
    throw DomainError("node index out of range");
  }
}

// log(1 + e^t)
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace

double hamiltonian(const Topology& top, const EdgeConfig& config, const NodeVector& x,
                   const ModelParams& params) {
  params.validate();
  require_compatible(top, config);
  require_nodes(top, x);
  double coupling = 0.0;
  const auto& edges = top.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!config.test(k)) continue;
    const double diff = x[edges[k].i] - x[edges[k].j];
    coupling += diff * diff;
  }
  return params.alpha * x.squaredNorm() + params.beta * coupling;
}

double log_joint_unnormalized(const Topology& top, const EdgeConfig& config,
                              const NodeVector& x, const ModelParams& params) {
  return -0.5 * hamiltonian(top, config, x, params);
}

double edge_prob_given_x(const NodeVector& x, int i, int j, double beta) {
  require_pair(x, i, j);
  const double diff = x[i] - x[j];
  const double t = 0.5 * beta * diff * diff;
  if (std::isnan(t)) throw DataError("non-finite node attribute");
  if (t > kExponentCap) return 0.0;
  return 1.0 / (1.0 + std::exp(t));
}

double edge_log_prob_given_x(const NodeVector& x, int i, int j, double beta, bool value) {
  require_pair(x, i, j);
  const double diff = x[i] - x[j];
  const double t = 0.5 * beta * diff * diff;
  return value ? -softplus(t) : -softplus(-t);
}

CovarianceState x_given_a_law(const Topology& top, const EdgeConfig& config,
                              const ModelParams& params) {
  return covariance_for(top, config, params);
}

double one_edge_conditional(const CovarianceState& cs, int i, int j, double beta) {
  const double d = cs.delta(i, j);
  return 1.0 / (1.0 + std::sqrt(1.0 + beta * d));
}

double one_edge_conditional(const CovarianceState& cs, const Topology& top,
                            const EdgeConfig& config, std::size_t k, double beta) {
  require_compatible(top, config);
  if (config.test(k)) {
    throw ContractError("one-edge conditional requires edge " + std::to_string(k) +
                        " to be absent from the configuration");
  }
  const auto& e = top.edge(k);
  return one_edge_conditional(cs, e.i, e.j, beta);
}

double one_edge_conditional_ratio(double delta_without, double delta_with) {
  const double s0 = std::sqrt(delta_without);
  const double s1 = std::sqrt(delta_with);
  return s1 / (s0 + s1);
}

}  // namespace rggm
