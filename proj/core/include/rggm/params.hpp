#pragma once

namespace rggm {

// alpha scales the node precision, beta couples nodes joined by an active
// edge. alpha is bounded away from zero so Q(a) stays uniformly positive
// definite.
struct ModelParams {
  static constexpr double kMinAlpha = 1e-8;

  double alpha = 1.0;
  double beta = 0.0;

  // Throws ConfigError unless alpha >= kMinAlpha, beta >= 0, both finite.
  void validate() const;
};

}  // namespace rggm
