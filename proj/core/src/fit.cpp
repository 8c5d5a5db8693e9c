#include "rggm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "rggm/error.hpp"
#include "rggm/linalg.hpp"
#include "rggm/parallel.hpp"

namespace rggm {

namespace {

constexpr double kBetaShift = 1e-12;

double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// Fixed block count: partial sums are combined in block order, so results do
// not depend on how many threads ran them.
constexpr std::size_t kSnapshotBlocks = 16;

template <std::size_t K, typename F>
std::array<double, K> blocked_sum(std::size_t count, const F& term) {
  // slot `begin` holds that block's sum; the other slots stay zero
  std::vector<std::array<double, K>> partial(count, std::array<double, K>{});
  parallel_blocks(count, kSnapshotBlocks, [&](std::size_t begin, std::size_t end) {
    std::array<double, K> acc{};
    for (std::size_t s = begin; s < end; ++s) {
      const auto v = term(s);
      for (std::size_t k = 0; k < K; ++k) acc[k] += v[k];
    }
    partial[begin] = acc;
  });
  std::array<double, K> total{};
  for (const auto& p : partial)
    for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

void validate_snapshots(const Topology& top, std::span<const Snapshot> snapshots) {
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const auto& snap = snapshots[s];
    require_compatible(top, snap.config);
    if (snap.x.size() != top.node_count()) {
      throw ConfigError("snapshot " + std::to_string(s) + " has " + std::to_string(snap.x.size()) +
                        " node values, expected " + std::to_string(top.node_count()));
    }
    if (!snap.x.allFinite()) throw DataError("snapshot " + std::to_string(s) + " has non-finite x");
    if (!(snap.weight > 0.0) || !std::isfinite(snap.weight)) {
      throw DataError("snapshot " + std::to_string(s) + " has a non-positive weight");
    }
  }
}

double edge_loglik(const Topology& top, std::span<const Snapshot> snapshots, double beta) {
  validate_snapshots(top, snapshots);
  double total = 0.0;
  for (const auto& snap : snapshots) {
    double ll = 0.0;
    for (std::size_t k = 0; k < top.edge_count(); ++k) {
      const auto [i, j] = top.edge(k);
      ll += edge_log_prob_given_x(snap.x, i, j, beta, snap.config.test(k));
    }
    total += snap.weight * ll;
  }
  return total;
}

double gaussian_loglik(const Topology& top, std::span<const Snapshot> snapshots,
                       const ModelParams& params) {
  validate_snapshots(top, snapshots);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const double m = top.node_count();
  double total = 0.0;
  for (const auto& snap : snapshots) {
    const SymMatrix q = build_precision(top, snap.config, params);
    Eigen::LLT<SymMatrix> factor(q);
    if (factor.info() != Eigen::Success) throw NumericalError("Cholesky failed in gaussian_loglik");
    const double quad = snap.x.dot(q * snap.x);
    total += snap.weight * (0.5 * logdet_from_factor(factor) - 0.5 * quad - 0.5 * m * log_2pi);
  }
  return total;
}

double pseudo_loglik(const Topology& top, std::span<const Snapshot> snapshots,
                     const ModelParams& params) {
  params.validate();
  return edge_loglik(top, snapshots, params.beta) + gaussian_loglik(top, snapshots, params);
}

// ---------------------------------------------------------------------------

PseudoLikelihood::PseudoLikelihood(const Topology& top, std::span<const Snapshot> snapshots)
    : m_(top.node_count()) {
  validate_snapshots(top, snapshots);
  terms_.reserve(snapshots.size());
  for (const auto& snap : snapshots) {
    Term term;
    term.weight = snap.weight;
    const SymMatrix laplacian = build_precision(top, snap.config, {1.0, 1.0}) -
                                SymMatrix::Identity(m_, m_);
    Eigen::SelfAdjointEigenSolver<SymMatrix> eig(laplacian, Eigen::EigenvaluesOnly);
    term.laplacian_spectrum.reserve(static_cast<std::size_t>(m_));
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
      term.laplacian_spectrum.push_back(std::max(0.0, eig.eigenvalues()[k]));
    }
    term.x_norm_sq = snap.x.squaredNorm();
    for (std::size_t k = 0; k < top.edge_count(); ++k) {
      const auto [i, j] = top.edge(k);
      const double diff = snap.x[i] - snap.x[j];
      if (snap.config.test(k)) {
        term.gaps_on.push_back(0.5 * diff * diff);
        term.x_laplacian_x += diff * diff;
      } else {
        term.gaps_off.push_back(0.5 * diff * diff);
      }
    }
    terms_.push_back(std::move(term));
  }
}

double PseudoLikelihood::value(double alpha, double beta) const {
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  return blocked_sum<1>(terms_.size(), [&](std::size_t s) {
    const auto& t = terms_[s];
    double ll = -0.5 * m_ * log_2pi - 0.5 * (alpha * t.x_norm_sq + beta * t.x_laplacian_x);
    for (double lambda : t.laplacian_spectrum) ll += 0.5 * std::log(alpha + beta * lambda);
    for (double g : t.gaps_on) ll -= softplus(beta * g);
    for (double g : t.gaps_off) ll -= softplus(-beta * g);
    return std::array<double, 1>{t.weight * ll};
  })[0];
}

std::vector<std::array<double, 2>> PseudoLikelihood::scores(double alpha, double beta) const {
  std::vector<std::array<double, 2>> out(terms_.size());
  parallel_blocks(terms_.size(), kSnapshotBlocks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto& t = terms_[s];
      double da = -0.5 * t.x_norm_sq;
      double db = -0.5 * t.x_laplacian_x;
      for (double lambda : t.laplacian_spectrum) {
        const double inv = 1.0 / (alpha + beta * lambda);
        da += 0.5 * inv;
        db += 0.5 * lambda * inv;
      }
      for (double g : t.gaps_on) db -= g * sigmoid(beta * g);
      for (double g : t.gaps_off) db += g * sigmoid(-beta * g);
      out[s] = {t.weight * da, t.weight * db};
    }
  });
  return out;
}

std::array<double, 2> PseudoLikelihood::gradient(double alpha, double beta) const {
  std::array<double, 2> g{0.0, 0.0};
  for (const auto& s : scores(alpha, beta)) {
    g[0] += s[0];
    g[1] += s[1];
  }
  return g;
}

std::array<double, 3> PseudoLikelihood::hessian(double alpha, double beta) const {
  return blocked_sum<3>(terms_.size(), [&](std::size_t s) {
    const auto& t = terms_[s];
    double aa = 0.0, ab = 0.0, bb = 0.0;
    for (double lambda : t.laplacian_spectrum) {
      const double inv = 1.0 / (alpha + beta * lambda);
      aa -= 0.5 * inv * inv;
      ab -= 0.5 * lambda * inv * inv;
      bb -= 0.5 * lambda * lambda * inv * inv;
    }
    for (double g : t.gaps_on) bb -= g * g * sigmoid(beta * g) * sigmoid(-beta * g);
    for (double g : t.gaps_off) bb -= g * g * sigmoid(beta * g) * sigmoid(-beta * g);
    return std::array<double, 3>{t.weight * aa, t.weight * ab, t.weight * bb};
  });
}

// ---------------------------------------------------------------------------

namespace {

// Golden-section maximization of f on [lo, hi] after bracketing outward from
// x0 with doubling steps.
double line_maximize(const std::function<double(double)>& f, double x0, double lo, double hi,
                     double tolerance) {
  constexpr double kInvPhi = 0.6180339887498949;
  constexpr double kProbe = 1e-3;
  x0 = std::clamp(x0, lo, hi);
  const double f0 = f(x0);

  const double up = std::min(hi, x0 + kProbe);
  const double down = std::max(lo, x0 - kProbe);
  double direction = 0.0;
  if (up > x0 && f(up) > f0) {
    direction = 1.0;
  } else if (down < x0 && f(down) > f0) {
    direction = -1.0;
  }

  double a = down;
  double b = up;
  if (direction != 0.0) {
    const double bound = direction > 0 ? hi : lo;
    double behind = x0;
    double prev = x0;
    double fprev = f0;
    double step = kProbe;
    while (true) {
      const double next = std::clamp(prev + direction * step, lo, hi);
      const double fnext = f(next);
      if (fnext <= fprev) {
        a = behind;
        b = next;
        break;
      }
      if (next == bound) {
        a = prev;
        b = next;
        break;
      }
      behind = prev;
      prev = next;
      fprev = fnext;
      step *= 2.0;
    }
    if (a > b) std::swap(a, b);
  }

  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > tolerance; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double best = fc >= fd ? c : d;
  const double fbest = std::max(fc, fd);
  // endpoints matter when the maximum sits on a bound
  if (f(b) > fbest && f(b) >= f0) return b;
  if (f(a) > fbest && f(a) >= f0) return a;
  return fbest >= f0 ? best : x0;
}

}  // namespace

FitResult fit_params(const Topology& top, std::span<const Snapshot> snapshots,
                     const ModelParams& init, const FitBounds& bounds, const FitOptions& options) {
  init.validate();
  if (snapshots.empty()) throw DataError("fit needs at least one snapshot");
  if (!(bounds.alpha_min > 0.0) || bounds.alpha_max <= bounds.alpha_min || bounds.beta_max <= 0.0) {
    throw ConfigError("invalid fit bounds");
  }
  const PseudoLikelihood objective(top, snapshots);

  const std::array<double, 2> lo{std::log(bounds.alpha_min), std::log(kBetaShift)};
  const std::array<double, 2> hi{std::log(bounds.alpha_max), std::log(bounds.beta_max + kBetaShift)};
  auto to_params = [&lo](const std::array<double, 2>& theta) {
    const double beta = theta[1] <= lo[1] ? 0.0 : std::max(0.0, std::exp(theta[1]) - kBetaShift);
    return std::array<double, 2>{std::exp(theta[0]), beta};
  };
  auto value = [&](const std::array<double, 2>& theta) {
    const auto p = to_params(theta);
    return objective.value(p[0], p[1]);
  };

  std::array<double, 2> theta{std::clamp(std::log(init.alpha), lo[0], hi[0]),
                              std::clamp(std::log(init.beta + kBetaShift), lo[1], hi[1])};
  double f = value(theta);
  const double line_tol = options.param_tolerance * 1e-2;

  FitResult result;
  bool small_steps = false;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const auto start = theta;
    const double f_start = f;
    for (int c = 0; c < 2; ++c) {
      auto slice = [&](double t) {
        auto probe = theta;
        probe[c] = t;
        return value(probe);
      };
      // concave in beta at fixed alpha: a non-positive slope at beta = 0 puts
      // the maximum on the bound, where log(beta + eps) is too flat to search
      if (c == 1 && objective.gradient(std::exp(theta[0]), 0.0)[1] <= 0.0) {
        theta[1] = lo[1];
        continue;
      }
      theta[c] = line_maximize(slice, theta[c], lo[c], hi[c], line_tol);
    }
    // pattern move along the net step of this cycle
    const std::array<double, 2> dir{theta[0] - start[0], theta[1] - start[1]};
    if (std::abs(dir[0]) + std::abs(dir[1]) > 0.0) {
      double t_max = 8.0;
      for (int c = 0; c < 2; ++c) {
        if (dir[c] > 0) t_max = std::min(t_max, (hi[c] - theta[c]) / dir[c]);
        if (dir[c] < 0) t_max = std::min(t_max, (lo[c] - theta[c]) / dir[c]);
      }
      const auto base = theta;
      auto along = [&](double t) {
        return value({base[0] + t * dir[0], base[1] + t * dir[1]});
      };
      const double t = line_maximize(along, 0.0, 0.0, std::max(0.0, t_max), line_tol);
      theta = {base[0] + t * dir[0], base[1] + t * dir[1]};
    }
    f = value(theta);
    const double step = std::max(std::abs(theta[0] - start[0]), std::abs(theta[1] - start[1]));
    small_steps = step < options.param_tolerance && std::abs(f - f_start) < options.objective_tolerance;
    if (small_steps) {
      ++it;
      break;
    }
  }

  const auto p = to_params(theta);
  result.alpha_hat = p[0];
  result.beta_hat = p[1];
  result.objective = f;
  result.iterations = it;

  // projected gradient: at a bound, an outward-pointing component is not a
  // failure to converge
  auto g = objective.gradient(p[0], p[1]);
  if (theta[0] <= lo[0] + 1e-9 && g[0] < 0) g[0] = 0;
  if (theta[0] >= hi[0] - 1e-9 && g[0] > 0) g[0] = 0;
  if (theta[1] <= lo[1] + 1e-9 && g[1] < 0) g[1] = 0;
  if (theta[1] >= hi[1] - 1e-9 && g[1] > 0) g[1] = 0;
  result.gradient_norm = std::hypot(g[0], g[1]);
  result.converged = small_steps && result.gradient_norm <= options.gradient_tolerance * (1.0 + std::abs(f));

  // standard errors
  const auto h = objective.hessian(p[0], p[1]);
  Eigen::Matrix2d hess;
  hess << h[0], h[1], h[1], h[2];
  const Eigen::Matrix2d info = -hess;
  const Eigen::Matrix2d info_inv = info.inverse();
  Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
  for (const auto& s : objective.scores(p[0], p[1])) {
    const Eigen::Vector2d v(s[0], s[1]);
    meat += v * v.transpose();
  }
  const Eigen::Matrix2d sandwich = info_inv * meat * info_inv;
  result.se_alpha = std::sqrt(std::max(0.0, sandwich(0, 0)));
  result.se_beta = std::sqrt(std::max(0.0, sandwich(1, 1)));
  result.se_alpha_naive = std::sqrt(std::max(0.0, info_inv(0, 0)));
  result.se_beta_naive = std::sqrt(std::max(0.0, info_inv(1, 1)));
  return result;
}

}  // namespace rggm
