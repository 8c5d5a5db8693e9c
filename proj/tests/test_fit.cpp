#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rggm/error.hpp"
#include "rggm/fit.hpp"
#include "rggm/graph.hpp"
#include "rggm/rng.hpp"
#include "rggm/sampler.hpp"

using namespace rggm;
using doctest::Approx;

namespace {

std::vector<Snapshot> one_edge_snapshot() {
  Snapshot s;
  s.config = EdgeConfig::all_ones(1);
  s.x = NodeVector(2);
  s.x << 1.0, 0.0;
  return {s};
}

std::vector<Snapshot> random_snapshots(const Topology& top, int count, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> z;
  std::vector<Snapshot> out;
  for (int s = 0; s < count; ++s) {
    Snapshot snap;
    snap.config = EdgeConfig(top.edge_count());
    for (std::size_t k = 0; k < top.edge_count(); ++k) snap.config.set(k, uniform01(rng) < 0.3);
    snap.x = NodeVector(top.node_count());
    for (int i = 0; i < top.node_count(); ++i) snap.x(i) = z(rng);
    snap.weight = 0.5 + uniform01(rng);
    out.push_back(snap);
  }
  return out;
}

}  // namespace

TEST_CASE("single snapshot closed forms") {
  auto top = make_path(2);
  auto snaps = one_edge_snapshot();
  // half squared gap is 1/2 at beta = 1, so log mu(a|x) = -log(1 + e^{1/2})
  CHECK(edge_loglik(top, snaps, 1.0) == Approx(-std::log1p(std::exp(0.5))).epsilon(1e-12));
  CHECK(edge_loglik(top, snaps, 2.0) == Approx(-std::log1p(std::numbers::e)).epsilon(1e-12));
  // |Q| = 3, x^T Q x = 2
  const double g = 0.5 * std::log(3.0) - 1.0 - std::log(2 * std::numbers::pi);
  CHECK(gaussian_loglik(top, snaps, {1.0, 1.0}) == Approx(g).epsilon(1e-12));
  CHECK(g == Approx(-2.2885709).epsilon(1e-7));
  CHECK(pseudo_loglik(top, snaps, {1.0, 1.0}) == Approx(g - std::log1p(std::exp(0.5))).epsilon(1e-12));
}

TEST_CASE("fast objective matches the direct one") {
  auto top = make_random(9, 15, 2);
  auto snaps = random_snapshots(top, 25, 3);
  PseudoLikelihood pl(top, snaps);
  for (auto [a, b] : {std::pair{1.0, 1.0}, {0.3, 0.0}, {2.5, 4.0}, {1e-3, 50.0}}) {
    const double direct = pseudo_loglik(top, snaps, {a, b});
    CHECK(std::abs(pl.value(a, b) - direct) <= 1e-10 * (1 + std::abs(direct)));
    CHECK(edge_loglik(top, snaps, b) + gaussian_loglik(top, snaps, {a, b}) ==
          Approx(direct).epsilon(1e-13));
  }
}

TEST_CASE("analytic derivatives match central differences") {
  auto top = make_random(8, 12, 7);
  auto snaps = random_snapshots(top, 20, 8);
  PseudoLikelihood pl(top, snaps);
  const double a = 0.8, b = 1.7, h = 1e-5;
  auto g = pl.gradient(a, b);
  const double ga = (pl.value(a + h, b) - pl.value(a - h, b)) / (2 * h);
  const double gb = (pl.value(a, b + h) - pl.value(a, b - h)) / (2 * h);
  CHECK(g[0] == Approx(ga).epsilon(1e-4));
  CHECK(g[1] == Approx(gb).epsilon(1e-4));
  auto H = pl.hessian(a, b);
  auto gpa = pl.gradient(a + h, b), gma = pl.gradient(a - h, b);
  auto gpb = pl.gradient(a, b + h), gmb = pl.gradient(a, b - h);
  CHECK(H[0] == Approx((gpa[0] - gma[0]) / (2 * h)).epsilon(1e-4));
  CHECK(H[1] == Approx((gpb[0] - gmb[0]) / (2 * h)).epsilon(1e-4));
  CHECK(H[2] == Approx((gpb[1] - gmb[1]) / (2 * h)).epsilon(1e-4));
  auto sc = pl.scores(a, b);
  double s0 = 0, s1 = 0;
  for (auto& s : sc) {
    s0 += s[0];
    s1 += s[1];
  }
  CHECK(s0 == Approx(g[0]).epsilon(1e-10));
  CHECK(s1 == Approx(g[1]).epsilon(1e-10));
}

TEST_CASE("weights scale the objective") {
  auto top = make_cycle(5);
  auto snaps = random_snapshots(top, 6, 1);
  const double base = pseudo_loglik(top, snaps, {1.2, 0.4});
  for (auto& s : snaps) s.weight *= 3.0;
  CHECK(pseudo_loglik(top, snaps, {1.2, 0.4}) == Approx(3 * base).epsilon(1e-12));
}

TEST_CASE("alpha on empty data is one over the sample variance") {
  auto top = make_path(6);
  auto rng = make_rng(17);
  std::normal_distribution<double> z(0.0, 0.5);
  std::vector<Snapshot> snaps;
  double ss = 0;
  for (int s = 0; s < 300; ++s) {
    Snapshot snap{EdgeConfig(top.edge_count()), NodeVector(6), 1.0};
    for (int i = 0; i < 6; ++i) {
      snap.x(i) = z(rng);
      ss += snap.x(i) * snap.x(i);
    }
    snaps.push_back(snap);
  }
  auto r = fit_params(top, snaps);
  CHECK(r.converged);
  CHECK(r.alpha_hat == Approx(300 * 6 / ss).epsilon(1e-6));
  // all edges absent: the edge term only improves with beta, so the bound binds
  CHECK(r.beta_hat == Approx(FitBounds{}.beta_max));
}

TEST_CASE("recovers parameters from coupled-chain data") {
  auto top = make_random(15, 25, 11);
  const ModelParams truth{1.0, 2.0};
  RunSettings st;
  st.sweeps = 12000;
  st.burnin = 2000;
  st.thin = 25;
  st.seed = 5;
  std::vector<Snapshot> snaps;
  run(top, truth, st, ChainKind::Coupled,
      [&](const ChainState& c) { snaps.push_back({c.config, c.x, 1.0}); });
  REQUIRE(snaps.size() == 400);
  auto r = fit_params(top, snaps, {0.5, 0.5});
  CHECK(r.converged);
  CHECK(std::abs(r.alpha_hat - truth.alpha) < 3 * r.se_alpha);
  CHECK(std::abs(r.beta_hat - truth.beta) < 3 * r.se_beta);
  CHECK(r.se_alpha > 0);
  CHECK(r.se_beta > 0);
}

TEST_CASE("bad input") {
  auto top = make_path(3);
  std::vector<Snapshot> none;
  CHECK_THROWS(fit_params(top, none));
  std::vector<Snapshot> bad{{EdgeConfig(2), NodeVector::Constant(3, NAN), 1.0}};
  CHECK_THROWS_AS(validate_snapshots(top, bad), DataError);
  std::vector<Snapshot> shape{{EdgeConfig(1), NodeVector::Zero(3), 1.0}};
  CHECK_THROWS_AS(validate_snapshots(top, shape), ConfigError);
  std::vector<Snapshot> w{{EdgeConfig(2), NodeVector::Zero(3), 0.0}};
  CHECK_THROWS_AS(validate_snapshots(top, w), DataError);
}

TEST_CASE("decoupled data converges onto beta = 0") {
  auto top = make_random(12, 24, 3);
  RunSettings st;
  st.sweeps = 6000;
  st.burnin = 1000;
  st.thin = 20;
  st.seed = 8;
  std::vector<Snapshot> snaps;
  run(top, {1.0, 0.0}, st, ChainKind::Coupled,
      [&](const ChainState& c) { snaps.push_back({c.config, c.x, 1.0}); });
  auto r = fit_params(top, snaps, {2.0, 3.0});
  CHECK(r.converged);
  CHECK(r.iterations < 50);
  CHECK(r.beta_hat <= 0.05);
  CHECK(r.alpha_hat == Approx(1.0).epsilon(0.1));
}
