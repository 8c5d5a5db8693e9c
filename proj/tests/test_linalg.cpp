#include <doctest.h>

#include <cmath>

#include "rggm/error.hpp"
#include "rggm/graph.hpp"
#include "rggm/linalg.hpp"
#include "rggm/rng.hpp"

using namespace rggm;
using doctest::Approx;

namespace {

double max_abs(const SymMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("precision of the path") {
  auto top = make_path(3);
  auto q = build_precision(top, EdgeConfig::all_ones(2), {2.0, 0.5});
  SymMatrix want(3, 3);
  want << 2.5, -0.5, 0, -0.5, 3.0, -0.5, 0, -0.5, 2.5;
  CHECK(max_abs(q - want) == 0.0);
}

TEST_CASE("empty state is alpha^-1 I") {
  auto cs = CovarianceState::empty(4, 2.0);
  CHECK(cs.logdet_sigma() == Approx(-4 * std::log(2.0)));
  CHECK(cs.delta(0, 3) == Approx(1.0));
  CHECK_THROWS_AS(cs.delta(1, 1), DomainError);
}

TEST_CASE("rank one add matches a fresh factorization") {
  // P3, alpha = beta = 1: adding (0,1) gives delta = 2, logdet drops by log 3
  auto cs = CovarianceState::empty(3, 1.0);
  double d = cs.add_edge(0, 1, 1.0);
  CHECK(d == Approx(2.0));
  CHECK(cs.logdet_sigma() == Approx(-std::log(3.0)));
  CHECK(cs.delta(1, 2) == Approx(5.0 / 3.0));

  auto top = make_path(3);
  auto ref = covariance_for(top, EdgeConfig::from_mask(1, 2), {1.0, 1.0});
  CHECK(max_abs(cs.sigma() - ref.sigma()) < 1e-14);
  CHECK(cs.logdet_sigma() == Approx(ref.logdet_sigma()).epsilon(1e-14));
}

TEST_CASE("add then remove is the identity") {
  auto top = make_random(12, 30, 9);
  ModelParams p{0.7, 1.3};
  auto rng = make_rng(4);
  EdgeConfig a(top.edge_count());
  for (std::size_t k = 0; k < a.size(); ++k) a.set(k, uniform01(rng) < 0.5);
  auto cs = covariance_for(top, a, p);
  const SymMatrix sigma0 = cs.sigma();
  const double ld0 = cs.logdet_sigma();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto e = top.edge(k);
    if (a.test(k)) {
      const double with = cs.delta(e.i, e.j);
      const double without = cs.remove_edge(e.i, e.j, p.beta);
      // delta' = delta / (1 + beta delta)
      CHECK(delta_prime_identity_residual(without, with, p.beta) < 1e-10);
      CHECK(cs.add_edge(e.i, e.j, p.beta) == Approx(without).epsilon(1e-12));
    } else {
      cs.add_edge(e.i, e.j, p.beta);
      cs.remove_edge(e.i, e.j, p.beta);
    }
  }
  CHECK(max_abs(cs.sigma() - sigma0) < 1e-10);
  CHECK(cs.logdet_sigma() == Approx(ld0).epsilon(1e-12));
}

TEST_CASE("long random walk stays close to the direct inverse") {
  auto top = make_random(40, 120, 2);
  ModelParams p{1.0, 2.0};
  auto rng = make_rng(8);
  for (int period : {0, 16}) {
    auto cs = CovarianceState::empty(top.node_count(), p.alpha, period);
    EdgeConfig a(top.edge_count());
    for (int step = 0; step < 3000; ++step) {
      auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(a.size()));
      const auto e = top.edge(k);
      if (a.test(k)) cs.remove_edge(e.i, e.j, p.beta);
      else cs.add_edge(e.i, e.j, p.beta);
      a.flip(k);
    }
    auto ref = covariance_for(top, a, p);
    CHECK(max_abs(cs.sigma() - ref.sigma()) < 1e-9);
    CHECK(std::abs(cs.logdet_sigma() - ref.logdet_sigma()) < 1e-9);
    CHECK(max_abs(cs.precision() - ref.precision()) < 1e-12);
    if (period > 0) CHECK(cs.flips_since_refresh() < period);
  }
}

TEST_CASE("beta zero leaves sigma untouched") {
  auto cs = CovarianceState::empty(3, 2.0);
  cs.add_edge(0, 2, 0.0);
  CHECK(cs.sigma()(0, 2) == 0.0);
  CHECK(cs.logdet_sigma() == Approx(-3 * std::log(2.0)));
}
