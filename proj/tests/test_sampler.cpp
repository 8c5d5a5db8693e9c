#include <doctest.h>

#include <cmath>

#include "rggm/error.hpp"
#include "rggm/graph.hpp"
#include "rggm/oracle.hpp"
#include "rggm/sampler.hpp"

using namespace rggm;
using doctest::Approx;

namespace {

RunSettings settings(std::uint64_t sweeps, std::uint64_t seed) {
  RunSettings s;
  s.sweeps = sweeps;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("settings validation") {
  auto s = settings(100, 1);
  CHECK(s.resolved_burnin() == 10);
  CHECK(s.retained() == 90);
  s.thin = 4;
  CHECK(s.retained() == 22);  // steps 14, 18, ..., 98
  s.burnin = 100;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.burnin = 5;
  s.thin = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(parse_chain_kind("edges") == ChainKind::EdgeOnly);
  CHECK(parse_chain_kind("coupled") == ChainKind::Coupled);
  CHECK_THROWS(parse_chain_kind("metropolis"));
}

TEST_CASE("chains start empty with sigma = I / alpha") {
  auto top = make_path(4);
  auto c = init_chain(top, {2.0, 1.0}, 9);
  CHECK(c.config.count() == 0);
  CHECK(c.cov.logdet_sigma() == Approx(-4 * std::log(2.0)));
}

TEST_CASE("edge chain hits the exact marginals on P3") {
  auto top = make_path(3);
  auto s = run(top, {1.0, 1.0}, settings(60000, 4), ChainKind::EdgeOnly);
  for (double se : s.edge_marginal_se) CHECK(se < 0.01);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(s.edge_marginals[k] - 0.3711361) < 4 * s.edge_marginal_se[k]);
  }
  REQUIRE(s.config_frequencies.size() == 4);
  CHECK(s.config_frequencies[3] == Approx(0.1409560).epsilon(0.05));
}

TEST_CASE("coupled chain hits marginals and node variances") {
  auto top = make_path(3);
  auto s = run(top, {1.0, 1.0}, settings(60000, 6), ChainKind::Coupled);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(s.edge_marginals[k] - 0.3711361) < 4 * s.edge_marginal_se[k]);
  }
  REQUIRE(s.x_variance_estimates.size() == 3);
  CHECK(std::abs(s.x_variance_estimates[1] - 0.7760686) < 4 * s.x_variance_se[1]);
}

TEST_CASE("same seed, same run; streams differ") {
  auto top = make_cycle(5);
  auto a = run(top, {1.0, 0.5}, settings(2000, 8), ChainKind::EdgeOnly);
  auto b = run(top, {1.0, 0.5}, settings(2000, 8), ChainKind::EdgeOnly);
  auto c = run(top, {1.0, 0.5}, settings(2000, 8), ChainKind::EdgeOnly, {}, 1);
  CHECK(a.edge_marginals == b.edge_marginals);
  CHECK(a.edge_flips == b.edge_flips);
  CHECK(a.edge_marginals != c.edge_marginals);
}

TEST_CASE("sink sees every retained sweep") {
  auto top = make_path(4);
  auto st = settings(1000, 2);
  st.thin = 3;
  std::size_t seen = 0;
  auto s = run(top, {1.0, 1.0}, st, ChainKind::Coupled, [&](const ChainState& c) {
    ++seen;
    CHECK(c.x.size() == 4);
  });
  CHECK(seen == s.retained);
  CHECK(seen == st.retained());
}

TEST_CASE("pooled chains agree with the oracle on a cycle") {
  auto top = make_cycle(6);
  ModelParams p{0.5, 2.0};
  auto table = enumerate(top, p);
  auto s = run_chains(top, p, settings(20000, 12), ChainKind::EdgeOnly, 4);
  CHECK(s.chains == 4);
  for (std::size_t k = 0; k < top.edge_count(); ++k) {
    const double exact = event_probability(table, [k](const EdgeConfig& a) { return a.test(k); });
    CHECK(std::abs(s.edge_marginals[k] - exact) < 4.5 * s.edge_marginal_se[k]);
  }
}

TEST_CASE("random scan is also stationary for the oracle") {
  auto top = make_star(4);
  ModelParams p{1.0, 3.0};
  auto table = enumerate(top, p);
  auto st = settings(40000, 3);
  st.scan = ScanOrder::Random;
  auto s = run(top, p, st, ChainKind::EdgeOnly);
  for (std::size_t k = 0; k < top.edge_count(); ++k) {
    const double exact = event_probability(table, [k](const EdgeConfig& a) { return a.test(k); });
    CHECK(std::abs(s.edge_marginals[k] - exact) < 4.5 * s.edge_marginal_se[k]);
  }
}

TEST_CASE("initial x is iid N(0, 1/alpha)") {
  auto top = make_path(2);
  double ss = 0;
  const int inits = 50000;
  for (int s = 0; s < inits; ++s) {
    auto c = init_chain(top, {1.0, 1.0}, static_cast<std::uint64_t>(s));
    ss += c.x.squaredNorm();
  }
  CHECK(ss / (2.0 * inits) == Approx(1.0).epsilon(0.02));
  auto a = init_chain(top, {1.0, 1.0}, 5), b = init_chain(top, {1.0, 1.0}, 5);
  CHECK(a.x == b.x);
}

TEST_CASE("single edge stationary frequency") {
  // 1 / (1 + sqrt 3)
  auto top = make_path(2);
  for (auto kind : {ChainKind::EdgeOnly, ChainKind::Coupled}) {
    auto s = run(top, {1.0, 1.0}, settings(220000, 31), kind);
    CHECK(s.edge_marginals[0] == Approx(0.3660254).epsilon(0.01 / 0.366));
  }
}

TEST_CASE("beta zero decouples everything") {
  auto top = make_cycle(4);
  auto s = run(top, {2.0, 0.0}, settings(40000, 2), ChainKind::Coupled);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(s.edge_marginals[k] - 0.5) < 4 * s.edge_marginal_se[k]);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(s.x_variance_estimates[i] - 0.5) < 4 * s.x_variance_se[i]);
  auto e = run(top, {2.0, 0.0}, settings(40000, 3), ChainKind::EdgeOnly);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(e.edge_marginals[k] - 0.5) < 4 * e.edge_marginal_se[k]);
}
