// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <string>
#include <vector>

#include "rggm/fit.hpp"
#include "rggm/graph.hpp"
#include "rggm/linalg.hpp"
#include "rggm/oracle.hpp"
#include "rggm/rng.hpp"
#include "rggm/sampler.hpp"
#include "rggm/verify.hpp"

using namespace rggm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += "FAILED: " + what + "; ";
    }
  }
  void note(const std::string& s) { detail += s + "; "; }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double marginal(const MeasureTable& t, std::size_t k) {
  return event_probability(t, [k](const EdgeConfig& a) { return a.test(k); });
}

void absorb_report(Outcome& o, const CheckReport& r) {
  if (!r.pass()) {
    o.pass = false;
    o.detail += "FAILED: " + r.name + " witness " + r.witness().dump() + "; ";
  }
}

// ---------------------------------------------------------------------------

Outcome oracle_exactness() {
  Outcome o;
  auto t = enumerate(make_path(3), {1.0, 1.0});
  // det Q(a) for a = 00, 10, 01, 11, by hand: 1, 3, 3, 8
  const double w[4] = {1.0, 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(8.0)};
  const double kappa = w[0] + w[1] + w[2] + w[3];
  double worst = 0;
  for (int r = 0; r < 4; ++r) worst = std::max(worst, std::abs(t.rows[r].prob - w[r] / kappa));
  const double p01 = marginal(t, 0);
  const double p01_hand = (w[1] + w[3]) / kappa;
  o.require(worst <= 1e-6, "mu_A vs determinants");
  o.require(std::abs(p01 - p01_hand) <= 1e-6, "P(A01) vs determinants");
  o.note(fmt("max|mu-hand|=%.1e, P(A01)=%.7f", worst, p01));
  const double quoted[4] = {0.398684, 0.230181, 0.230181, 0.140954};
  double dq = 0;
  for (int r = 0; r < 4; ++r) dq = std::max(dq, std::abs(t.rows[r].prob - quoted[r]));
  o.note(fmt("deviation from 6-decimal quotes %.1e (mu), %.1e (P(A01) vs 0.371135)", dq,
             std::abs(p01 - 0.371135)));
  return o;
}

Outcome lemma_identities() {
  Outcome o;
  double worst = 0;
  std::size_t trials = 0;
  for (int g = 0; g < 5; ++g) {
    const int m = 6 + g;  // 6..10 nodes
    auto top = make_random(m, static_cast<std::size_t>(m + 2 * g + 2), 100 + g);
    const ModelParams p{0.5 + 0.4 * g, 0.3 + 1.1 * g};
    auto r1 = check_lemma1(top, p, {200, derive_seed(1, g)});
    auto r2 = check_lemma2(top, p, {200, derive_seed(2, g)});
    absorb_report(o, r1);
    absorb_report(o, r2);
    worst = std::max({worst, r1.max_residual(), r2.max_residual()});
    trials += 200;
  }
  // the largest allowed size
  auto top = make_random(12, 30, 7);
  auto r1 = check_lemma1(top, {1.0, 2.0}, {200, 11});
  auto r2 = check_lemma2(top, {1.0, 2.0}, {200, 12});
  absorb_report(o, r1);
  absorb_report(o, r2);
  worst = std::max({worst, r1.max_residual(), r2.max_residual()});
  trials += 200;
  o.require(worst <= 1e-10, "residual bound");
  o.note(fmt("%.0f trials per lemma, max residual %.2e", static_cast<double>(trials), worst));
  return o;
}

Outcome prop2_equivalence() {
  Outcome o;
  double worst = 0;
  std::size_t graphs = 0, instances = 0;
  for (const auto& [name, top] : topology_catalog(10)) {
    for (auto p : {ModelParams{1.0, 1.0}, ModelParams{0.5, 4.0}, ModelParams{2.0, 0.25}}) {
      auto r = check_prop2(top, p);
      absorb_report(o, r);
      worst = std::max(worst, r.max_residual());
      instances += r.instances();
    }
    ++graphs;
  }
  o.note(fmt("%.0f graphs x 3 parameter sets, %.0f instances, max residual %.2e",
             static_cast<double>(graphs), static_cast<double>(instances), worst));
  return o;
}

Outcome fkg_lattice() {
  Outcome o;
  std::vector<Topology> tops;
  for (auto& nt : topology_catalog(4)) tops.push_back(nt.topology);
  // every labeled subgraph of K4 with up to four edges
  auto k4 = make_complete(4);
  for (std::uint32_t mask = 1; mask < 64; ++mask) {
    if (std::popcount(mask) > 4) continue;
    std::vector<Edge> e;
    for (std::size_t k = 0; k < 6; ++k)
      if (mask >> k & 1u) e.push_back(k4.edge(k));
    tops.emplace_back(4, e);
  }
  double worst = INFINITY;
  for (const auto& top : tops) {
    auto r = check_fkg_grid(top);
    absorb_report(o, r);
    worst = std::min(worst, r.worst_margin());
  }
  o.require(worst >= -1e-12, "lattice margin");
  // witness on P3: |S(11)||S(00)| = 1/8 against |S(10)||S(01)| = 1/9
  auto t = enumerate(make_path(3), {1.0, 1.0});
  const double lhs = std::exp(2 * (t.rows[3].half_logdet + t.rows[0].half_logdet));
  const double rhs = std::exp(2 * (t.rows[1].half_logdet + t.rows[2].half_logdet));
  o.require(std::abs(lhs - 0.125) < 1e-14 && std::abs(rhs - 1.0 / 9) < 1e-14 && lhs >= rhs,
            "P3 witness");
  o.note(fmt("%.0f topologies x 12 parameter pairs, worst margin %.2e", static_cast<double>(tops.size()), worst));
  o.note(fmt("P3 witness %.6f >= %.6f", lhs, rhs));
  return o;
}

Outcome monotone_corollary() {
  Outcome o;
  const std::vector<int> sizes{2, 3, 4, 5, 6};
  const std::vector<int> sizes3{3, 4, 5, 6};
  std::string traj;
  double worst = INFINITY;
  for (auto kind : {NestedKind::Path, NestedKind::Star}) {
    for (auto p : {ModelParams{1.0, 1.0}, ModelParams{0.5, 4.0}}) {
      auto seq = nested_sequence(kind, sizes);
      auto r = check_monotone_nested(seq, {IncreasingEvent::Kind::AllPresent, {0}}, p);
      absorb_report(o, r);
      worst = std::min(worst, r.worst_margin());
      if (p.beta == 1.0) {
        traj += std::string(to_string(kind)) + ":";
        for (auto& pt : r.details["trajectory"]) traj += fmt(" %.6f", pt["prob"].get<double>());
        traj += " ";
      }
      auto seq3 = nested_sequence(kind, sizes3);
      for (auto ek : {IncreasingEvent::Kind::AllPresent, IncreasingEvent::Kind::AnyPresent}) {
        auto r3 = check_monotone_nested(seq3, {ek, {0, 1}}, p);
        absorb_report(o, r3);
        worst = std::min(worst, r3.worst_margin());
      }
    }
  }
  o.require(worst >= -1e-12, "nondecreasing");
  o.note(fmt("worst step %.3e", worst));
  o.note("P(A_0) along " + traj.substr(0, traj.size() - 1));
  return o;
}

Outcome sampler_agreement() {
  Outcome o;
  auto top = make_path(3);
  const ModelParams p{1.0, 1.0};
  auto table = enumerate(top, p);
  const double exact[2] = {marginal(table, 0), marginal(table, 1)};
  const double var_x1 = mixture_covariance(table)(1, 1);
  double worst_abs = 0, worst_z = 0, worst_var = 0;
  for (auto kind : {ChainKind::Coupled, ChainKind::EdgeOnly}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunSettings s;
      s.burnin = 20000;
      s.sweeps = 200000 + 20000;
      s.seed = seed;
      auto sum = run(top, p, s, kind);
      o.require(sum.retained == 200000, "retained count");
      for (int k = 0; k < 2; ++k) {
        const double d = std::abs(sum.edge_marginals[k] - exact[k]);
        const double z = d / sum.edge_marginal_se[k];
        worst_abs = std::max(worst_abs, d);
        worst_z = std::max(worst_z, z);
        o.require(d <= 0.01 && z <= 3.0,
                  std::string(to_string(kind)) + fmt(" seed %.0f edge %.0f z=%.2f", double(seed), k, z));
      }
      if (kind == ChainKind::Coupled) {
        const double dv = std::abs(sum.x_variance_estimates[1] - 0.776069);
        worst_var = std::max(worst_var, dv);
        o.require(dv <= 0.02, fmt("Var(X_1) seed %.0f off by %.4f", double(seed), dv));
      }
    }
  }
  o.note(fmt("oracle %.6f, max |err| %.4f, max z %.2f", exact[0], worst_abs, worst_z));
  o.note(fmt("Var(X_1) oracle %.6f, max |err| %.4f", var_x1, worst_var));
  return o;
}

Outcome drift_and_cost() {
  Outcome o;
  const int m = 64;
  auto top = make_random(m, 256, 64);
  const ModelParams p{1.0, 1.0};
  auto rng = make_rng(77);
  auto cs = CovarianceState::empty(m, p.alpha, 64);
  EdgeConfig a(top.edge_count());
  double worst = 0;
  for (int step = 1; step <= 10000; ++step) {
    auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(a.size()));
    const auto e = top.edge(k);
    if (a.test(k)) cs.remove_edge(e.i, e.j, p.beta);
    else cs.add_edge(e.i, e.j, p.beta);
    a.flip(k);
    if (step % 500 == 0 || step == 10000) {
      auto fresh = covariance_for(top, a, p, 0);
      worst = std::max(worst, (cs.sigma() - fresh.sigma()).norm() / fresh.sigma().norm());
    }
  }
  o.require(worst <= 1e-8, "relative Frobenius drift");
  o.note(fmt("10^4 flips, max relative drift %.2e", worst));

  // per-edge cost of a sweep, median of 7 timed blocks
  auto per_edge = [&](int nodes) {
    auto g = make_random(nodes, static_cast<std::size_t>(2 * nodes), 5);
    auto chain = init_chain(g, p, 3, 64);
    for (int s = 0; s < 50; ++s) edge_sweep(chain, g, p);
    std::vector<double> samples;
    for (int rep = 0; rep < 7; ++rep) {
      int sweeps = 0;
      const double t0 = cpu_seconds();
      double t1 = t0;
      while (t1 - t0 < 0.15) {
        edge_sweep(chain, g, p);
        ++sweeps;
        t1 = cpu_seconds();
      }
      samples.push_back((t1 - t0) / (sweeps * static_cast<double>(g.edge_count())));
    }
    std::nth_element(samples.begin(), samples.begin() + 3, samples.end());
    return samples[3];
  };
  const double c32 = per_edge(32), c64 = per_edge(64);
  const double ratio = c64 / c32;
  o.require(ratio >= 3.0 && ratio <= 6.0, "cost ratio in [3,6]");
  o.note(fmt("per-edge cost %.0f ns (m=32), %.0f ns (m=64), ratio %.2f", c32 * 1e9, c64 * 1e9, ratio));
  return o;
}

Outcome martingale_representation() {
  Outcome o;
  double worst = 0, worst_margin = INFINITY;
  std::size_t trials = 0;
  for (int g = 0; g < 5; ++g) {
    const int m = 8 + g;  // up to 12 nodes
    auto top = make_random(m, static_cast<std::size_t>(2 * m), 300 + g);
    MartingaleOptions mo;
    mo.trials = 200;
    mo.seed = derive_seed(9, g);
    mo.exhaustive_max_edges = 0;
    auto r = check_martingale(top, {0.5 + 0.5 * g, 0.2 + g}, mo);
    absorb_report(o, r);
    worst = std::max(worst, r.max_residual());
    trials += mo.trials;
  }
  for (const auto& [name, top] : topology_catalog(6)) {
    MartingaleOptions mo;
    mo.trials = 20;
    mo.exhaustive_max_edges = 6;
    for (auto p : {ModelParams{1.0, 1.0}, ModelParams{0.5, 4.0}}) {
      auto r = check_martingale(top, p, mo);
      absorb_report(o, r);
      worst_margin = std::min(worst_margin, r.worst_margin());
    }
  }
  o.require(worst <= 1e-10, "telescoping identity");
  o.note(fmt("%.0f random configs, max residual %.2e, worst sub-martingale margin %.2e",
             static_cast<double>(trials), worst, worst_margin));
  return o;
}

std::vector<Snapshot> coupled_snapshots(const Topology& top, const ModelParams& p, std::size_t count,
                                        std::uint64_t seed) {
  RunSettings s;
  s.thin = 20;
  s.burnin = 1000;
  s.sweeps = 1000 + count * s.thin;
  s.seed = seed;
  std::vector<Snapshot> out;
  run(top, p, s, ChainKind::Coupled, [&](const ChainState& c) { out.push_back({c.config, c.x, 1.0}); });
  return out;
}

Outcome fit_recovery() {
  Outcome o;
  auto top = make_random(30, 60, 2024);
  auto snaps = coupled_snapshots(top, {1.0, 2.0}, 200, 99);
  o.require(snaps.size() == 200, "snapshot count");
  auto r = fit_params(top, snaps, {0.5, 0.5});
  const double za = std::abs(r.alpha_hat - 1.0) / r.se_alpha;
  const double zb = std::abs(r.beta_hat - 2.0) / r.se_beta;
  o.require(r.converged, "converged");
  o.require(za <= 3.0, "alpha within 3 SE");
  o.require(zb <= 3.0, "beta within 3 SE");
  o.note(fmt("alpha %.4f +- %.4f (z %.2f)", r.alpha_hat, r.se_alpha, za));
  o.note(fmt("beta %.4f +- %.4f (z %.2f)", r.beta_hat, r.se_beta, zb));

  auto top0 = make_random(20, 40, 7);
  auto snaps0 = coupled_snapshots(top0, {1.0, 0.0}, 500, 100);
  auto r0 = fit_params(top0, snaps0, {0.5, 0.5});
  o.require(r0.beta_hat <= 0.05, "beta_hat on beta=0 data");
  o.note(fmt("beta=0 data: beta_hat %.4f, alpha_hat %.4f", r0.beta_hat, r0.alpha_hat));
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "oracle_exactness", 1, oracle_exactness},
      {2, "lemma_identities", 10, lemma_identities},
      {3, "conditional_equivalence", 30, prop2_equivalence},
      {4, "fkg_lattice", 30, fkg_lattice},
      {5, "monotone_nested", 30, monotone_corollary},
      {6, "sampler_oracle_agreement", 120, sampler_agreement},
      {7, "incremental_drift_and_cost", 120, drift_and_cost},
      {8, "martingale_representation", 60, martingale_representation},
      {9, "fit_recovery", 300, fit_recovery},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail += std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("FAILED: runtime %.1f s over budget %.0f s; ", secs, c.budget_seconds);
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %d %s (%.2f s / %.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
