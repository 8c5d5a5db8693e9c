#include "rggm/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "rggm/error.hpp"
#include "rggm/linalg.hpp"
#include "rggm/model.hpp"
#include "rggm/oracle.hpp"
#include "rggm/parallel.hpp"
#include "rggm/rng.hpp"
#include "rggm/sampler.hpp"
#include "rggm/stats.hpp"

namespace rggm {

using nlohmann::json;

// ---- report plumbing ------------------------------------------------------

bool CheckPart::pass() const noexcept {
  if (kind == Kind::Identity) return worst <= tolerance;
  return worst >= -tolerance;
}

void CheckPart::observe(double value, const std::function<json()>& make_witness) {
  const bool first = instances == 0;
  ++instances;
  const bool worse = kind == Kind::Identity ? (value > worst || std::isnan(value))
                                            : (value < worst || std::isnan(value));
  if (first || worse) {
    worst = value;
    witness = make_witness ? make_witness() : json::object();
  }
}

bool CheckReport::pass() const noexcept {
  return std::all_of(parts.begin(), parts.end(), [](const CheckPart& p) { return p.pass(); });
}

std::size_t CheckReport::instances() const noexcept {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.instances;
  return total;
}

double CheckReport::max_residual() const noexcept {
  double r = 0.0;
  for (const auto& p : parts) {
    if (p.kind == CheckPart::Kind::Identity) r = std::max(r, p.worst);
  }
  return r;
}

double CheckReport::worst_margin() const noexcept {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    if (p.kind == CheckPart::Kind::Inequality) r = std::min(r, p.worst);
  }
  return r;
}

json CheckReport::witness() const {
  for (const auto& p : parts) {
    if (!p.pass()) return p.witness;
  }
  return parts.empty() ? json::object() : parts.front().witness;
}

CheckPart& CheckReport::add_part(std::string part_name, CheckPart::Kind kind, double tolerance) {
  CheckPart part;
  part.name = std::move(part_name);
  part.kind = kind;
  part.tolerance = tolerance;
  part.worst = kind == CheckPart::Kind::Identity ? 0.0 : std::numeric_limits<double>::infinity();
  parts.push_back(std::move(part));
  return parts.back();
}

nlohmann::ordered_json to_json(const CheckReport& report) {
  nlohmann::ordered_json out;
  out["name"] = report.name;
  out["pass"] = report.pass();
  out["instances"] = report.instances();
  out["max_residual"] = report.max_residual();
  const double margin = report.worst_margin();
  out["worst_margin"] = std::isfinite(margin) ? nlohmann::ordered_json(margin) : nlohmann::ordered_json();
  out["witness"] = report.witness();
  auto& parts = out["parts"] = nlohmann::ordered_json::array();
  for (const auto& p : report.parts) {
    nlohmann::ordered_json jp;
    jp["name"] = p.name;
    jp["kind"] = p.kind == CheckPart::Kind::Identity ? "identity" : "inequality";
    jp["tolerance"] = p.tolerance;
    jp["instances"] = p.instances;
    jp["worst"] = std::isfinite(p.worst) ? nlohmann::ordered_json(p.worst) : nlohmann::ordered_json();
    jp["pass"] = p.pass();
    jp["witness"] = p.witness;
    parts.push_back(std::move(jp));
  }
  if (!report.details.is_null()) out["details"] = report.details;
  return out;
}

void print_report_table(std::ostream& out, std::span<const CheckReport> reports) {
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-34s %10s %12s %12s\n", "status", "check", "instances",
                "max_resid", "min_margin");
  out << line;
  std::size_t failed = 0;
  for (const auto& r : reports) {
    const double margin = r.worst_margin();
    char margin_text[32];
    if (std::isfinite(margin)) {
      std::snprintf(margin_text, sizeof margin_text, "%12.3e", margin);
    } else {
      std::snprintf(margin_text, sizeof margin_text, "%12s", "-");
    }
    std::snprintf(line, sizeof line, "%-6s %-34s %10zu %12.3e %s\n", r.pass() ? "PASS" : "FAIL",
                  r.name.c_str(), r.instances(), r.max_residual(), margin_text);
    out << line;
    if (!r.pass()) ++failed;
  }
  out << reports.size() - failed << "/" << reports.size() << " checks passed\n";
}

// ---- helpers -----------------------------------------------------------------

namespace {

json params_json(const ModelParams& p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

json topology_json(const Topology& top) {
  json edges = json::array();
  for (const auto& e : top.edges()) edges.push_back({e.i, e.j});
  return {{"nodes", top.node_count()}, {"edges", edges}};
}

// Density drawn uniformly, then independent bits, so sparse and dense
// configurations both show up.
EdgeConfig random_config(std::size_t n, Rng& rng) {
  EdgeConfig c(n);
  const double density = uniform01(rng);
  for (std::size_t k = 0; k < n; ++k) c.set(k, uniform01(rng) < density);
  return c;
}

std::size_t random_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

void require_edges(const Topology& top, const char* check) {
  if (top.edge_count() == 0) {
    throw ConfigError(std::string(check) + " needs a topology with at least one edge");
  }
}

}  // namespace

Lemma1Residuals lemma1_residuals(const Topology& top, const EdgeConfig& config, std::size_t k,
                                 const ModelParams& params) {
  require_compatible(top, config);
  if (config.test(k)) throw ContractError("lemma1_residuals needs an absent edge");
  const auto [i, j] = top.edge(k);
  const auto before = covariance_for(top, config, params, 0);
  auto with = config;
  with.set(k);
  const auto after = covariance_for(top, with, params, 0);
  const double d = before.delta(i, j);
  const double d_prime = after.delta(i, j);
  return {std::abs(after.logdet_sigma() - before.logdet_sigma() + std::log1p(params.beta * d)),
          delta_prime_identity_residual(d, d_prime, params.beta)};
}

Lemma2Residuals lemma2_residuals(const Topology& top, const EdgeConfig& config, std::size_t k,
                                 int node_k, int node_l, const ModelParams& params) {
  require_compatible(top, config);
  if (config.test(k)) throw ContractError("lemma2_residuals needs an absent edge");
  const auto [i, j] = top.edge(k);
  const auto before = covariance_for(top, config, params, 0);
  auto updated = before;
  updated.add_edge(i, j, params.beta);
  auto with = config;
  with.set(k);
  const auto reference = covariance_for(top, with, params, 0);

  Lemma2Residuals r;
  r.sigma = (updated.sigma() - reference.sigma()).cwiseAbs().maxCoeff();

  const auto& s = before.sigma();
  const double coefficient = params.beta / (1.0 + params.beta * before.delta(i, j));
  const double v = s(node_k, i) - s(node_k, j) - s(node_l, i) + s(node_l, j);
  const double predicted = before.delta(node_k, node_l) - coefficient * v * v;
  r.gap = std::abs(predicted - reference.delta(node_k, node_l));
  return r;
}

std::vector<double> martingale_increments(const Topology& top, const EdgeConfig& config,
                                          const ModelParams& params) {
  require_compatible(top, config);
  params.validate();
  auto cs = CovarianceState::empty(top.node_count(), params.alpha, 0);
  std::vector<double> out(top.edge_count(), 0.0);
  for (std::size_t k = 0; k < top.edge_count(); ++k) {
    if (!config.test(k)) continue;
    const auto [i, j] = top.edge(k);
    const double d = cs.add_edge(i, j, params.beta);
    out[k] = std::log1p(params.beta * d);
  }
  return out;
}

// ---- checks ------------------------------------------------------------------

CheckReport check_lemma1(const Topology& top, const ModelParams& params, const CheckOptions& options) {
  require_edges(top, "lemma1");
  params.validate();
  CheckReport report;
  report.name = "lemma1";
  auto& logdet = report.add_part("determinant_update", CheckPart::Kind::Identity, kIdentityTolerance);
  auto& gap = report.add_part("gap_identity", CheckPart::Kind::Identity, kIdentityTolerance);
  Rng rng = make_rng(options.seed, 1);
  const std::size_t n = top.edge_count();
  for (std::size_t t = 0; t < options.trials; ++t) {
    auto config = random_config(n, rng);
    const std::size_t k = random_index(n, rng);
    config.reset(k);
    const auto r = lemma1_residuals(top, config, k, params);
    auto witness = [&] {
      return json{{"config_bits_hex", config.to_hex()}, {"edge", k}, {"params", params_json(params)},
                  {"topology", topology_json(top)}};
    };
    logdet.observe(r.logdet, witness);
    gap.observe(r.gap, witness);
  }
  return report;
}

CheckReport check_lemma2(const Topology& top, const ModelParams& params, const CheckOptions& options) {
  require_edges(top, "lemma2");
  params.validate();
  CheckReport report;
  report.name = "lemma2";
  auto& sigma = report.add_part("sigma_update", CheckPart::Kind::Identity, kIdentityTolerance);
  auto& gap = report.add_part("gap_update", CheckPart::Kind::Identity, kIdentityTolerance);
  Rng rng = make_rng(options.seed, 2);
  const std::size_t n = top.edge_count();
  const int m = top.node_count();
  for (std::size_t t = 0; t < options.trials; ++t) {
    auto config = random_config(n, rng);
    const std::size_t k = random_index(n, rng);
    config.reset(k);
    const int a = static_cast<int>(random_index(static_cast<std::size_t>(m), rng));
    int b = static_cast<int>(random_index(static_cast<std::size_t>(m - 1), rng));
    if (b >= a) ++b;
    const auto r = lemma2_residuals(top, config, k, a, b, params);
    auto witness = [&] {
      return json{{"config_bits_hex", config.to_hex()}, {"edge", k}, {"pair", {a, b}},
                  {"params", params_json(params)}, {"topology", topology_json(top)}};
    };
    sigma.observe(r.sigma, witness);
    gap.observe(r.gap, witness);
  }
  return report;
}

namespace {

// deltas[mask * n + k] = delta of edge k under configuration `mask`, from a
// fresh factorization per configuration.
std::vector<double> all_edge_deltas(const Topology& top, const ModelParams& params) {
  const std::size_t n = top.edge_count();
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> deltas(count * n);
  parallel_blocks(count, std::min<std::size_t>(count, 64), [&](std::size_t begin, std::size_t end) {
    for (std::size_t mask = begin; mask < end; ++mask) {
      const auto cs = covariance_for(top, EdgeConfig::from_mask(mask, n), params, 0);
      for (std::size_t k = 0; k < n; ++k) {
        deltas[mask * n + k] = cs.delta(top.edge(k).i, top.edge(k).j);
      }
    }
  });
  return deltas;
}

}  // namespace

CheckReport check_prop2(const Topology& top, const ModelParams& params) {
  require_edges(top, "prop2");
  const std::size_t n = top.edge_count();
  if (n > 12) throw SizeError("prop2 check is exhaustive and needs at most 12 edges");
  CheckReport report;
  report.name = "prop2";
  auto& vs_table = report.add_part("conditional_vs_enumeration", CheckPart::Kind::Identity,
                                   kIdentityTolerance);
  auto& forms = report.add_part("closed_forms_agree", CheckPart::Kind::Identity, 1e-12);

  const auto table = enumerate(top, params);
  const auto deltas = all_edge_deltas(top, params);
  const std::size_t count = table.rows.size();
  for (std::size_t mask = 0; mask < count; ++mask) {
    const auto config = EdgeConfig::from_mask(mask, n);
    const auto cs = covariance_for(top, config, params, 0);
    for (std::size_t k = 0; k < n; ++k) {
      if (config.test(k)) continue;
      const double p1 = one_edge_conditional(cs, top, config, k, params.beta);
      const double ratio = conditional_from_table(table, k, config);
      const double d0 = deltas[mask * n + k];
      const double d1 = deltas[(mask | (std::size_t{1} << k)) * n + k];
      const double p2 = one_edge_conditional_ratio(d0, d1);
      auto witness = [&] {
        return json{{"config_bits_hex", config.to_hex()}, {"edge", k}, {"p1", p1},
                    {"table_ratio", ratio}, {"p2", p2}, {"params", params_json(params)}};
      };
      vs_table.observe(std::abs(p1 - ratio), witness);
      forms.observe(std::abs(p1 - p2), witness);
    }
  }
  return report;
}

namespace {

struct IncreasingFunction {
  std::string name;
  std::function<double(std::uint64_t mask)> eval;
};

std::vector<IncreasingFunction> increasing_library(std::size_t n) {
  std::vector<IncreasingFunction> lib;
  for (std::uint64_t s = 1; s < (std::uint64_t{1} << n); ++s) {
    lib.push_back({"contains:" + EdgeConfig::from_mask(s, n).to_hex(),
                   [s](std::uint64_t mask) { return (mask & s) == s ? 1.0 : 0.0; }});
  }
  lib.push_back({"edge_count", [](std::uint64_t mask) { return static_cast<double>(std::popcount(mask)); }});
  for (std::size_t t = 1; t <= n; ++t) {
    lib.push_back({"count_at_least:" + std::to_string(t), [t](std::uint64_t mask) {
                     return static_cast<std::size_t>(std::popcount(mask)) >= t ? 1.0 : 0.0;
                   }});
  }
  return lib;
}

}  // namespace

CheckReport check_fkg(const Topology& top, const ModelParams& params, const FkgOptions& options) {
  require_edges(top, "fkg");
  params.validate();
  const std::size_t n = top.edge_count();
  CheckReport report;
  report.name = "fkg";
  auto& lattice = report.add_part("lattice_condition", CheckPart::Kind::Inequality, kMarginTolerance);
  auto& one_point = report.add_part("one_point_monotone", CheckPart::Kind::Inequality, kMarginTolerance);

  if (n <= options.exhaustive_max_edges) {
    auto& covariance = report.add_part("increasing_covariance", CheckPart::Kind::Inequality,
                                       kMarginTolerance);
    const auto table = enumerate(top, params);
    const std::size_t count = table.rows.size();
    for (std::size_t a = 0; a < count; ++a) {
      for (std::size_t b = 0; b < count; ++b) {
        const double margin = table.rows[a | b].prob * table.rows[a & b].prob -
                              table.rows[a].prob * table.rows[b].prob;
        lattice.observe(margin, [&] {
          return json{{"a", EdgeConfig::from_mask(a, n).to_hex()}, {"b", EdgeConfig::from_mask(b, n).to_hex()},
                      {"params", params_json(params)}};
        });
      }
    }
    const auto lib = increasing_library(n);
    std::vector<std::vector<double>> values(lib.size(), std::vector<double>(count));
    std::vector<double> means(lib.size(), 0.0);
    for (std::size_t f = 0; f < lib.size(); ++f) {
      for (std::size_t r = 0; r < count; ++r) {
        values[f][r] = lib[f].eval(r);
        means[f] += table.rows[r].prob * values[f][r];
      }
    }
    for (std::size_t f = 0; f < lib.size(); ++f) {
      for (std::size_t g = f; g < lib.size(); ++g) {
        double efg = 0.0;
        for (std::size_t r = 0; r < count; ++r) efg += table.rows[r].prob * values[f][r] * values[g][r];
        covariance.observe(efg - means[f] * means[g], [&] {
          return json{{"f", lib[f].name}, {"g", lib[g].name}, {"params", params_json(params)}};
        });
      }
    }
    const auto deltas = all_edge_deltas(top, params);
    for (std::size_t mask = 0; mask < count; ++mask) {
      for (std::size_t k = 0; k < n; ++k) {
        if (mask >> k & 1U) continue;
        for (std::size_t l = 0; l < n; ++l) {
          if (l == k || (mask >> l & 1U)) continue;
          const double q_small = 1.0 / (1.0 + std::sqrt(1.0 + params.beta * deltas[mask * n + k]));
          const double q_big =
              1.0 / (1.0 + std::sqrt(1.0 + params.beta * deltas[(mask | (std::size_t{1} << l)) * n + k]));
          one_point.observe(q_big - q_small, [&] {
            return json{{"config_bits_hex", EdgeConfig::from_mask(mask, n).to_hex()}, {"edge", k},
                        {"added", l}, {"params", params_json(params)}};
          });
        }
      }
    }
    return report;
  }

  // sampled regime: log-space lattice margin from independent factorizations
  Rng rng = make_rng(options.seed, 3);
  auto half_logdet = [&](const EdgeConfig& c) {
    return 0.5 * covariance_for(top, c, params, 0).logdet_sigma();
  };
  for (std::size_t t = 0; t < options.sampled_pairs; ++t) {
    const auto a = random_config(n, rng);
    const auto b = random_config(n, rng);
    const double margin = half_logdet(join(a, b)) + half_logdet(meet(a, b)) - half_logdet(a) - half_logdet(b);
    lattice.observe(margin, [&] {
      return json{{"a", a.to_hex()}, {"b", b.to_hex()}, {"params", params_json(params)}, {"log_space", true}};
    });

    auto base = a;
    const std::size_t k = random_index(n, rng);
    base.reset(k);
    if (n < 2) continue;
    std::size_t l = random_index(n - 1, rng);
    if (l >= k) ++l;
    auto bigger = base;
    bigger.set(l);
    const auto [i, j] = top.edge(k);
    const double q_small = one_edge_conditional(covariance_for(top, base, params, 0), i, j, params.beta);
    const double q_big = one_edge_conditional(covariance_for(top, bigger, params, 0), i, j, params.beta);
    one_point.observe(q_big - q_small, [&] {
      return json{{"config_bits_hex", base.to_hex()}, {"edge", k}, {"added", l}, {"params", params_json(params)}};
    });
  }
  return report;
}

namespace {

// Fold `from` into `into` part by part (matched by name).
void absorb(CheckReport& into, const CheckReport& from) {
  for (const auto& p : from.parts) {
    auto it = std::find_if(into.parts.begin(), into.parts.end(),
                           [&](const CheckPart& q) { return q.name == p.name; });
    if (it == into.parts.end()) {
      into.parts.push_back(p);
      continue;
    }
    const bool worse = p.kind == CheckPart::Kind::Identity ? p.worst > it->worst : p.worst < it->worst;
    if (it->instances == 0 || (p.instances > 0 && worse)) {
      it->worst = p.worst;
      it->witness = p.witness;
    }
    it->instances += p.instances;
  }
}

}  // namespace

CheckReport check_fkg_grid(const Topology& top, const FkgOptions& options) {
  CheckReport report;
  report.name = "fkg_grid";
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (double beta : {0.0, 0.5, 1.0, 4.0}) {
      absorb(report, check_fkg(top, ModelParams{alpha, beta}, options));
    }
  }
  return report;
}

bool IncreasingEvent::contains(const EdgeConfig& config) const {
  if (kind == Kind::AllPresent) {
    return std::all_of(edges.begin(), edges.end(), [&](std::size_t k) { return config.test(k); });
  }
  return std::any_of(edges.begin(), edges.end(), [&](std::size_t k) { return config.test(k); });
}

std::string IncreasingEvent::describe() const {
  std::string out = kind == Kind::AllPresent ? "all_present{" : "any_present{";
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (e) out += ',';
    out += std::to_string(edges[e]);
  }
  return out + "}";
}

CheckReport check_monotone_nested(std::span<const Topology> sequence, const IncreasingEvent& event,
                                  const ModelParams& params, const MonotoneOptions& options) {
  params.validate();
  if (sequence.size() < 2) throw ConfigError("monotone check needs at least two nested topologies");
  if (event.edges.empty()) throw ConfigError("event must mention at least one edge");
  for (std::size_t s = 0; s + 1 < sequence.size(); ++s) {
    if (!sequence[s].is_prefix_of(sequence[s + 1])) {
      throw ConfigError("topologies are not nested with a shared edge prefix");
    }
  }
  for (auto k : event.edges) {
    if (k >= sequence.front().edge_count()) {
      throw ConfigError("event edge lies outside the first topology");
    }
  }

  CheckReport report;
  report.name = "monotone_nested";
  auto& exact = report.add_part("nondecreasing_exact", CheckPart::Kind::Inequality, kMarginTolerance);
  auto& sampled = report.add_part("nondecreasing_sampled", CheckPart::Kind::Inequality, kSampledSigmas);
  auto& embedding = report.add_part("embedding_relation", CheckPart::Kind::Identity, kIdentityTolerance);

  struct Point {
    double prob = 0.0;
    double se = 0.0;
    bool exact = true;
    std::vector<MeasureTable::Row> rows;  // kept for the embedding relation
  };
  std::vector<Point> points(sequence.size());

  auto predicate = [&](const EdgeConfig& c) { return event.contains(c); };
  parallel_blocks(sequence.size(), sequence.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto& top = sequence[s];
      auto& pt = points[s];
      if (top.edge_count() <= options.exact_max_edges) {
        auto table = enumerate(top, params);
        pt.prob = event_probability(table, predicate);
        pt.rows = std::move(table.rows);
        continue;
      }
      RunSettings settings;
      settings.sweeps = options.sweeps;
      settings.seed = options.seed;
      const std::uint64_t expected = settings.retained();
      BatchMeans stats(BatchMeans::default_batch_size(expected));
      run(top, params, settings, ChainKind::EdgeOnly,
          [&](const ChainState& chain) { stats.add(event.contains(chain.config) ? 1.0 : 0.0); }, s);
      pt.prob = stats.mean();
      pt.se = stats.standard_error();
      pt.exact = false;
    }
  });

  json trajectory = json::array();
  for (std::size_t s = 0; s < sequence.size(); ++s) {
    trajectory.push_back({{"nodes", sequence[s].node_count()}, {"edges", sequence[s].edge_count()},
                          {"prob", points[s].prob}, {"se", points[s].se},
                          {"method", points[s].exact ? "enumeration" : "edge_sampler"}});
  }

  for (std::size_t s = 0; s + 1 < sequence.size(); ++s) {
    const auto& lo = points[s];
    const auto& hi = points[s + 1];
    auto witness = [&] {
      return json{{"from_edges", sequence[s].edge_count()}, {"to_edges", sequence[s + 1].edge_count()},
                  {"from_prob", lo.prob}, {"to_prob", hi.prob}, {"event", event.describe()},
                  {"params", params_json(params)}};
    };
    const double diff = hi.prob - lo.prob;
    if (lo.exact && hi.exact) {
      exact.observe(diff, witness);
      // mu_m(B) = mu_n(B | every edge beyond the first n_m absent)
      const std::size_t small = std::size_t{1} << sequence[s].edge_count();
      double joint = 0.0;
      double base = 0.0;
      for (std::size_t mask = 0; mask < small; ++mask) {
        const double p = hi.rows[mask].prob;
        base += p;
        if (event.contains(EdgeConfig::from_mask(mask, sequence[s].edge_count()))) joint += p;
      }
      embedding.observe(std::abs(joint / base - lo.prob), witness);
    } else {
      const double se = std::sqrt(lo.se * lo.se + hi.se * hi.se);
      const double z = se > 0.0 ? diff / se : (diff >= -kMarginTolerance ? 0.0 : -std::numeric_limits<double>::infinity());
      sampled.observe(z, witness);
    }
  }
  report.details = {{"event", event.describe()}, {"trajectory", trajectory}, {"params", params_json(params)}};
  return report;
}

CheckReport check_variance_monotone(const Topology& top, const ModelParams& params,
                                    const CheckOptions& options) {
  params.validate();
  CheckReport report;
  report.name = "variance_monotone";
  auto& variance = report.add_part("node_variance_decreasing", CheckPart::Kind::Inequality, kMarginTolerance);
  auto& gaps = report.add_part("gap_variance_decreasing", CheckPart::Kind::Inequality, kMarginTolerance);
  Rng rng = make_rng(options.seed, 4);
  const std::size_t n = top.edge_count();
  const int m = top.node_count();
  for (std::size_t t = 0; t < options.trials; ++t) {
    const auto a = random_config(n, rng);
    const auto bigger = join(a, random_config(n, rng));
    const auto s_small = covariance_for(top, a, params, 0);
    const auto s_big = covariance_for(top, bigger, params, 0);
    auto witness = [&] {
      return json{{"a", a.to_hex()}, {"a_prime", bigger.to_hex()}, {"params", params_json(params)}};
    };
    double worst_var = std::numeric_limits<double>::infinity();
    double worst_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      worst_var = std::min(worst_var, s_small.sigma()(i, i) - s_big.sigma()(i, i));
      for (int j = i + 1; j < m; ++j) {
        worst_gap = std::min(worst_gap, s_small.delta(i, j) - s_big.delta(i, j));
      }
    }
    variance.observe(worst_var, witness);
    if (m >= 2) gaps.observe(worst_gap, witness);
  }
  return report;
}

CheckReport check_martingale(const Topology& top, const ModelParams& params,
                             const MartingaleOptions& options) {
  params.validate();
  CheckReport report;
  report.name = "martingale";
  auto& telescoping = report.add_part("telescoping_identity", CheckPart::Kind::Identity, kIdentityTolerance);
  auto& summands = report.add_part("summands_nonnegative", CheckPart::Kind::Inequality, kMarginTolerance);
  const std::size_t n = top.edge_count();
  const int m = top.node_count();
  // -log|Sigma(0)| = m log alpha; the telescoping sum starts there
  const double base = m * std::log(params.alpha);

  Rng rng = make_rng(options.seed, 5);
  for (std::size_t t = 0; t < options.trials; ++t) {
    const auto config = random_config(n, rng);
    const auto inc = martingale_increments(top, config, params);
    double sum = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      sum += inc[k];
      if (config.test(k)) smallest = std::min(smallest, inc[k]);
    }
    const double direct = -covariance_for(top, config, params, 0).logdet_sigma() - base;
    auto witness = [&] {
      return json{{"config_bits_hex", config.to_hex()}, {"telescoped", sum}, {"direct", direct},
                  {"params", params_json(params)}};
    };
    telescoping.observe(std::abs(sum - direct), witness);
    if (std::isfinite(smallest)) summands.observe(smallest, witness);
  }

  if (n >= 1 && n <= options.exhaustive_max_edges) {
    auto& sub = report.add_part("submartingale_exact", CheckPart::Kind::Inequality, kMarginTolerance);
    const auto table = enumerate(top, params);
    auto minus_logdet = [&](std::uint64_t mask) {
      return -covariance_for(top, EdgeConfig::from_mask(mask, n), params, 0).logdet_sigma() - base;
    };
    for (std::size_t k = 1; k <= n; ++k) {
      const std::uint64_t prefix_bits = k - 1;
      const std::uint64_t bit = std::uint64_t{1} << (k - 1);
      for (std::uint64_t prefix = 0; prefix < (std::uint64_t{1} << prefix_bits); ++prefix) {
        double weight = 0.0;
        double weight_on = 0.0;
        for (const auto& r : table.rows) {
          if ((r.mask & (bit - 1)) != prefix) continue;
          weight += r.prob;
          if (r.mask & bit) weight_on += r.prob;
        }
        const double p_on = weight_on / weight;
        const double previous = minus_logdet(prefix);
        const double expected = (1.0 - p_on) * previous + p_on * minus_logdet(prefix | bit);
        sub.observe(expected - previous, [&] {
          return json{{"step", k}, {"prefix_bits_hex", EdgeConfig::from_mask(prefix, n).to_hex()},
                      {"conditional_expectation", expected}, {"previous", previous},
                      {"params", params_json(params)}};
        });
      }
    }
  }
  return report;
}

// ---- suite ---------------------------------------------------------------------

std::vector<NamedTopology> topology_catalog(std::size_t max_edges) {
  std::vector<NamedTopology> out;
  auto keep = [&](std::string name, Topology top) {
    if (top.edge_count() >= 1 && top.edge_count() <= max_edges) out.push_back({std::move(name), std::move(top)});
  };
  for (int v = 2; v <= 11; ++v) keep("P" + std::to_string(v), make_path(v));
  for (int v = 3; v <= 10; ++v) keep("C" + std::to_string(v), make_cycle(v));
  for (int v = 3; v <= 11; ++v) keep("S" + std::to_string(v), make_star(v));
  keep("K4", make_complete(4));
  return out;
}

std::vector<std::string_view> suite_names() {
  return {"lemma1", "lemma2", "prop2", "fkg", "monotone", "variance", "martingale"};
}

std::vector<CheckReport> run_suite(std::string_view suite, std::size_t max_edges,
                                   const ModelParams& params, std::uint64_t seed) {
  params.validate();
  const auto names = suite_names();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    throw ConfigError("unknown suite '" + std::string(suite) + "'");
  }
  auto wants = [&](std::string_view s) { return suite == "all" || suite == s; };

  std::vector<std::function<CheckReport(std::uint64_t)>> tasks;
  auto add = [&](std::string name, std::function<CheckReport(std::uint64_t)> fn) {
    tasks.push_back([name = std::move(name), fn = std::move(fn)](std::uint64_t s) {
      auto r = fn(s);
      r.name = name;
      return r;
    });
  };

  const auto catalog = topology_catalog(max_edges);
  for (const auto& entry : catalog) {
    const auto& top = entry.topology;
    const std::string tag = "[" + entry.name + "]";
    if (wants("lemma1")) add("lemma1" + tag, [top, params](std::uint64_t s) { return check_lemma1(top, params, {100, s}); });
    if (wants("lemma2")) add("lemma2" + tag, [top, params](std::uint64_t s) { return check_lemma2(top, params, {100, s}); });
    if (wants("prop2") && top.edge_count() <= 12) add("prop2" + tag, [top, params](std::uint64_t) { return check_prop2(top, params); });
    if (wants("fkg")) add("fkg" + tag, [top](std::uint64_t s) { return check_fkg_grid(top, {4, 500, s}); });
    if (wants("variance")) add("variance" + tag, [top, params](std::uint64_t s) { return check_variance_monotone(top, params, {100, s}); });
    if (wants("martingale")) add("martingale" + tag, [top, params](std::uint64_t s) { return check_martingale(top, params, {100, s, 6}); });
  }
  if (wants("monotone")) {
    for (auto kind : {NestedKind::Path, NestedKind::Star, NestedKind::Comb}) {
      std::vector<int> sizes;
      for (int v = 2; static_cast<std::size_t>(v - 1) <= std::min<std::size_t>(max_edges, 20); ++v) sizes.push_back(v);
      if (sizes.size() < 2) continue;
      auto sequence = nested_sequence(kind, sizes);
      add("monotone[" + std::string(to_string(kind)) + "]", [sequence, params](std::uint64_t s) {
        MonotoneOptions opts;
        opts.seed = s;
        return check_monotone_nested(sequence, IncreasingEvent{IncreasingEvent::Kind::AllPresent, {0}}, params, opts);
      });
    }
  }

  std::vector<CheckReport> reports(tasks.size());
  parallel_blocks(tasks.size(), tasks.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) reports[t] = tasks[t](derive_seed(seed, t));
  });
  return reports;
}

}  // namespace rggm
