#include "rggm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "rggm/error.hpp"
#include "rggm/parallel.hpp"

namespace rggm {

const MeasureTable::Row& MeasureTable::row(const EdgeConfig& config) const {
  require_compatible(topology, config);
  return rows.at(static_cast<std::size_t>(config.to_mask()));
}

namespace {

void fill_independent(MeasureTable& table) {
  const auto& top = table.topology;
  const std::size_t n = top.edge_count();
  const std::size_t count = table.rows.size();
  parallel_blocks(count, std::min<std::size_t>(count, 256), [&](std::size_t begin, std::size_t end) {
    for (std::size_t mask = begin; mask < end; ++mask) {
      const auto config = EdgeConfig::from_mask(mask, n);
      Eigen::LLT<SymMatrix> factor(build_precision(top, config, table.params));
      if (factor.info() != Eigen::Success) {
        throw NumericalError("Cholesky failed during enumeration");
      }
      table.rows[mask] = {static_cast<std::uint32_t>(mask), -0.5 * logdet_from_factor(factor), 0.0};
    }
  });
}

void fill_gray(MeasureTable& table, int refresh_period) {
  const auto& top = table.topology;
  const auto& params = table.params;
  auto cs = CovarianceState::empty(top.node_count(), params.alpha, refresh_period);
  table.rows[0] = {0, 0.5 * cs.logdet_sigma(), 0.0};
  std::uint32_t mask = 0;
  for (std::uint64_t g = 1; g < table.rows.size(); ++g) {
    const int k = std::countr_zero(g);
    const auto& e = top.edge(static_cast<std::size_t>(k));
    const std::uint32_t bit = std::uint32_t{1} << k;
    if (mask & bit) {
      cs.remove_edge(e.i, e.j, params.beta);
    } else {
      cs.add_edge(e.i, e.j, params.beta);
    }
    mask ^= bit;
    table.rows[mask] = {mask, 0.5 * cs.logdet_sigma(), 0.0};
  }
}

}  // namespace

MeasureTable enumerate(const Topology& top, const ModelParams& params,
                       const EnumerateOptions& options) {
  params.validate();
  const std::size_t n = top.edge_count();
  if (n > EnumerateOptions::kMaxEdges) {
    throw SizeError("enumeration needs at most " + std::to_string(EnumerateOptions::kMaxEdges) +
                    " edges, topology has " + std::to_string(n));
  }
  const std::size_t count = std::size_t{1} << n;
  const std::size_t bytes = count * sizeof(MeasureTable::Row);
  if (bytes > options.memory_limit_bytes) {
    throw SizeError("enumeration table needs " + std::to_string(bytes) +
                    " bytes, over the limit of " + std::to_string(options.memory_limit_bytes));
  }

  MeasureTable table{top, params, std::vector<MeasureTable::Row>(count), 0.0};
  if (options.gray_code) {
    fill_gray(table, options.refresh_period);
  } else {
    fill_independent(table);
  }

  double max_half = -std::numeric_limits<double>::infinity();
  for (const auto& r : table.rows) max_half = std::max(max_half, r.half_logdet);
  double total = 0.0;
  for (auto& r : table.rows) {
    r.prob = std::exp(r.half_logdet - max_half);
    total += r.prob;
  }
  for (auto& r : table.rows) r.prob /= total;
  table.log_kappa = max_half + std::log(total);
  return table;
}

double event_probability(const MeasureTable& table, const ConfigPredicate& predicate) {
  const std::size_t n = table.edge_count();
  double p = 0.0;
  for (const auto& r : table.rows) {
    if (predicate(EdgeConfig::from_mask(r.mask, n))) p += r.prob;
  }
  return p;
}

SymMatrix mixture_covariance(const MeasureTable& table) {
  const auto& top = table.topology;
  const int m = top.node_count();
  SymMatrix total = SymMatrix::Zero(m, m);
  for (const auto& r : table.rows) {
    const auto config = EdgeConfig::from_mask(r.mask, table.edge_count());
    total += r.prob * covariance_for(top, config, table.params, 0).sigma();
  }
  return total;
}

double conditional_from_table(const MeasureTable& table, std::size_t edge,
                              const EdgeConfig& context) {
  require_compatible(table.topology, context);
  if (edge >= table.edge_count()) throw ConfigError("edge index out of range");
  const std::uint64_t bit = std::uint64_t{1} << edge;
  const std::uint64_t base = context.to_mask() & ~bit;
  const double h0 = table.rows[base].half_logdet;
  const double h1 = table.rows[base | bit].half_logdet;
  // |Sigma(a + e)|^{1/2} / (|Sigma(a)|^{1/2} + |Sigma(a + e)|^{1/2})
  return 1.0 / (1.0 + std::exp(h0 - h1));
}

void write_table_csv(std::ostream& out, const MeasureTable& table) {
  const std::size_t n = table.edge_count();
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "config_bits_hex,half_logdet,prob\n";
  out << std::setprecision(17);
  for (const auto& r : table.rows) {
    out << EdgeConfig::from_mask(r.mask, n).to_hex() << ',' << r.half_logdet + 0.0 << ',' << r.prob
        << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace rggm
