#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "rggm/graph.hpp"
#include "rggm/linalg.hpp"
#include "rggm/params.hpp"

namespace rggm {

// Exact edge marginal mu_A(a) = |Sigma(a)|^{1/2} / kappa over all 2^n
// configurations. Row r holds the configuration whose mask is r (bit k =
// edge k), so lookups by configuration are O(1).
struct MeasureTable {
  struct Row {
    std::uint32_t mask = 0;
    double half_logdet = 0.0;  // log |Sigma(a)|^{1/2}
    double prob = 0.0;
  };

  Topology topology;
  ModelParams params;
  std::vector<Row> rows;
  double log_kappa = 0.0;  // log sum_a |Sigma(a)|^{1/2}

  std::size_t edge_count() const noexcept { return topology.edge_count(); }
  const Row& row(const EdgeConfig& config) const;
};

struct EnumerateOptions {
  static constexpr std::size_t kMaxEdges = 24;

  // Chain configurations in Gray-code order with one rank-1 update per step
  // instead of an independent Cholesky per configuration.
  bool gray_code = false;
  int refresh_period = kDefaultRefreshPeriod;
  // Rows x bytes-per-row must stay under this.
  std::size_t memory_limit_bytes = std::size_t{1} << 30;
};

// Throws SizeError when n > 24 or the table would exceed the memory limit.
MeasureTable enumerate(const Topology& top, const ModelParams& params,
                       const EnumerateOptions& options = {});

using ConfigPredicate = std::function<bool(const EdgeConfig&)>;

double event_probability(const MeasureTable& table, const ConfigPredicate& predicate);

// E over mu_X of X X^T = sum_a mu_A(a) Sigma(a).
SymMatrix mixture_covariance(const MeasureTable& table);

// mu(A_e = 1 | A on E \ {e} = context), read off as a two-row ratio. Bit e
// of `context` is ignored.
double conditional_from_table(const MeasureTable& table, std::size_t edge,
                              const EdgeConfig& context);

// CSV: header "config_bits_hex,half_logdet,prob", one row per configuration,
// values printed with 17 significant digits.
void write_table_csv(std::ostream& out, const MeasureTable& table);

}  // namespace rggm
