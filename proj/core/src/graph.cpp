#include "rggm/graph.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <sstream>

#include "rggm/error.hpp"
#include "rggm/rng.hpp"

namespace rggm {

Topology::Topology(int node_count, std::vector<Edge> edges, int max_nodes)
    : m_(node_count), edges_(std::move(edges)) {
  if (node_count < 0) throw ConfigError("node count must be non-negative");
  if (node_count > max_nodes) {
    std::ostringstream msg;
    msg << "node count " << node_count << " exceeds cap " << max_nodes;
    throw ConfigError(msg.str());
  }
  for (auto& e : edges_) {
    if (e.i == e.j) {
      throw ConfigError("self-loop at node " + std::to_string(e.i));
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i < 0 || e.j >= m_) {
      throw ConfigError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                        ") out of range for " + std::to_string(m_) + " nodes");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw ConfigError("duplicate edge (" + std::to_string(dup->i) + "," +
                      std::to_string(dup->j) + ")");
  }
}

std::ptrdiff_t Topology::find_edge(int i, int j) const noexcept {
  if (i > j) std::swap(i, j);
  const Edge key{i, j};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return -1;
  return it - edges_.begin();
}

bool Topology::is_prefix_of(const Topology& other) const noexcept {
  if (other.m_ < m_ || other.edges_.size() < edges_.size()) return false;
  return std::equal(edges_.begin(), edges_.end(), other.edges_.begin());
}

std::uint64_t Topology::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(m_));
  for (const auto& e : edges_) {
    feed(static_cast<std::uint64_t>(e.i));
    feed(static_cast<std::uint64_t>(e.j));
  }
  return h;
}

// ---------------------------------------------------------------------------

EdgeConfig::EdgeConfig(std::size_t edge_count)
    : n_(edge_count), words_((edge_count + 63) / 64, 0) {}

EdgeConfig EdgeConfig::from_mask(std::uint64_t mask, std::size_t edge_count) {
  if (edge_count > 64) throw ConfigError("from_mask supports at most 64 edges");
  EdgeConfig c(edge_count);
  if (edge_count == 0) return c;
  if (edge_count < 64) mask &= (std::uint64_t{1} << edge_count) - 1;
  c.words_[0] = mask;
  return c;
}

EdgeConfig EdgeConfig::all_ones(std::size_t edge_count) {
  EdgeConfig c(edge_count);
  for (std::size_t k = 0; k < edge_count; ++k) c.set(k);
  return c;
}

bool EdgeConfig::test(std::size_t k) const {
  if (k >= n_) throw ConfigError("edge index out of range");
  return (words_[k / 64] >> (k % 64)) & 1U;
}

void EdgeConfig::set(std::size_t k, bool value) {
  if (k >= n_) throw ConfigError("edge index out of range");
  const std::uint64_t bit = std::uint64_t{1} << (k % 64);
  if (value) {
    words_[k / 64] |= bit;
  } else {
    words_[k / 64] &= ~bit;
  }
}

void EdgeConfig::flip(std::size_t k) {
  if (k >= n_) throw ConfigError("edge index out of range");
  words_[k / 64] ^= std::uint64_t{1} << (k % 64);
}

std::size_t EdgeConfig::count() const noexcept {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::uint64_t EdgeConfig::to_mask() const {
  if (n_ > 64) throw ConfigError("to_mask supports at most 64 edges");
  return words_.empty() ? 0 : words_[0];
}

EdgeConfig EdgeConfig::extended(std::size_t edge_count) const {
  if (edge_count < n_) throw ConfigError("cannot shrink a configuration");
  EdgeConfig c(edge_count);
  std::copy(words_.begin(), words_.end(), c.words_.begin());
  return c;
}

std::string EdgeConfig::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (n_ + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    const std::size_t bit = 4 * d;
    const unsigned nibble = (words_[bit / 64] >> (bit % 64)) & 0xfU;
    out[digits - 1 - d] = kDigits[nibble];
  }
  return out;
}

EdgeConfig EdgeConfig::from_hex(std::string_view hex, std::size_t edge_count) {
  const std::size_t digits = (edge_count + 3) / 4;
  if (hex.size() != digits) {
    throw DataError("config_bits_hex has " + std::to_string(hex.size()) +
                    " digits, expected " + std::to_string(digits));
  }
  EdgeConfig c(edge_count);
  for (std::size_t d = 0; d < digits; ++d) {
    const char ch = hex[digits - 1 - d];
    unsigned nibble = 0;
    if (ch >= '0' && ch <= '9') {
      nibble = static_cast<unsigned>(ch - '0');
    } else if (ch >= 'a' && ch <= 'f') {
      nibble = static_cast<unsigned>(ch - 'a' + 10);
    } else if (ch >= 'A' && ch <= 'F') {
      nibble = static_cast<unsigned>(ch - 'A' + 10);
    } else {
      throw DataError(std::string("invalid hex digit '") + ch + "'");
    }
    for (unsigned b = 0; b < 4; ++b) {
      if (!((nibble >> b) & 1U)) continue;
      const std::size_t k = 4 * d + b;
      if (k >= edge_count) throw DataError("config_bits_hex sets bits beyond the edge count");
      c.set(k);
    }
  }
  return c;
}

namespace {

void require_same_length(const EdgeConfig& a, const EdgeConfig& b) {
  if (a.size() != b.size()) {
    throw ConfigError("configuration length mismatch: " + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()));
  }
}

template <class Op>
EdgeConfig combine(const EdgeConfig& a, const EdgeConfig& b, Op op) {
  require_same_length(a, b);
  EdgeConfig out(a.size());
  auto wa = a.words();
  auto wb = b.words();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const bool bit = op((wa[k / 64] >> (k % 64)) & 1U, (wb[k / 64] >> (k % 64)) & 1U);
    if (bit) out.set(k);
  }
  return out;
}

}  // namespace

EdgeConfig join(const EdgeConfig& a, const EdgeConfig& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; });
}

EdgeConfig meet(const EdgeConfig& a, const EdgeConfig& b) {
  return combine(a, b, [](bool x, bool y) { return x && y; });
}

bool leq(const EdgeConfig& a, const EdgeConfig& b) {
  require_same_length(a, b);
  auto wa = a.words();
  auto wb = b.words();
  for (std::size_t w = 0; w < wa.size(); ++w) {
    if (wa[w] & ~wb[w]) return false;
  }
  return true;
}

void require_compatible(const Topology& top, const EdgeConfig& config) {
  if (config.size() != top.edge_count()) {
    throw ConfigError("configuration has " + std::to_string(config.size()) +
                      " bits but topology has " + std::to_string(top.edge_count()) +
                      " edges");
  }
}

// ---------------------------------------------------------------------------

NestedKind parse_nested_kind(std::string_view name) {
  if (name == "path") return NestedKind::Path;
  if (name == "comb" || name == "grid") return NestedKind::Comb;
  if (name == "star") return NestedKind::Star;
  throw ConfigError("unknown nested kind '" + std::string(name) + "'");
}

std::string_view to_string(NestedKind kind) {
  switch (kind) {
    case NestedKind::Path: return "path";
    case NestedKind::Comb: return "comb";
    case NestedKind::Star: return "star";
  }
  return "?";
}

Topology make_path(int nodes) {
  std::vector<Edge> edges;
  for (int v = 1; v < nodes; ++v) edges.push_back({v - 1, v});
  return Topology(nodes, std::move(edges));
}

Topology make_cycle(int nodes) {
  if (nodes < 3) throw ConfigError("a cycle needs at least 3 nodes");
  std::vector<Edge> edges;
  for (int v = 1; v < nodes; ++v) edges.push_back({v - 1, v});
  edges.push_back({0, nodes - 1});
  return Topology(nodes, std::move(edges));
}

Topology make_star(int nodes) {
  std::vector<Edge> edges;
  for (int v = 1; v < nodes; ++v) edges.push_back({0, v});
  return Topology(nodes, std::move(edges));
}

Topology make_complete(int nodes) {
  std::vector<Edge> edges;
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) edges.push_back({i, j});
  }
  return Topology(nodes, std::move(edges));
}

Topology make_comb(int nodes) {
  // node v > 0 hangs off the largest even id below it
  std::vector<Edge> edges;
  for (int v = 1; v < nodes; ++v) edges.push_back({(v - 1) / 2 * 2, v});
  return Topology(nodes, std::move(edges));
}

std::vector<Topology> nested_sequence(NestedKind kind, std::span<const int> sizes) {
  std::vector<Topology> out;
  out.reserve(sizes.size());
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (sizes[s] < 1) throw ConfigError("nested sizes must be positive");
    if (s > 0 && sizes[s] <= sizes[s - 1]) {
      throw ConfigError("nested sizes must be strictly increasing");
    }
    switch (kind) {
      case NestedKind::Path: out.push_back(make_path(sizes[s])); break;
      case NestedKind::Comb: out.push_back(make_comb(sizes[s])); break;
      case NestedKind::Star: out.push_back(make_star(sizes[s])); break;
    }
  }
  return out;
}

Topology make_random(int nodes, std::size_t edges, std::uint64_t seed) {
  const std::size_t possible =
      nodes < 2 ? 0 : static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes - 1) / 2;
  if (edges > possible) throw ConfigError("too many edges requested for a simple graph");
  Rng rng = make_rng(seed, 0x7090);
  std::set<Edge> chosen;
  std::uniform_int_distribution<int> pick(0, nodes - 1);
  while (chosen.size() < edges) {
    int i = pick(rng);
    int j = pick(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    chosen.insert({i, j});
  }
  return Topology(nodes, {chosen.begin(), chosen.end()});
}

}  // namespace rggm
