#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rggm {

struct Edge {
  int i = 0;
  int j = 0;

  friend constexpr bool operator==(const Edge&, const Edge&) = default;
  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

// Fixed ambient graph G = (V, E). Nodes are 0..m-1; edges are stored with
// i < j in strict lexicographic order, so bit k of an EdgeConfig always
// refers to edges()[k]. Immutable after construction.
class Topology {
 public:
  static constexpr int kDefaultMaxNodes = 4096;

  Topology() = default;

  // Edges may be given in any order and orientation; they are canonicalized.
  // Throws ConfigError on loops, duplicates, out-of-range nodes, or
  // node_count > max_nodes.
  Topology(int node_count, std::vector<Edge> edges,
           int max_nodes = kDefaultMaxNodes);

  int node_count() const noexcept { return m_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t k) const { return edges_.at(k); }

  // Position of (i, j) in the canonical order, or -1 when not in E.
  std::ptrdiff_t find_edge(int i, int j) const noexcept;

  // True when `other` has at least as many nodes and its first edge_count()
  // edges equal ours, so configurations extend by appending zero bits.
  bool is_prefix_of(const Topology& other) const noexcept;

  // FNV-1a over (m, edges); stable across runs and platforms.
  std::uint64_t hash() const noexcept;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  int m_ = 0;
  std::vector<Edge> edges_;
};

// One realization a in {0,1}^E, bit-packed.
class EdgeConfig {
 public:
  EdgeConfig() = default;
  explicit EdgeConfig(std::size_t edge_count);

  // Low bits of `mask` become bits 0..edge_count-1. edge_count <= 64.
  static EdgeConfig from_mask(std::uint64_t mask, std::size_t edge_count);
  static EdgeConfig all_ones(std::size_t edge_count);

  // Hex form used by the file formats: the configuration read as an unsigned
  // integer with bit k weighted 2^k, most significant digit first, exactly
  // ceil(n/4) lowercase digits ("" when n = 0).
  static EdgeConfig from_hex(std::string_view hex, std::size_t edge_count);
  std::string to_hex() const;

  std::size_t size() const noexcept { return n_; }
  bool test(std::size_t k) const;
  void set(std::size_t k, bool value = true);
  void reset(std::size_t k) { set(k, false); }
  void flip(std::size_t k);
  std::size_t count() const noexcept;

  // Requires size() <= 64.
  std::uint64_t to_mask() const;

  // Extends with zero bits (embedding into a larger nested topology).
  EdgeConfig extended(std::size_t edge_count) const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const EdgeConfig&, const EdgeConfig&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

// Lattice operations on {0,1}^E; all throw ConfigError on length mismatch.
EdgeConfig join(const EdgeConfig& a, const EdgeConfig& b);
EdgeConfig meet(const EdgeConfig& a, const EdgeConfig& b);
bool leq(const EdgeConfig& a, const EdgeConfig& b);

// Checks that `config` was built for `top` (ConfigError otherwise).
void require_compatible(const Topology& top, const EdgeConfig& config);

enum class NestedKind { Path, Comb, Star };

NestedKind parse_nested_kind(std::string_view name);
std::string_view to_string(NestedKind kind);

// Builds a nested family G(1) ⊂ G(2) ⊂ ... with sizes = node counts.
// Each topology's edge list is a prefix of the next one's. Comb is the
// cycle-free grid: a spine on even ids with one tooth (odd id) per spine
// node, i.e. a spanning tree of a 2 x k grid.
std::vector<Topology> nested_sequence(NestedKind kind, std::span<const int> sizes);

Topology make_path(int nodes);
Topology make_cycle(int nodes);
Topology make_star(int nodes);
Topology make_complete(int nodes);
Topology make_comb(int nodes);

}  // namespace rggm

namespace rggm {

// Uniform random simple graph with exactly `edges` edges (G(m, M) model),
// drawn from a generator seeded with `seed`.
Topology make_random(int nodes, std::size_t edges, std::uint64_t seed);

}  // namespace rggm
