#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rggm/fit.hpp"
#include "rggm/graph.hpp"
#include "rggm/oracle.hpp"
#include "rggm/sampler.hpp"

namespace rggm {

std::string_view tool_version();

// Topology plus the original node labels (labels[id] is the label of id).
struct LabeledGraph {
  Topology topology;
  std::vector<std::string> labels;
};

// Edge list: one "u v" pair per line, '#' starts a comment, labels are
// arbitrary tokens remapped to dense ids in order of first appearance.
// Duplicate edges (either orientation), self-loops and malformed lines are
// DataErrors.
LabeledGraph parse_graph(std::istream& in);
LabeledGraph load_graph(const std::filesystem::path& path);

// JSONL, one {"config_bits_hex", "x", "weight"?} object per line. Lines
// holding a "meta" object and blank lines are skipped.
std::vector<Snapshot> parse_snapshots(std::istream& in, const Topology& top);
std::vector<Snapshot> load_snapshots(const std::filesystem::path& path, const Topology& top);
void write_snapshots(std::ostream& out, std::span<const Snapshot> snapshots);

// Provenance header: tool, version, run config, seed, topology hash.
nlohmann::ordered_json make_metadata(const nlohmann::ordered_json& run_config, std::uint64_t seed,
                                     const Topology& top);

nlohmann::ordered_json to_json(const SampleSummary& summary);
nlohmann::ordered_json to_json(const FitResult& result);
nlohmann::ordered_json to_json(const MeasureTable& table, bool with_mixture_covariance = true);

// {"t", "config_bits_hex", "logdet_sigma", "x" (coupled chains only)}
nlohmann::ordered_json stream_record(const ChainState& chain);

}  // namespace rggm
