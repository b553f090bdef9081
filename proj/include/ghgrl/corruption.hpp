#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ghgrl/graph.hpp"

namespace ghgrl {

enum class CorruptionKind { rir, rid };

/// Parameters of a corruption pass.
///
/// RIR (random information replacement) swaps a selected node's attribute
/// for one of its pool candidates. RID (random information deletion) drops
/// a fraction of each selected node's whitespace-delimited tokens.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::rid;
  double ratio = 0.0;              // fraction of nodes selected
  double deletion_fraction = 0.0;  // RID only
  std::map<std::size_t, std::vector<std::string>> pool;  // RIR only, keyed by dense node index
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reads {"id": int, "candidates": [string, ...]} lines and maps ids onto
/// the graph's dense indices. Unknown ids and empty candidate lists are
/// data errors.
std::map<std::size_t, std::vector<std::string>> load_replacement_pool(
    const std::filesystem::path& path, const HeteroGraph& graph);

/// Nodes chosen for corruption: the first round(ratio * n) entries of a
/// seeded Fisher-Yates shuffle of all node indices, returned sorted.
std::vector<std::size_t> select_corrupted_nodes(std::size_t node_count, double ratio,
                                                std::uint64_t seed);

/// Maximal runs of non-whitespace characters.
std::vector<std::string> split_tokens(const std::string& text);

/// Removes round(fraction * token_count) tokens picked by `seed` and joins
/// the survivors with single spaces. A zero deletion count returns the text
/// unchanged.
std::string delete_tokens(const std::string& text, double fraction, std::uint64_t seed);

/// Pure function of (graph, spec). Only attributes change.
HeteroGraph corrupt(const HeteroGraph& graph, const CorruptionSpec& spec);

}  // namespace ghgrl
