#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ghgrl {

enum class Split : std::uint8_t { none, train, val, test };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view s) noexcept;

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Heterogeneous graph with raw string node attributes. Node and edge types
/// are unknown; only topology and text are stored.
///
/// Nodes are densely indexed 0..n-1 in file order. `node_ids` keeps the
/// identifiers used by the input files so outputs can be written back in
/// the same id space.
struct HeteroGraph {
  std::vector<std::int64_t> node_ids;
  std::vector<std::string> attributes;
  std::vector<Edge> edges;                // undirected, stored with src < dst
  std::vector<std::optional<int>> labels;  // empty or one entry per node
  std::vector<Split> splits;               // empty or one entry per node
  int num_classes = 0;

  std::size_t node_count() const noexcept { return attributes.size(); }
  bool has_labels() const noexcept;
  bool has_splits() const noexcept;

  /// Throws DataError describing the first violated invariant.
  void validate(bool allow_self_loops = false) const;

  friend bool operator==(const HeteroGraph&, const HeteroGraph&) = default;
};

struct LoadOptions {
  bool allow_self_loops = false;
};

/// Reads a nodes JSONL file and an edges CSV file.
///
/// nodes: {"id": int, "attribute": string, "label": int|null, "split": "train"|"val"|"test"|null}
/// edges: header "src,dst", then one undirected edge per row, in node-id space.
///
/// Repeated undirected edges collapse to one. Self-loops are dropped unless
/// `allow_self_loops` is set.
HeteroGraph load_dataset(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path, LoadOptions options = {});

void write_nodes(const HeteroGraph& graph, const std::filesystem::path& path);
void write_edges(const HeteroGraph& graph, const std::filesystem::path& path);

/// Sorted neighbor lists, symmetric.
std::vector<std::vector<std::size_t>> neighbor_lists(const HeteroGraph& graph);

/// Seeded per-class split of labeled nodes. Within each class, nodes are
/// shuffled and the first round(train_ratio * k) become train, the next
/// round(val_ratio * k) val, the rest test. Unlabeled nodes get Split::none.
std::vector<Split> stratified_splits(const HeteroGraph& graph, double train_ratio,
                                     double val_ratio, std::uint64_t seed);

/// Round-half-up to the nearest integer count.
std::size_t round_count(double x) noexcept;

}  // namespace ghgrl
