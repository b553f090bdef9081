#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ghgrl/graph.hpp"
#include "ghgrl/llm_backend.hpp"
#include "ghgrl/matrix.hpp"
#include "ghgrl/pagnn.hpp"

namespace ghgrl::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Text-attributed graph with a class signal planted in the attributes and
/// homophilous edges. Attributes come in two surface forms: short keyword
/// pairs and sentence-length notes.
struct SyntheticSpec {
  std::size_t nodes = 300;
  int classes = 3;
  std::size_t edges_per_node = 3;
  double homophily = 0.9;
  double off_class_word_rate = 0.1;
  double train_ratio = 0.4;
  double val_ratio = 0.1;
  std::uint64_t seed = 7;
};

HeteroGraph synthetic_text_graph(const SyntheticSpec& spec);

/// Attributes of random "wN" words, min..max words each, sometimes with
/// double spaces. Path edges, alternating labels.
HeteroGraph word_graph(std::size_t nodes, std::size_t min_words, std::size_t max_words, std::uint64_t seed);

struct DatasetPaths {
  std::filesystem::path nodes;
  std::filesystem::path edges;
};

DatasetPaths write_dataset(const HeteroGraph& graph, const std::filesystem::path& dir);

/// Random typed topology with random features and confidences.
struct TypedFixture {
  pagnn::TypedAdjacency adj;
  Matrix features;
};

TypedFixture random_typed_fixture(std::size_t nodes, std::size_t format_types, std::size_t content_types,
                                  std::size_t dim, double edge_probability, std::uint64_t seed);

/// Typed topology whose features carry a content-type indicator plus noise,
/// all confidences 1. Used to compare layer-wise smoothing with and without
/// the type-conditioned blocks.
struct SmoothingFixture {
  TypedFixture typed;
  pagnn::PagnnConfig config;  // 4 layers, all type-conditioned
};

SmoothingFixture smoothing_fixture(std::uint64_t seed);

/// Random typed topology wrapped in a labeled graph. Labels follow the
/// content type, features hold a label indicator plus noise, splits are
/// stratified 0.4/0.1.
struct LabeledFixture {
  HeteroGraph graph;
  TypedFixture typed;
};

LabeledFixture labeled_fixture(std::size_t nodes, std::size_t dim, std::uint64_t seed);

/// Macro and micro F1 by direct per-class counting over the item list.
struct BruteForceF1 {
  double macro = 0.0;
  double micro = 0.0;
};

BruteForceF1 brute_force_f1(const std::vector<std::size_t>& predictions, const std::vector<int>& labels,
                            std::size_t num_classes);

/// Connected random graph: a random spanning tree plus extra edges with
/// the given probability. Sorted symmetric neighbor lists.
std::vector<std::vector<std::size_t>> connected_random_graph(std::size_t nodes, double extra_edge_probability,
                                                             std::uint64_t seed);

/// Rows of (I + s * mean-aggregation)^layers applied to the features,
/// computed with a dense matrix and a global rescale each step.
Matrix power_iteration_oracle(const std::vector<std::vector<std::size_t>>& neighbors, const Matrix& features,
                              double scale, std::size_t layers);

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

/// Runs the command-line entry point in-process.
CliResult run_cli(const std::vector<std::string>& args);

/// Artifact file names written by run_cli_pipeline, relative to its directory.
inline const std::vector<std::string> kPipelineArtifacts{"nodes.jsonl", "edges.csv",   "schema.json",
                                                         "annotations.jsonl", "features.bin", "params.bin",
                                                         "history.csv", "report.json"};

/// gen-types, annotate, embed, train and eval on the synthetic graph with
/// mock backends, all inside `dir`. Returns the first failing step's result,
/// or the eval result.
CliResult run_cli_pipeline(const SyntheticSpec& spec, const std::filesystem::path& dir);

/// Straight-line network with no type indexing, for one format type, one
/// content type, unit confidences and alpha 1. Means are sums in sorted
/// neighbour order times the reciprocal degree; products accumulate over
/// the inner index in increasing order.
Matrix shared_parameter_reference(const Matrix& x, const std::vector<std::vector<std::size_t>>& nbrs,
                                  const pagnn::PagnnConfig& c, const pagnn::PagnnParams& p);

/// Smallest |pre-activation| anywhere in the network. Central differences
/// are only trustworthy away from the activation kink.
double kink_distance(const Matrix& features, const pagnn::TypedAdjacency& adj, const pagnn::PagnnConfig& c,
                     const pagnn::PagnnParams& p);

struct FdResult {
  double worst = 0.0;  // largest |a - n| / max(|a|, |n|, 1e-4)
  std::size_t checked = 0;
};

/// Analytic gradients of sum(upstream .* logits) against central
/// differences (step 1e-4) for every parameter entry and every feature.
FdResult finite_difference_check(const Matrix& features, const pagnn::TypedAdjacency& adj,
                                 const pagnn::PagnnConfig& c, pagnn::PagnnParams p, const Matrix& upstream);

/// Matrix with entries uniform in [lo, hi).
Matrix random_matrix(std::size_t rows, std::size_t cols, double lo, double hi, std::uint64_t seed);

/// Backend whose replies come from a callback.
class ScriptedBackend final : public llm::LlmBackend {
 public:
  using Handler = std::function<std::string(const llm::LlmRequest&)>;
  explicit ScriptedBackend(Handler handler) : handler_(std::move(handler)) {}

 protected:
  std::string do_complete(const llm::LlmRequest& request) override { return handler_(request); }

 private:
  Handler handler_;
};

}  // namespace ghgrl::testing
