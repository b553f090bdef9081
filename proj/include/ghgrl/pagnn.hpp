#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ghgrl/graph.hpp"
#include "ghgrl/llm_types.hpp"
#include "ghgrl/matrix.hpp"

namespace ghgrl::pagnn {

enum class Activation : std::uint8_t { relu, leaky_relu };

inline constexpr double kLeakySlope = 0.01;

double activate(Activation act, double x) noexcept;
double activate_grad(Activation act, double pre) noexcept;

/// Architecture hyperparameters.
///
/// Layers 1..format_layers run the format alignment block, layers
/// 1..content_layers the content processing block, and every layer the
/// regular block. Hidden width is uniform: format_dim == content_dim ==
/// regular_dim.
struct PagnnConfig {
  std::size_t num_layers = 2;
  std::size_t format_layers = 1;
  std::size_t content_layers = 2;
  std::size_t input_dim = 0;
  std::size_t format_dim = 64;
  std::size_t content_dim = 64;
  std::size_t regular_dim = 64;
  double alpha = 1.0;
  std::size_t num_format_types = 1;
  std::size_t num_content_types = 1;
  std::size_t num_classes = 2;
  Activation activation = Activation::relu;
  bool use_input_projection = true;
  double confidence_floor = 0.0;
  std::uint64_t seed = 0;

  std::size_t hidden_dim() const noexcept { return format_dim; }

  /// Throws DataError on violated invariants.
  void validate() const;

  friend bool operator==(const PagnnConfig&, const PagnnConfig&) = default;
};

struct FormatBlockParams {
  std::vector<Matrix> weight;  // [type] d x d
  Matrix bias;                 // types x d
  friend bool operator==(const FormatBlockParams&, const FormatBlockParams&) = default;
};

struct ContentBlockParams {
  std::vector<Matrix> weight;            // [type] d x d, source-typed transform
  Matrix bias;                           // types x d
  std::vector<Matrix> aggregate_weight;  // [type] d x d, target-typed aggregation
  friend bool operator==(const ContentBlockParams&, const ContentBlockParams&) = default;
};

struct LayerParams {
  std::optional<FormatBlockParams> format;
  std::optional<ContentBlockParams> content;
  Matrix regular_weight;  // d x d
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct PagnnParams {
  std::optional<Matrix> input_projection;  // input_dim x d
  std::vector<LayerParams> layers;
  Matrix classifier_weight;  // d x num_classes
  Matrix classifier_bias;    // 1 x num_classes

  friend bool operator==(const PagnnParams&, const PagnnParams&) = default;
};

enum class TensorRole : std::uint8_t { weight, bias };

/// Visits every tensor in declaration order: input projection; per layer
/// format W[t]..., format B, content W[t]..., content B, aggregation W[t]...,
/// regular W; classifier W, classifier b.
void for_each_tensor(PagnnParams& params, const std::function<void(Matrix&, TensorRole)>& fn);
void for_each_tensor(const PagnnParams& params, const std::function<void(const Matrix&, TensorRole)>& fn);

/// Same structure, every entry zero.
PagnnParams zeros_like(const PagnnParams& params);

std::size_t parameter_count(const PagnnParams& params);

/// Glorot-uniform weights drawn from a counter-based stream keyed by
/// (seed, tensor index, entry index); biases zero.
PagnnParams init_params(const PagnnConfig& config);

/// Checks that tensor shapes match the config. Throws DataError.
void check_params(const PagnnParams& params, const PagnnConfig& config);

/// Topology fused with the per-node type estimates used by the model.
struct TypedAdjacency {
  std::vector<std::vector<std::size_t>> neighbors;  // sorted, symmetric
  std::vector<std::size_t> format_index;
  std::vector<double> format_confidence;
  std::vector<std::size_t> content_index;
  std::vector<double> content_confidence;

  std::size_t node_count() const noexcept { return neighbors.size(); }

  static TypedAdjacency build(const HeteroGraph& graph, const std::vector<llm::NodeAnnotation>& annotations);

  void validate(std::size_t num_format_types, std::size_t num_content_types) const;
};

struct FormatTrace {
  Matrix pre;
};

struct ContentTrace {
  Matrix pre;       // c * (H W + B)
  Matrix hidden;    // activation of pre
  Matrix neighbor;  // mean of hidden over neighbors
};

struct RegularTrace {
  Matrix combined;  // H[v] + mean of H over neighbors
  Matrix pre;
};

/// row v = act(c * (H[v] W[t] + B[t]) + (1 - c) * H[v]),
/// t = format type of v, c = max(format confidence of v, floor).
Matrix format_alignment_forward(const Matrix& input, const TypedAdjacency& adj, const FormatBlockParams& params,
                                Activation act, double confidence_floor, FormatTrace* trace = nullptr);

/// hidden[v] = act(c * (H[v] W[t(v)] + B[t(v)])) with the node's own content
/// type t(v); then
/// out[v] = alpha * hidden[v] + mean_{u in N(v)}(hidden[u]) * Wagg[t(v)],
/// typed by the aggregation target. Empty neighborhoods contribute zero.
Matrix content_forward(const Matrix& input, const TypedAdjacency& adj, const ContentBlockParams& params,
                       double alpha, Activation act, double confidence_floor, ContentTrace* trace = nullptr);

/// out[v] = act((H[v] + mean_{u in N(v)} H[u]) W).
Matrix regular_forward(const Matrix& input, const TypedAdjacency& adj, const Matrix& weight, Activation act,
                       RegularTrace* trace = nullptr);

enum class BlockKind : std::uint8_t { input_projection, format, content, regular, classifier };

struct BlockCall {
  std::size_t layer = 0;  // 1-based; 0 for projection and classifier
  BlockKind kind = BlockKind::regular;
  friend bool operator==(const BlockCall&, const BlockCall&) = default;
};

struct LayerTrace {
  Matrix input;
  std::optional<Matrix> format_out;
  FormatTrace format;
  std::optional<Matrix> content_out;
  ContentTrace content;
  RegularTrace regular;
  Matrix output;
};

struct ForwardTrace {
  Matrix projected;  // input to layer 1
  std::vector<LayerTrace> layers;
  std::vector<BlockCall> calls;
};

/// Optional projection, the layer schedule, then the linear classifier.
/// Throws DataError on shape mismatch or when a block yields non-finite
/// values (the message names the layer and block).
Matrix pagnn_forward(const Matrix& features, const TypedAdjacency& adj, const PagnnConfig& config,
                     const PagnnParams& params, ForwardTrace* trace = nullptr);

struct PagnnGradients {
  PagnnParams params;
  Matrix features;
};

/// Exact reverse-mode gradients of sum(upstream .* logits).
PagnnGradients pagnn_backward(const Matrix& features, const TypedAdjacency& adj, const PagnnConfig& config,
                              const PagnnParams& params, const Matrix& upstream);

/// "GHGP", u32 version, config, then every tensor as little-endian float64.
void write_checkpoint(const PagnnConfig& config, const PagnnParams& params, const std::filesystem::path& path);

struct Checkpoint {
  PagnnConfig config;
  PagnnParams params;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace ghgrl::pagnn
