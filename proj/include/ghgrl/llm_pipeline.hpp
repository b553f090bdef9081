#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghgrl/error.hpp"
#include "ghgrl/graph.hpp"
#include "ghgrl/llm_backend.hpp"
#include "ghgrl/llm_types.hpp"

namespace ghgrl::llm {

/// Characters per token used to turn a model context size into a budget.
inline constexpr std::size_t kCharsPerToken = 4;

struct AttributeSample {
  std::vector<std::size_t> node_ids;  // dense node indices, in draw order
  std::size_t total_char_budget = 0;
};

/// Draws attributes for type generation. Candidates are the train-split
/// nodes when the graph carries splits, otherwise all nodes. After a seeded
/// shuffle, nodes are taken in order while the running character count
/// stays within the budget; nodes that would not fit before the first
/// accepted one are skipped so the sample is never empty.
AttributeSample sample_attributes(const HeteroGraph& graph, std::size_t char_budget, std::uint64_t seed);

struct PipelineOptions {
  int max_retries = 3;  // extra attempts after the first
  bool fallback_enabled = true;
  double fallback_confidence = 0.5;
  std::chrono::milliseconds retry_backoff{0};
};

/// Finds the first balanced JSON object in free text (model answers often
/// wrap it in prose or code fences).
std::optional<nlohmann::json> extract_json_object(const std::string& text);

/// Renders the generation prompt, asks the backend, and keeps the first
/// m_fmt / m_cont distinct names. Retries on transport errors and on
/// answers with too few usable names; throws BackendError when attempts
/// run out.
TypeSchema generate_type_schema(const HeteroGraph& graph, const AttributeSample& sample, std::size_t m_fmt,
                                std::size_t m_cont, const PromptTemplates& templates, LlmBackend& backend,
                                const PipelineOptions& options = {});

enum class AnnotationSource { model, empty_attribute, fallback_invalid, fallback_transport };

struct AnnotationResult {
  NodeAnnotation annotation;
  AnnotationSource source = AnnotationSource::model;
};

NodeAnnotation fallback_annotation(double confidence);

/// Renders the processing prompt for one attribute and parses the answer.
/// Type names are matched case-insensitively. An unknown name triggers one
/// repair request listing the allowed names. Empty attributes never reach
/// the backend.
AnnotationResult annotate_node(const std::string& attribute, const TypeSchema& schema,
                               const PromptTemplates& templates, LlmBackend& backend,
                               const PipelineOptions& options = {});

/// Content-addressed store of annotations, one file per key.
class AnnotationCache {
 public:
  explicit AnnotationCache(std::filesystem::path dir);

  /// Hex SHA-256 of version || schema bytes || attribute bytes.
  static std::string key(const std::string& templates_version, const TypeSchema& schema,
                         const std::string& attribute);

  std::optional<AnnotationResult> get(const std::string& key) const;
  void put(const std::string& key, const AnnotationResult& result);

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::mutex& lock_for(const std::string& key);

  std::filesystem::path dir_;
  std::array<std::mutex, 64> locks_;
};

/// Error from annotate_all carrying the dense index of the failing node.
class NodeAnnotationError : public BackendError {
 public:
  NodeAnnotationError(std::size_t node, std::int64_t node_id, const std::string& what)
      : BackendError("node " + std::to_string(node_id) + ": " + what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Annotates every node with up to `max_in_flight` concurrent requests.
/// Results come back in node order. Finished nodes are cached as they
/// complete, so an interrupted run resumes where it stopped. Fallbacks
/// caused by transport failures are not cached.
std::vector<NodeAnnotation> annotate_all(const HeteroGraph& graph, const TypeSchema& schema,
                                         const PromptTemplates& templates, LlmBackend& backend,
                                         AnnotationCache* cache, std::size_t max_in_flight,
                                         const PipelineOptions& options = {});

}  // namespace ghgrl::llm
