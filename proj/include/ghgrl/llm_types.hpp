#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ghgrl::llm {

/// Generated node type names: how attributes are written (format) and what
/// they are about (content).
struct TypeSchema {
  std::vector<std::string> format_types;
  std::vector<std::string> content_types;

  /// Throws DataError unless both lists are non-empty and contain unique,
  /// non-empty names.
  void validate() const;

  /// Canonical JSON bytes; hashed into cache keys and digests.
  std::string canonical_json() const;

  friend bool operator==(const TypeSchema&, const TypeSchema&) = default;
};

TypeSchema read_schema(const std::filesystem::path& path);
void write_schema(const TypeSchema& schema, const std::filesystem::path& path);

/// Prompt texts for the two LLM passes. Placeholders are `{{name}}` tokens
/// that must each occur exactly once.
struct PromptTemplates {
  std::string generation_template;  // {{samples}} {{m_fmt}} {{m_cont}}
  std::string processing_template;  // {{attribute}} {{format_types}} {{content_types}}
  std::string version;

  void validate() const;

  static PromptTemplates defaults();
};

PromptTemplates read_templates(const std::filesystem::path& path);

/// Replaces every `{{key}}` with its value. Values are inserted verbatim
/// and never re-scanned.
std::string render(const std::string& tmpl,
                   const std::vector<std::pair<std::string, std::string>>& values);

/// Per-node LLM output: type estimates with confidences plus free text.
struct NodeAnnotation {
  std::size_t format_index = 0;
  double format_confidence = 0.0;
  std::size_t content_index = 0;
  double content_confidence = 0.0;
  std::string description;
  std::string reasoning;

  friend bool operator==(const NodeAnnotation&, const NodeAnnotation&) = default;
};

/// Throws DataError if an index is outside the schema or a confidence is
/// outside [0, 1].
void check_annotation(const NodeAnnotation& a, const TypeSchema& schema);

/// One JSON object per line, in node order. `node_ids` label each line.
void write_annotations(const std::vector<NodeAnnotation>& annotations,
                       const std::vector<std::int64_t>& node_ids, const TypeSchema& schema,
                       const std::filesystem::path& path);

struct AnnotationFile {
  std::vector<std::int64_t> node_ids;
  std::vector<NodeAnnotation> annotations;
};

AnnotationFile read_annotations(const std::filesystem::path& path);

}  // namespace ghgrl::llm
