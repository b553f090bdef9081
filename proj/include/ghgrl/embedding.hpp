#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghgrl/llm_types.hpp"
#include "ghgrl/matrix.hpp"

namespace ghgrl::llm {

/// Node feature matrix as produced by the embedder: float32, row-major.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<float> values;

  std::size_t rows() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t r) const noexcept { return {values.data() + r * dim, dim}; }

  /// Widens to doubles for the model.
  Matrix to_matrix() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Binary layout: "GHGF", u32 version (1), u64 rows, u32 dim, rows*dim
/// little-endian float32.
void write_features(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

/// Text embedding backend. Every vector returned through `embed` must have
/// the dimension of the first batch seen; a mismatch is a DataError.
class Embedder {
 public:
  virtual ~Embedder() = default;

  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts);

  std::size_t call_count() const noexcept { return calls_.load(std::memory_order_relaxed); }
  std::optional<std::size_t> dim() const;

 protected:
  virtual std::vector<std::vector<float>> do_embed(const std::vector<std::string>& texts) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  std::optional<std::size_t> dim_;
};

/// Hashed bag of words: each lower-cased alphanumeric token adds a signed
/// unit to a hashed bucket; the result is L2-normalised. Text without any
/// token hashes as a whole into one bucket, so every vector has unit norm.
class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(std::size_t dim);

  static std::vector<float> embed_text(const std::string& text, std::size_t dim);

 protected:
  std::vector<std::vector<float>> do_embed(const std::vector<std::string>& texts) override;

 private:
  std::size_t dim_;
};

/// POST {endpoint}/embed with {"texts": [...]}, expecting {"embeddings": [[...], ...]}.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(std::string endpoint, std::chrono::seconds timeout = std::chrono::seconds{120});

  /// Reads GHGRL_EMBED_ENDPOINT.
  static std::unique_ptr<RemoteEmbedder> from_env();

 protected:
  std::vector<std::vector<float>> do_embed(const std::vector<std::string>& texts) override;

 private:
  std::string endpoint_;
  std::chrono::seconds timeout_;
};

/// Text handed to the embedder for one node: description, a newline, then
/// the reasoning.
std::string embedding_text(const NodeAnnotation& annotation);

std::vector<float> embed_annotation(const NodeAnnotation& annotation, Embedder& embedder);

FeatureMatrix build_feature_matrix(const std::vector<NodeAnnotation>& annotations, Embedder& embedder,
                                   std::size_t batch_size = 32);

}  // namespace ghgrl::llm
