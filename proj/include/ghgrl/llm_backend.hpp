#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ghgrl::llm {

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

enum class RequestKind { type_generation, node_processing };

/// A rendered chat request plus the structured inputs it was rendered from.
/// Remote backends send only `messages`; offline backends may read the
/// structured fields instead of re-parsing prompt prose.
struct LlmRequest {
  RequestKind kind = RequestKind::node_processing;
  std::vector<ChatMessage> messages;
  int attempt = 0;

  // type_generation
  std::vector<std::string> samples;
  std::size_t m_fmt = 0;
  std::size_t m_cont = 0;

  // node_processing
  std::string attribute;
  std::vector<std::string> format_types;
  std::vector<std::string> content_types;
};

/// Chat-completion backend. Implementations must be safe to call from
/// several threads at once. Transport failures throw BackendError; the
/// returned string is the raw assistant message content.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  std::string complete(const LlmRequest& request) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_complete(request);
  }

  std::size_t call_count() const noexcept { return calls_.load(std::memory_order_relaxed); }

 protected:
  virtual std::string do_complete(const LlmRequest& request) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Offline deterministic backend.
///
/// Type generation names format types after the surface buckets they cover
/// and numbers the content types. Node processing maps the attribute's
/// surface bucket to format type bucket * m_fmt / 4
/// and the content type and both confidences from a stable hash of the
/// attribute. The description carries the attribute text, so any signal
/// planted there reaches the embedding.
class MockLlmBackend final : public LlmBackend {
 public:
  /// Surface bucket in [0, 4): 0 digits-only, 1 short, 2 sentence, 3 long.
  static std::size_t surface_bucket(const std::string& attribute) noexcept;

 protected:
  std::string do_complete(const LlmRequest& request) override;
};

struct RemoteLlmConfig {
  std::string endpoint;  // scheme://host[:port]
  std::string api_key;
  std::string model = "llama-3-70b-instruct";
  std::chrono::seconds timeout{120};

  /// Reads GHGRL_LLM_ENDPOINT (required) and GHGRL_LLM_API_KEY.
  static RemoteLlmConfig from_env();
};

/// OpenAI-compatible POST {endpoint}/v1/chat/completions at temperature 0.
class RemoteLlmBackend final : public LlmBackend {
 public:
  explicit RemoteLlmBackend(RemoteLlmConfig config);

 protected:
  std::string do_complete(const LlmRequest& request) override;

 private:
  RemoteLlmConfig config_;
};

/// Builds the JSON request body sent to the chat completions endpoint.
std::string chat_request_body(const std::string& model, const std::vector<ChatMessage>& messages);

/// Extracts choices[0].message.content; throws BackendError otherwise.
std::string chat_response_content(const std::string& body);

}  // namespace ghgrl::llm
