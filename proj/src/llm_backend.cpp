#include "ghgrl/llm_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "ghgrl/digest.hpp"
#include "ghgrl/error.hpp"

namespace ghgrl::llm {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kMockFormatNames[] = {"numeric identifier", "short name or keyword",
                                            "sentence-length text", "multi-paragraph text"};
constexpr std::size_t kSurfaceBuckets = 4;

// Spreads the surface buckets evenly over m format types.
std::size_t mock_format_index(std::size_t bucket, std::size_t m) { return bucket * m / kSurfaceBuckets; }

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string excerpt(const std::string& s, std::size_t max_len = 200) {
  return s.size() <= max_len ? s : s.substr(0, max_len) + "...";
}

std::string mock_generation(const LlmRequest& req) {
  ordered_json j;
  auto& fmt = j["format_types"] = ordered_json::array();
  for (std::size_t i = 0; i < req.m_fmt; ++i) {
    std::string name;
    for (std::size_t b = 0; b < kSurfaceBuckets; ++b) {
      if (mock_format_index(b, req.m_fmt) == i) name += (name.empty() ? "" : " or ") + std::string(kMockFormatNames[b]);
    }
    fmt.push_back(name.empty() ? "format type " + std::to_string(i + 1) : name);
  }
  auto& cont = j["content_types"] = ordered_json::array();
  for (std::size_t i = 0; i < req.m_cont; ++i) cont.push_back("content group " + std::to_string(i + 1));
  return j.dump();
}

std::string mock_processing(const LlmRequest& req) {
  if (req.format_types.empty() || req.content_types.empty()) {
    throw BackendError("mock backend: processing request without type lists");
  }
  const std::string text = trimmed(req.attribute);
  const std::uint64_t h = stable_hash64(text);
  const std::size_t bucket = MockLlmBackend::surface_bucket(text);
  const std::size_t fmt = mock_format_index(bucket, req.format_types.size());
  const std::size_t cont = static_cast<std::size_t>(h % req.content_types.size());
  // Confidences in [0.5, 1.0], quantised to 1/1000 so they print compactly.
  const double c_fmt = 0.5 + static_cast<double>((h >> 20) % 501) / 1000.0;
  const double c_cont = 0.5 + static_cast<double>((h >> 40) % 501) / 1000.0;

  ordered_json j;
  j["description"] = "Node attribute reads: " + text;
  j["format_type"] = req.format_types[fmt];
  j["format_confidence"] = c_fmt;
  j["content_type"] = req.content_types[cont];
  j["content_confidence"] = c_cont;
  j["reasoning"] = "Surface form is " + std::string(kMockFormatNames[bucket]) + " (" +
                   std::to_string(text.size()) + " characters); content group assigned by stable hash.";
  return j.dump();
}

}  // namespace

std::size_t MockLlmBackend::surface_bucket(const std::string& attribute) noexcept {
  const std::string text = trimmed(attribute);
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return 0;
  }
  if (text.size() <= 24) return 1;
  if (text.size() <= 120) return 2;
  return 3;
}

std::string MockLlmBackend::do_complete(const LlmRequest& request) {
  return request.kind == RequestKind::type_generation ? mock_generation(request) : mock_processing(request);
}

RemoteLlmConfig RemoteLlmConfig::from_env() {
  RemoteLlmConfig config;
  const char* endpoint = std::getenv("GHGRL_LLM_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') throw BackendError("GHGRL_LLM_ENDPOINT is not set");
  config.endpoint = endpoint;
  if (const char* key = std::getenv("GHGRL_LLM_API_KEY")) config.api_key = key;
  return config;
}

RemoteLlmBackend::RemoteLlmBackend(RemoteLlmConfig config) : config_(std::move(config)) {
  while (!config_.endpoint.empty() && config_.endpoint.back() == '/') config_.endpoint.pop_back();
  if (config_.endpoint.empty()) throw BackendError("remote LLM endpoint is empty");
}

std::string chat_request_body(const std::string& model, const std::vector<ChatMessage>& messages) {
  ordered_json body;
  body["model"] = model;
  body["temperature"] = 0;
  auto& msgs = body["messages"] = ordered_json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return body.dump();
}

std::string chat_response_content(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError("unexpected chat completion response: " + excerpt(body));
  }
}

std::string RemoteLlmBackend::do_complete(const LlmRequest& request) {
  // One client per call keeps the backend safe to share across threads.
  httplib::Client client(config_.endpoint);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res = client.Post("/v1/chat/completions", headers,
                               chat_request_body(config_.model, request.messages), "application/json");
  if (!res) {
    throw BackendError("chat completion request to " + config_.endpoint + " failed: " +
                       httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("chat completion returned HTTP " + std::to_string(res->status) + ": " +
                       excerpt(res->body));
  }
  return chat_response_content(res->body);
}

}  // namespace ghgrl::llm
