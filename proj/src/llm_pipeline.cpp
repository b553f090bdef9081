#include "ghgrl/llm_pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "ghgrl/digest.hpp"
#include "ghgrl/rng.hpp"

namespace ghgrl::llm {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kSystemPrompt =
    "You are a careful data analyst who studies graph datasets. Always answer with one JSON object "
    "that follows the requested schema exactly.";
constexpr const char* kEmptyDescription = "[empty attribute]";
constexpr const char* kFallbackReasoning = "[fallback]";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string excerpt(const std::string& s, std::size_t max_len = 200) {
  return s.size() <= max_len ? s : s.substr(0, max_len) + "...";
}

std::string one_line(const std::string& s) {
  std::string out = s;
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
  return out;
}

std::string numbered_list(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + names[i];
  }
  return out;
}

void backoff(const PipelineOptions& options, int attempt) {
  if (options.retry_backoff.count() <= 0) return;
  std::this_thread::sleep_for(options.retry_backoff * (1 << std::min(attempt, 6)));
}

// Keeps the first occurrence of each name (case-insensitive), dropping
// blanks and non-strings.
std::vector<std::string> clean_names(const json& arr) {
  std::vector<std::string> out;
  std::vector<std::string> seen;
  if (!arr.is_array()) return out;
  for (const auto& item : arr) {
    if (!item.is_string()) continue;
    std::string name = trim(item.get<std::string>());
    if (name.empty()) continue;
    std::string key = lower(name);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(std::move(key));
    out.push_back(std::move(name));
  }
  return out;
}

std::optional<double> read_confidence(const json& v) {
  double c = 0.0;
  if (v.is_number()) {
    c = v.get<double>();
  } else if (v.is_string()) {
    try {
      std::size_t used = 0;
      const std::string s = trim(v.get<std::string>());
      c = std::stod(s, &used);
      if (used != s.size()) return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  if (std::isnan(c)) return std::nullopt;
  return std::clamp(c, 0.0, 1.0);
}

std::optional<std::size_t> match_name(const std::vector<std::string>& names, const std::string& raw) {
  const std::string key = lower(trim(raw));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (lower(names[i]) == key) return i;
  }
  return std::nullopt;
}

struct ParsedAnnotation {
  enum class Status { ok, invalid, unknown_name } status = Status::invalid;
  NodeAnnotation annotation;
  std::string detail;
};

ParsedAnnotation parse_annotation(const std::string& content, const TypeSchema& schema) {
  ParsedAnnotation out;
  const auto obj = extract_json_object(content);
  if (!obj) {
    out.detail = "no JSON object in response: " + excerpt(content);
    return out;
  }
  const auto text_field = [&](const char* name) -> std::optional<std::string> {
    const auto it = obj->find(name);
    if (it == obj->end() || !it->is_string()) return std::nullopt;
    return trim(it->get<std::string>());
  };
  const auto description = text_field("description");
  const auto reasoning = text_field("reasoning");
  const auto fmt_name = text_field("format_type");
  const auto cont_name = text_field("content_type");
  const auto c_fmt = obj->contains("format_confidence") ? read_confidence((*obj)["format_confidence"]) : std::nullopt;
  const auto c_cont = obj->contains("content_confidence") ? read_confidence((*obj)["content_confidence"]) : std::nullopt;
  if (!description || !reasoning || !fmt_name || !cont_name || !c_fmt || !c_cont) {
    out.detail = "response lacks required fields: " + excerpt(content);
    return out;
  }
  const auto fmt = match_name(schema.format_types, *fmt_name);
  const auto cont = match_name(schema.content_types, *cont_name);
  if (!fmt || !cont) {
    out.status = ParsedAnnotation::Status::unknown_name;
    out.detail = "unknown type name \"" + (!fmt ? *fmt_name : *cont_name) + "\"";
    return out;
  }
  out.status = ParsedAnnotation::Status::ok;
  out.annotation.format_index = *fmt;
  out.annotation.format_confidence = *c_fmt;
  out.annotation.content_index = *cont;
  out.annotation.content_confidence = *c_cont;
  out.annotation.description = description->empty() ? "[no description]" : *description;
  out.annotation.reasoning = reasoning->empty() ? "[no reasoning]" : *reasoning;
  return out;
}

const char* source_name(AnnotationSource s) {
  switch (s) {
    case AnnotationSource::model: return "model";
    case AnnotationSource::empty_attribute: return "empty_attribute";
    case AnnotationSource::fallback_invalid: return "fallback_invalid";
    case AnnotationSource::fallback_transport: return "fallback_transport";
  }
  return "model";
}

std::optional<AnnotationSource> parse_source(const std::string& s) {
  for (auto src : {AnnotationSource::model, AnnotationSource::empty_attribute, AnnotationSource::fallback_invalid,
                   AnnotationSource::fallback_transport}) {
    if (s == source_name(src)) return src;
  }
  return std::nullopt;
}

}  // namespace

AttributeSample sample_attributes(const HeteroGraph& graph, std::size_t char_budget, std::uint64_t seed) {
  if (graph.node_count() == 0) throw DataError("cannot sample attributes from an empty graph");
  if (char_budget == 0) throw DataError("attribute sample budget must be positive");

  std::vector<std::size_t> candidates;
  const bool use_train = graph.has_splits() &&
                         std::find(graph.splits.begin(), graph.splits.end(), Split::train) != graph.splits.end();
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    if (!use_train || graph.splits[v] == Split::train) candidates.push_back(v);
  }
  std::size_t shortest = std::string::npos;
  for (const auto v : candidates) shortest = std::min(shortest, graph.attributes[v].size());
  if (shortest > char_budget) {
    throw DataError("attribute sample budget " + std::to_string(char_budget) +
                    " is smaller than the shortest attribute (" + std::to_string(shortest) + " characters)");
  }

  Rng rng(seed);
  rng.shuffle(std::span(candidates));
  AttributeSample sample{{}, char_budget};
  std::size_t used = 0;
  for (const auto v : candidates) {
    const std::size_t len = graph.attributes[v].size();
    if (used + len > char_budget) {
      if (sample.node_ids.empty()) continue;
      break;
    }
    used += len;
    sample.node_ids.push_back(v);
  }
  return sample;
}

std::optional<json> extract_json_object(const std::string& text) {
  for (auto start = text.find('{'); start != std::string::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        auto parsed = json::parse(text.begin() + static_cast<std::ptrdiff_t>(start),
                                  text.begin() + static_cast<std::ptrdiff_t>(i + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

TypeSchema generate_type_schema(const HeteroGraph& graph, const AttributeSample& sample, std::size_t m_fmt,
                                std::size_t m_cont, const PromptTemplates& templates, LlmBackend& backend,
                                const PipelineOptions& options) {
  if (m_fmt < 1 || m_cont < 1) throw DataError("m_fmt and m_cont must be at least 1");
  templates.validate();

  LlmRequest req;
  req.kind = RequestKind::type_generation;
  req.m_fmt = m_fmt;
  req.m_cont = m_cont;
  std::string lines;
  for (const auto v : sample.node_ids) {
    if (v >= graph.node_count()) throw DataError("sample refers to a node outside the graph");
    req.samples.push_back(graph.attributes[v]);
    if (!lines.empty()) lines += '\n';
    lines += "- " + one_line(graph.attributes[v]);
  }
  req.messages = {{"system", kSystemPrompt},
                  {"user", render(templates.generation_template, {{"samples", lines},
                                                                  {"m_fmt", std::to_string(m_fmt)},
                                                                  {"m_cont", std::to_string(m_cont)}})}};

  std::string last_problem;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    if (attempt > 0) backoff(options, attempt - 1);
    req.attempt = attempt;
    std::string content;
    try {
      content = backend.complete(req);
    } catch (const BackendError& e) {
      last_problem = e.what();
      continue;
    }
    const auto obj = extract_json_object(content);
    if (!obj) {
      last_problem = "unparseable response: " + excerpt(content);
      continue;
    }
    auto fmt = clean_names(obj->value("format_types", json::array()));
    auto cont = clean_names(obj->value("content_types", json::array()));
    if (fmt.size() < m_fmt || cont.size() < m_cont) {
      last_problem = "response has " + std::to_string(fmt.size()) + " distinct format and " +
                     std::to_string(cont.size()) + " distinct content names, expected " + std::to_string(m_fmt) +
                     " and " + std::to_string(m_cont) + ": " + excerpt(content);
      continue;
    }
    fmt.resize(m_fmt);
    cont.resize(m_cont);
    TypeSchema schema{std::move(fmt), std::move(cont)};
    schema.validate();
    return schema;
  }
  throw BackendError("type generation failed after " + std::to_string(options.max_retries + 1) +
                     " attempts; last problem: " + last_problem);
}

NodeAnnotation fallback_annotation(double confidence) {
  NodeAnnotation a;
  a.format_index = 0;
  a.content_index = 0;
  a.format_confidence = confidence;
  a.content_confidence = confidence;
  a.description = kEmptyDescription;
  a.reasoning = kFallbackReasoning;
  return a;
}

AnnotationResult annotate_node(const std::string& attribute, const TypeSchema& schema,
                               const PromptTemplates& templates, LlmBackend& backend,
                               const PipelineOptions& options) {
  schema.validate();
  if (trim(attribute).empty()) {
    return {fallback_annotation(options.fallback_confidence), AnnotationSource::empty_attribute};
  }

  LlmRequest req;
  req.kind = RequestKind::node_processing;
  req.attribute = attribute;
  req.format_types = schema.format_types;
  req.content_types = schema.content_types;
  req.messages = {{"system", kSystemPrompt},
                  {"user", render(templates.processing_template,
                                  {{"attribute", attribute},
                                   {"format_types", numbered_list(schema.format_types)},
                                   {"content_types", numbered_list(schema.content_types)}})}};

  const auto give_up = [&](AnnotationSource why, const std::string& problem) -> AnnotationResult {
    if (!options.fallback_enabled) throw BackendError(problem);
    return {fallback_annotation(options.fallback_confidence), why};
  };

  bool repaired = false;
  bool transport_only = true;
  std::string last_problem;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    if (attempt > 0) backoff(options, attempt - 1);
    req.attempt = attempt;
    std::string content;
    try {
      content = backend.complete(req);
    } catch (const BackendError& e) {
      last_problem = e.what();
      continue;
    }
    transport_only = false;
    auto parsed = parse_annotation(content, schema);
    if (parsed.status == ParsedAnnotation::Status::ok) {
      return {std::move(parsed.annotation), AnnotationSource::model};
    }
    last_problem = parsed.detail;
    if (parsed.status == ParsedAnnotation::Status::unknown_name) {
      if (repaired) break;
      repaired = true;
      req.messages.push_back({"user", "The previous answer used a type name that is not in the lists. "
                                      "Allowed format types:\n" +
                                          numbered_list(schema.format_types) + "\nAllowed content types:\n" +
                                          numbered_list(schema.content_types) +
                                          "\nAnswer again with one JSON object, copying names exactly."});
    }
  }
  return give_up(transport_only ? AnnotationSource::fallback_transport : AnnotationSource::fallback_invalid,
                 "annotation failed: " + last_problem);
}

AnnotationCache::AnnotationCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) throw DataError("cache directory not usable: " + dir_.string());
}

std::string AnnotationCache::key(const std::string& templates_version, const TypeSchema& schema,
                                 const std::string& attribute) {
  return sha256_hex(templates_version + schema.canonical_json() + attribute);
}

std::mutex& AnnotationCache::lock_for(const std::string& key) {
  return locks_[stable_hash64(key) % locks_.size()];
}

std::optional<AnnotationResult> AnnotationCache::get(const std::string& key) const {
  std::ifstream in(dir_ / (key + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    AnnotationResult r;
    const auto source = parse_source(j.at("source").get<std::string>());
    if (!source) return std::nullopt;
    r.source = *source;
    r.annotation.format_index = j.at("format_index").get<std::size_t>();
    r.annotation.format_confidence = j.at("format_confidence").get<double>();
    r.annotation.content_index = j.at("content_index").get<std::size_t>();
    r.annotation.content_confidence = j.at("content_confidence").get<double>();
    r.annotation.description = j.at("description").get<std::string>();
    r.annotation.reasoning = j.at("reasoning").get<std::string>();
    return r;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void AnnotationCache::put(const std::string& key, const AnnotationResult& result) {
  ordered_json j;
  j["source"] = source_name(result.source);
  j["format_index"] = result.annotation.format_index;
  j["format_confidence"] = result.annotation.format_confidence;
  j["content_index"] = result.annotation.content_index;
  j["content_confidence"] = result.annotation.content_confidence;
  j["description"] = result.annotation.description;
  j["reasoning"] = result.annotation.reasoning;

  std::lock_guard lock(lock_for(key));
  const auto final_path = dir_ / (key + ".json");
  const auto tmp_path = dir_ / (key + ".json.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write cache entry " + tmp_path.string());
    out << j.dump();
    if (!out) throw DataError("cannot write cache entry " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

std::vector<NodeAnnotation> annotate_all(const HeteroGraph& graph, const TypeSchema& schema,
                                         const PromptTemplates& templates, LlmBackend& backend,
                                         AnnotationCache* cache, std::size_t max_in_flight,
                                         const PipelineOptions& options) {
  schema.validate();
  templates.validate();
  const std::size_t n = graph.node_count();
  std::vector<NodeAnnotation> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  const auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t v = next.fetch_add(1);
      if (v >= n) return;
      try {
        const std::string& attribute = graph.attributes[v];
        std::string key;
        if (cache != nullptr) {
          key = AnnotationCache::key(templates.version, schema, attribute);
          if (auto hit = cache->get(key)) {
            check_annotation(hit->annotation, schema);
            results[v] = std::move(hit->annotation);
            continue;
          }
        }
        auto result = annotate_node(attribute, schema, templates, backend, options);
        if (cache != nullptr && result.source != AnnotationSource::fallback_transport) cache->put(key, result);
        results[v] = std::move(result.annotation);
      } catch (...) {
        errors[v] = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(max_in_flight, n));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  }

  for (std::size_t v = 0; v < n; ++v) {
    if (!errors[v]) continue;
    try {
      std::rethrow_exception(errors[v]);
    } catch (const std::exception& e) {
      throw NodeAnnotationError(v, graph.node_ids[v], e.what());
    }
  }
  return results;
}

}  // namespace ghgrl::llm
