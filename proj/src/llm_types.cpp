#include "ghgrl/llm_types.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ghgrl/error.hpp"

namespace ghgrl::llm {
namespace {

using ordered_json = nlohmann::ordered_json;

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void require_placeholders(const std::string& tmpl, const char* which,
                          std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    const std::string token = std::string("{{") + key + "}}";
    const auto n = count_occurrences(tmpl, token);
    if (n != 1) {
      throw DataError(std::string(which) + " template must contain " + token + " exactly once (found " +
                      std::to_string(n) + ")");
    }
  }
}

void check_names(const std::vector<std::string>& names, const char* which) {
  if (names.empty()) throw DataError(std::string("schema has no ") + which + " types");
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) throw DataError(std::string("empty ") + which + " type name");
    if (!seen.insert(name).second) throw DataError(std::string("duplicate ") + which + " type name: " + name);
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void TypeSchema::validate() const {
  check_names(format_types, "format");
  check_names(content_types, "content");
}

std::string TypeSchema::canonical_json() const {
  ordered_json j;
  j["format_types"] = format_types;
  j["content_types"] = content_types;
  return j.dump();
}

TypeSchema read_schema(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
    TypeSchema schema{j.at("format_types").get<std::vector<std::string>>(),
                      j.at("content_types").get<std::vector<std::string>>()};
    schema.validate();
    return schema;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid schema file: " + e.what());
  }
}

void write_schema(const TypeSchema& schema, const std::filesystem::path& path) {
  ordered_json j;
  j["format_types"] = schema.format_types;
  j["content_types"] = schema.content_types;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void PromptTemplates::validate() const {
  require_placeholders(generation_template, "generation", {"samples", "m_fmt", "m_cont"});
  require_placeholders(processing_template, "processing", {"attribute", "format_types", "content_types"});
  if (version.empty()) throw DataError("template version must not be empty");
}

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.generation_template =
      "Below are node attributes sampled from a graph whose node types are unknown. The attributes "
      "may be written in very different ways: identifiers, names, keyword lists, sentences, long "
      "descriptions.\n\n"
      "Propose two sets of node type names:\n"
      "1. exactly {{m_fmt}} FORMAT types describing how an attribute is written "
      "(for example \"keyword list\" or \"full sentence\");\n"
      "2. exactly {{m_cont}} CONTENT types describing what an attribute is about "
      "(for example \"article about sports\").\n"
      "Names must be short, distinct and cover the samples.\n\n"
      "Samples (one per line):\n{{samples}}\n\n"
      "Answer with a single JSON object and nothing else:\n"
      "{\"format_types\": [string, ...], \"content_types\": [string, ...]}";
  t.processing_template =
      "Analyse the following node attribute taken from a graph.\n\n"
      "Attribute:\n{{attribute}}\n\n"
      "Format types (how the attribute is written):\n{{format_types}}\n\n"
      "Content types (what the attribute is about):\n{{content_types}}\n\n"
      "Describe the node as thoroughly as you can, including background knowledge about the "
      "entity it refers to. Pick the single best format type and content type from the lists "
      "above, copying the names exactly, and give a confidence between 0 and 1 for each. "
      "Explain your reasoning.\n\n"
      "Answer with a single JSON object and nothing else:\n"
      "{\"description\": string, \"format_type\": string, \"format_confidence\": number, "
      "\"content_type\": string, \"content_confidence\": number, \"reasoning\": string}";
  t.version = "ghgrl-templates-1";
  return t;
}

PromptTemplates read_templates(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(slurp(path));
    PromptTemplates t{j.at("generation_template").get<std::string>(),
                      j.at("processing_template").get<std::string>(), j.at("version").get<std::string>()};
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid templates file: " + e.what());
  }
}

std::string render(const std::string& tmpl,
                   const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) break;
    const std::string key = tmpl.substr(open + 2, close - open - 2);
    const auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
    out.append(tmpl, pos, open - pos);
    if (it != values.end()) {
      out += it->second;
    } else {
      out.append(tmpl, open, close + 2 - open);
    }
    pos = close + 2;
  }
  out.append(tmpl, pos, std::string::npos);
  return out;
}

void check_annotation(const NodeAnnotation& a, const TypeSchema& schema) {
  if (a.format_index >= schema.format_types.size()) throw DataError("format index outside schema");
  if (a.content_index >= schema.content_types.size()) throw DataError("content index outside schema");
  const auto in_unit = [](double c) { return c >= 0.0 && c <= 1.0; };
  if (!in_unit(a.format_confidence) || !in_unit(a.content_confidence)) {
    throw DataError("confidence outside [0, 1]");
  }
}

void write_annotations(const std::vector<NodeAnnotation>& annotations,
                       const std::vector<std::int64_t>& node_ids, const TypeSchema& schema,
                       const std::filesystem::path& path) {
  if (annotations.size() != node_ids.size()) throw DataError("annotation count does not match node count");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t v = 0; v < annotations.size(); ++v) {
    const auto& a = annotations[v];
    check_annotation(a, schema);
    ordered_json j;
    j["id"] = node_ids[v];
    j["format_index"] = a.format_index;
    j["format_type"] = schema.format_types[a.format_index];
    j["format_confidence"] = a.format_confidence;
    j["content_index"] = a.content_index;
    j["content_type"] = schema.content_types[a.content_index];
    j["content_confidence"] = a.content_confidence;
    j["description"] = a.description;
    j["reasoning"] = a.reasoning;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

AnnotationFile read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  AnnotationFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      NodeAnnotation a;
      a.format_index = j.at("format_index").get<std::size_t>();
      a.format_confidence = j.at("format_confidence").get<double>();
      a.content_index = j.at("content_index").get<std::size_t>();
      a.content_confidence = j.at("content_confidence").get<double>();
      a.description = j.at("description").get<std::string>();
      a.reasoning = j.at("reasoning").get<std::string>();
      file.node_ids.push_back(j.at("id").get<std::int64_t>());
      file.annotations.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return file;
}

}  // namespace ghgrl::llm
