#include "ghgrl/corruption.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "ghgrl/error.hpp"
#include "ghgrl/rng.hpp"

namespace ghgrl {
namespace {

constexpr std::uint64_t kSelectStream = 0x5e1ec7;
constexpr std::uint64_t kNodeStream = 0x0de5;

bool is_fraction(double x) noexcept { return x >= 0.0 && x <= 1.0; }

}  // namespace

void CorruptionSpec::validate() const {
  if (!is_fraction(ratio)) throw DataError("corruption ratio must lie in [0, 1]");
  if (!is_fraction(deletion_fraction)) throw DataError("deletion fraction must lie in [0, 1]");
  for (const auto& [node, candidates] : pool) {
    if (candidates.empty()) throw DataError("empty replacement pool for node " + std::to_string(node));
  }
}

std::map<std::size_t, std::vector<std::string>> load_replacement_pool(
    const std::filesystem::path& path, const HeteroGraph& graph) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t v = 0; v < graph.node_count(); ++v) index.emplace(graph.node_ids[v], v);

  std::map<std::size_t, std::vector<std::string>> pool;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string loc = path.string() + ":" + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(loc + "malformed JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_number_integer() ||
        !obj.contains("candidates") || !obj["candidates"].is_array()) {
      throw DataError(loc + "expected {\"id\": int, \"candidates\": [string, ...]}");
    }
    const auto it = index.find(obj["id"].get<std::int64_t>());
    if (it == index.end()) throw DataError(loc + "unknown node id " + obj["id"].dump());
    auto& candidates = pool[it->second];
    for (const auto& c : obj["candidates"]) {
      if (!c.is_string()) throw DataError(loc + "candidates must be strings");
      candidates.push_back(c.get<std::string>());
    }
    if (candidates.empty()) throw DataError(loc + "empty candidate list");
  }
  return pool;
}

std::vector<std::size_t> select_corrupted_nodes(std::size_t node_count, double ratio,
                                                std::uint64_t seed) {
  std::vector<std::size_t> order(node_count);
  for (std::size_t v = 0; v < node_count; ++v) order[v] = v;
  Rng rng(derive_seed(seed, kSelectStream));
  rng.shuffle(std::span(order));
  order.resize(std::min(node_count, round_count(ratio * static_cast<double>(node_count))));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string delete_tokens(const std::string& text, double fraction, std::uint64_t seed) {
  const auto tokens = split_tokens(text);
  const std::size_t remove = std::min(tokens.size(), round_count(fraction * static_cast<double>(tokens.size())));
  if (remove == 0) return text;

  std::vector<std::size_t> order(tokens.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::vector<bool> dropped(tokens.size(), false);
  for (std::size_t i = 0; i < remove; ++i) dropped[order[i]] = true;

  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (dropped[i]) continue;
    if (!out.empty()) out += ' ';
    out += tokens[i];
  }
  return out;
}

HeteroGraph corrupt(const HeteroGraph& graph, const CorruptionSpec& spec) {
  spec.validate();
  HeteroGraph out = graph;
  for (const std::size_t v : select_corrupted_nodes(graph.node_count(), spec.ratio, spec.seed)) {
    // Per-node stream keyed by node index, so a node's outcome does not
    // depend on which other nodes were selected.
    const std::uint64_t node_seed = derive_seed(derive_seed(spec.seed, kNodeStream), v);
    if (spec.kind == CorruptionKind::rid) {
      out.attributes[v] = delete_tokens(graph.attributes[v], spec.deletion_fraction, node_seed);
    } else {
      const auto it = spec.pool.find(v);
      if (it == spec.pool.end()) {
        throw DataError("no replacement candidates for selected node " + std::to_string(graph.node_ids[v]));
      }
      Rng rng(node_seed);
      out.attributes[v] = it->second[rng.below(it->second.size())];
    }
  }
  return out;
}

}  // namespace ghgrl
