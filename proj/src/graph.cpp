#include "ghgrl/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ghgrl/error.hpp"
#include "ghgrl/rng.hpp"

namespace ghgrl {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<std::int64_t> parse_int(std::string_view s) noexcept {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::none: break;
  }
  return "none";
}

std::optional<Split> parse_split(std::string_view s) noexcept {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  if (s == "none") return Split::none;
  return std::nullopt;
}

bool HeteroGraph::has_labels() const noexcept {
  return std::any_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
}

bool HeteroGraph::has_splits() const noexcept {
  return std::any_of(splits.begin(), splits.end(), [](Split s) { return s != Split::none; });
}

void HeteroGraph::validate(bool allow_self_loops) const {
  const std::size_t n = node_count();
  if (node_ids.size() != n) throw DataError("node id count does not match attribute count");
  if (!labels.empty() && labels.size() != n) throw DataError("label count does not match node count");
  if (!splits.empty() && splits.size() != n) throw DataError("split count does not match node count");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.src >= n || e.dst >= n) throw DataError("edge endpoint out of range");
    if (e.src == e.dst && !allow_self_loops) throw DataError("self-loop on node " + std::to_string(e.src));
    const auto key = std::minmax(e.src, e.dst);
    if (!seen.insert(key).second) {
      throw DataError("duplicate edge " + std::to_string(key.first) + "," + std::to_string(key.second));
    }
  }
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (!labels[v]) continue;
    if (*labels[v] < 0 || *labels[v] >= num_classes) {
      throw DataError("label of node " + std::to_string(v) + " outside [0, num_classes)");
    }
  }
  if (has_labels() && num_classes <= 0) throw DataError("labels present but num_classes is zero");
}

HeteroGraph load_dataset(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path, LoadOptions options) {
  HeteroGraph g;
  std::unordered_map<std::int64_t, std::size_t> index;
  bool any_label = false;
  bool any_split = false;

  {
    auto in = open_input(nodes_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      ordered_json obj;
      try {
        obj = ordered_json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw DataError(where(nodes_path, line_no) + "malformed JSON: " + e.what());
      }
      if (!obj.is_object()) throw DataError(where(nodes_path, line_no) + "expected a JSON object");
      const auto id_it = obj.find("id");
      if (id_it == obj.end() || !id_it->is_number_integer()) {
        throw DataError(where(nodes_path, line_no) + "missing integer \"id\"");
      }
      const auto id = id_it->get<std::int64_t>();
      std::string attribute;
      if (const auto it = obj.find("attribute"); it != obj.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError(where(nodes_path, line_no) + "\"attribute\" must be a string");
        attribute = it->get<std::string>();
      }
      std::optional<int> label;
      if (const auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
          throw DataError(where(nodes_path, line_no) + "\"label\" must be a non-negative integer or null");
        }
        label = it->get<int>();
        any_label = true;
      }
      Split split = Split::none;
      if (const auto it = obj.find("split"); it != obj.end() && !it->is_null()) {
        const auto parsed = it->is_string() ? parse_split(it->get<std::string>()) : std::nullopt;
        if (!parsed) throw DataError(where(nodes_path, line_no) + "\"split\" must be train, val, test or null");
        split = *parsed;
        any_split = any_split || split != Split::none;
      }
      if (!index.emplace(id, g.node_ids.size()).second) {
        throw DataError(where(nodes_path, line_no) + "duplicate node id " + std::to_string(id));
      }
      g.node_ids.push_back(id);
      g.attributes.push_back(std::move(attribute));
      g.labels.push_back(label);
      g.splits.push_back(split);
    }
  }
  if (!any_label) g.labels.clear();
  if (!any_split) g.splits.clear();
  for (const auto& l : g.labels) {
    if (l) g.num_classes = std::max(g.num_classes, *l + 1);
  }

  {
    auto in = open_input(edges_path);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (std::getline(in, line)) {
      ++line_no;
      const auto row = trim(line);
      if (row.empty()) continue;
      if (!header_seen) {
        if (row != "src,dst") throw DataError(where(edges_path, line_no) + "expected header \"src,dst\"");
        header_seen = true;
        continue;
      }
      const auto comma = row.find(',');
      const auto src = comma == std::string_view::npos ? std::nullopt : parse_int(row.substr(0, comma));
      const auto dst = comma == std::string_view::npos ? std::nullopt : parse_int(row.substr(comma + 1));
      if (!src || !dst) throw DataError(where(edges_path, line_no) + "malformed edge row");
      const auto s = index.find(*src);
      const auto d = index.find(*dst);
      if (s == index.end() || d == index.end()) {
        throw DataError(where(edges_path, line_no) + "dangling edge endpoint " +
                        std::to_string(s == index.end() ? *src : *dst));
      }
      if (s->second == d->second && !options.allow_self_loops) continue;
      const auto key = std::minmax(s->second, d->second);
      if (!seen.insert(key).second) continue;
      g.edges.push_back({key.first, key.second});
    }
    if (!header_seen) throw DataError(edges_path.string() + ": missing header \"src,dst\"");
  }

  g.validate(options.allow_self_loops);
  return g;
}

void write_nodes(const HeteroGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    ordered_json obj;
    obj["id"] = graph.node_ids[v];
    obj["attribute"] = graph.attributes[v];
    if (!graph.labels.empty() && graph.labels[v]) {
      obj["label"] = *graph.labels[v];
    } else {
      obj["label"] = nullptr;
    }
    if (!graph.splits.empty() && graph.splits[v] != Split::none) {
      obj["split"] = std::string(to_string(graph.splits[v]));
    } else {
      obj["split"] = nullptr;
    }
    out << obj.dump() << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

void write_edges(const HeteroGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "src,dst\n";
  for (const auto& e : graph.edges) {
    out << graph.node_ids[e.src] << ',' << graph.node_ids[e.dst] << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<std::vector<std::size_t>> neighbor_lists(const HeteroGraph& graph) {
  std::vector<std::vector<std::size_t>> nbrs(graph.node_count());
  for (const auto& e : graph.edges) {
    nbrs[e.src].push_back(e.dst);
    if (e.src != e.dst) nbrs[e.dst].push_back(e.src);
  }
  for (auto& list : nbrs) std::sort(list.begin(), list.end());
  return nbrs;
}

std::size_t round_count(double x) noexcept {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

std::vector<Split> stratified_splits(const HeteroGraph& graph, double train_ratio,
                                     double val_ratio, std::uint64_t seed) {
  if (train_ratio < 0 || val_ratio < 0 || train_ratio + val_ratio > 1.0) {
    throw DataError("split ratios must be non-negative and sum to at most 1");
  }
  std::vector<Split> splits(graph.node_count(), Split::none);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t v = 0; v < graph.labels.size(); ++v) {
    if (graph.labels[v]) by_class[*graph.labels[v]].push_back(v);
  }
  for (auto& [cls, members] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span(members));
    const std::size_t k = members.size();
    const std::size_t n_train = std::min(k, round_count(train_ratio * static_cast<double>(k)));
    const std::size_t n_val = std::min(k - n_train, round_count(val_ratio * static_cast<double>(k)));
    for (std::size_t i = 0; i < k; ++i) {
      splits[members[i]] = i < n_train ? Split::train : (i < n_train + n_val ? Split::val : Split::test);
    }
  }
  return splits;
}

}  // namespace ghgrl
