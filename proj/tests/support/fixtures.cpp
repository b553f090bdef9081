#include "fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "ghgrl/cli.hpp"
#include "ghgrl/rng.hpp"

namespace ghgrl::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::uint64_t counter = 0;
  Rng rng(derive_seed(static_cast<std::uint64_t>(::getpid()), ++counter));
  for (;;) {
    char name[40];
    std::snprintf(name, sizeof name, "ghgrl-test-%016llx", static_cast<unsigned long long>(rng.next_u64()));
    path_ = fs::temp_directory_path() / name;
    if (fs::create_directory(path_)) return;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

namespace {

const std::array<std::array<const char*, 8>, 4> kClassWords = {{
    {"galaxy", "orbit", "comet", "nebula", "telescope", "quasar", "asteroid", "eclipse"},
    {"violin", "melody", "chorus", "sonata", "rhythm", "orchestra", "tempo", "harmony"},
    {"protein", "enzyme", "genome", "cell", "mutation", "receptor", "tissue", "antibody"},
    {"harbor", "vessel", "anchor", "cargo", "sailor", "tide", "lighthouse", "voyage"},
}};

const std::array<const char*, 10> kFiller = {"record", "entry", "general", "notes", "item",
                                             "archive", "listing", "summary", "catalog", "remark"};

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& words) {
  return words[rng.below(N)];
}

}  // namespace

HeteroGraph synthetic_text_graph(const SyntheticSpec& spec) {
  if (spec.classes < 1 || spec.classes > static_cast<int>(kClassWords.size())) {
    throw std::invalid_argument("synthetic graph supports 1 to 4 classes");
  }
  Rng rng(spec.seed);
  HeteroGraph g;
  const std::size_t n = spec.nodes;
  g.num_classes = spec.classes;
  for (std::size_t v = 0; v < n; ++v) {
    const int cls = static_cast<int>(v % static_cast<std::size_t>(spec.classes));
    g.node_ids.push_back(static_cast<std::int64_t>(1000 + v));
    g.labels.emplace_back(cls);
    const auto& own = kClassWords[static_cast<std::size_t>(cls)];
    std::string first = pick(rng, own);
    std::string second = pick(rng, own);
    if (spec.classes > 1 && rng.uniform() < spec.off_class_word_rate) {
      const auto k = static_cast<std::size_t>(spec.classes);
      const auto other = (static_cast<std::size_t>(cls) + 1 + rng.below(k - 1)) % k;
      second = pick(rng, kClassWords[other]);
    }
    if (rng.uniform() < 0.5) {
      g.attributes.push_back(first + " " + second);
    } else {
      g.attributes.push_back(std::string("A ") + pick(rng, kFiller) + " about the " + first + " and the " +
                             second + ", filed with other " + pick(rng, kFiller) + " material.");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(spec.classes));
  for (std::size_t v = 0; v < n; ++v) by_class[v % by_class.size()].push_back(v);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < spec.edges_per_node; ++k) {
      std::size_t u;
      if (rng.uniform() < spec.homophily) {
        const auto& pool = by_class[v % by_class.size()];
        u = pool[rng.below(pool.size())];
      } else {
        u = rng.below(n);
      }
      if (u == v) continue;
      edges.emplace(std::min(u, v), std::max(u, v));
    }
  }
  for (const auto& [a, b] : edges) g.edges.push_back({a, b});
  g.splits = stratified_splits(g, spec.train_ratio, spec.val_ratio, derive_seed(spec.seed, 0x5b1));
  g.validate();
  return g;
}

HeteroGraph word_graph(std::size_t nodes, std::size_t min_words, std::size_t max_words, std::uint64_t seed) {
  Rng rng(seed);
  HeteroGraph g;
  for (std::size_t v = 0; v < nodes; ++v) {
    g.node_ids.push_back(static_cast<std::int64_t>(v * 3 + 1));
    std::string text;
    const std::size_t words = min_words + rng.below(max_words - min_words + 1);
    for (std::size_t k = 0; k < words; ++k) {
      text += (k ? (rng.below(4) == 0 ? "  " : " ") : "") + std::string("w") + std::to_string(rng.below(50));
    }
    g.attributes.push_back(text);
    g.labels.emplace_back(static_cast<int>(v % 2));
    g.splits.push_back(v % 3 == 0 ? Split::test : Split::train);
  }
  g.num_classes = 2;
  for (std::size_t v = 0; v + 1 < nodes; ++v) g.edges.push_back({v, v + 1});
  return g;
}

DatasetPaths write_dataset(const HeteroGraph& graph, const fs::path& dir) {
  DatasetPaths p{dir / "nodes.jsonl", dir / "edges.csv"};
  write_nodes(graph, p.nodes);
  write_edges(graph, p.edges);
  return p;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& x : m.flat()) x = rng.uniform(lo, hi);
  return m;
}

TypedFixture random_typed_fixture(std::size_t nodes, std::size_t format_types, std::size_t content_types,
                                  std::size_t dim, double edge_probability, std::uint64_t seed) {
  Rng rng(seed);
  TypedFixture f;
  f.adj.neighbors.assign(nodes, {});
  for (std::size_t a = 0; a < nodes; ++a) {
    for (std::size_t b = a + 1; b < nodes; ++b) {
      if (rng.uniform() < edge_probability) {
        f.adj.neighbors[a].push_back(b);
        f.adj.neighbors[b].push_back(a);
      }
    }
  }
  for (std::size_t v = 0; v < nodes; ++v) {
    f.adj.format_index.push_back(v % format_types);
    f.adj.content_index.push_back((v / format_types) % content_types);
    f.adj.format_confidence.push_back(rng.uniform(0.3, 1.0));
    f.adj.content_confidence.push_back(rng.uniform(0.3, 1.0));
  }
  f.features = random_matrix(nodes, dim, -1.0, 1.0, derive_seed(seed, 1));
  return f;
}

SmoothingFixture smoothing_fixture(std::uint64_t seed) {
  constexpr std::size_t n = 60;
  constexpr std::size_t d = 8;
  constexpr std::size_t content_types = 3;
  SmoothingFixture f{random_typed_fixture(n, 2, content_types, d, 0.2, seed), {}};
  for (std::size_t v = 0; v < n; ++v) {
    f.typed.adj.format_confidence[v] = 1.0;
    f.typed.adj.content_confidence[v] = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double indicator = j % content_types == f.typed.adj.content_index[v] ? 1.0 : 0.0;
      f.typed.features(v, j) = 0.3 * f.typed.features(v, j) + indicator;
    }
  }
  auto& c = f.config;
  c.num_layers = c.format_layers = c.content_layers = 4;
  c.input_dim = d;
  c.format_dim = c.content_dim = c.regular_dim = 32;
  c.num_format_types = 2;
  c.num_content_types = content_types;
  c.num_classes = 2;
  c.seed = seed;
  return f;
}

LabeledFixture labeled_fixture(std::size_t nodes, std::size_t dim, std::uint64_t seed) {
  constexpr std::size_t classes = 3;
  LabeledFixture f{{}, random_typed_fixture(nodes, 2, classes, dim, 4.0 / static_cast<double>(nodes), seed)};
  auto& g = f.graph;
  g.num_classes = static_cast<int>(classes);
  for (std::size_t v = 0; v < nodes; ++v) {
    g.node_ids.push_back(static_cast<std::int64_t>(v));
    g.attributes.push_back("node " + std::to_string(v));
    const std::size_t y = f.typed.adj.content_index[v];
    g.labels.emplace_back(static_cast<int>(y));
    for (std::size_t j = 0; j < dim; ++j) {
      f.typed.features(v, j) = 0.5 * f.typed.features(v, j) + (j % classes == y ? 1.0 : 0.0);
    }
    for (const auto u : f.typed.adj.neighbors[v]) {
      if (u > v) g.edges.push_back({v, u});
    }
  }
  g.splits = stratified_splits(g, 0.4, 0.1, derive_seed(seed, 2));
  return f;
}

BruteForceF1 brute_force_f1(const std::vector<std::size_t>& predictions, const std::vector<int>& labels,
                            std::size_t num_classes) {
  BruteForceF1 r;
  double tp_all = 0, fp_all = 0, fn_all = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool truth = static_cast<std::size_t>(labels[i]) == c;
      const bool pred = predictions[i] == c;
      tp += truth && pred;
      fp += !truth && pred;
      fn += truth && !pred;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    r.macro += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  r.macro /= static_cast<double>(num_classes);
  const double p = tp_all + fp_all > 0 ? tp_all / (tp_all + fp_all) : 0.0;
  const double q = tp_all + fn_all > 0 ? tp_all / (tp_all + fn_all) : 0.0;
  r.micro = p + q > 0 ? 2 * p * q / (p + q) : 0.0;
  return r;
}

std::vector<std::vector<std::size_t>> connected_random_graph(std::size_t nodes, double extra_edge_probability,
                                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::set<std::size_t>> adj(nodes);
  for (std::size_t v = 1; v < nodes; ++v) {
    const std::size_t u = rng.below(v);
    adj[u].insert(v);
    adj[v].insert(u);
  }
  for (std::size_t a = 0; a < nodes; ++a) {
    for (std::size_t b = a + 1; b < nodes; ++b) {
      if (rng.uniform() < extra_edge_probability) {
        adj[a].insert(b);
        adj[b].insert(a);
      }
    }
  }
  std::vector<std::vector<std::size_t>> out;
  for (const auto& s : adj) out.emplace_back(s.begin(), s.end());
  return out;
}

Matrix power_iteration_oracle(const std::vector<std::vector<std::size_t>>& neighbors, const Matrix& features,
                              double scale, std::size_t layers) {
  const std::size_t n = neighbors.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t v = 0; v < n; ++v) {
    m[v][v] = 1.0;
    for (const auto u : neighbors[v]) m[v][u] += scale / static_cast<double>(neighbors[v].size());
  }
  Matrix h = features;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix next(h.rows(), h.cols());
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t j = 0; j < h.cols(); ++j) next(v, j) += m[v][u] * h(u, j);
      }
    }
    for (const double x : next.flat()) total = std::max(total, std::abs(x));
    for (double& x : next.flat()) x /= total;
    h = std::move(next);
  }
  return h;
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

CliResult run_cli_pipeline(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  const auto paths = write_dataset(synthetic_text_graph(spec), dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const std::vector<std::string> graph{"--nodes", paths.nodes.string(), "--edges", paths.edges.string()};
  const auto with_graph = [&](std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), graph.begin(), graph.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const std::vector<std::vector<std::string>> steps{
      with_graph({"gen-types"}, {"--m-fmt", "2", "--m-cont", "3", "--out", p("schema.json")}),
      with_graph({"annotate"}, {"--schema", p("schema.json"), "--out", p("annotations.jsonl"), "--cache-dir", p("cache")}),
      {"embed", "--annotations", p("annotations.jsonl"), "--dim", "64", "--out", p("features.bin")},
      with_graph({"train"}, {"--annotations", p("annotations.jsonl"), "--features", p("features.bin"), "--schema",
                             p("schema.json"), "--out-params", p("params.bin"), "--history", p("history.csv")}),
      with_graph({"eval"}, {"--annotations", p("annotations.jsonl"), "--features", p("features.bin"), "--schema",
                            p("schema.json"), "--params", p("params.bin"), "--out", p("report.json")}),
  };
  CliResult r;
  for (const auto& step : steps) {
    r = run_cli(step);
    if (r.code != 0) {
      r.err = step.front() + ": " + r.err;
      return r;
    }
  }
  return r;
}

Matrix shared_parameter_reference(const Matrix& x, const std::vector<std::vector<std::size_t>>& nbrs, const pagnn::PagnnConfig& c,
                                 const pagnn::PagnnParams& p) {
  const auto mul = [](const Matrix& a, const Matrix& w) {
    Matrix out(a.rows(), w.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t k = 0; k < w.rows(); ++k) {
        for (std::size_t j = 0; j < w.cols(); ++j) out(i, j) += a(i, k) * w(k, j);
      }
    }
    return out;
  };
  const auto mean = [&](const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t v = 0; v < a.rows(); ++v) {
      if (nbrs[v].empty()) continue;
      for (const auto u : nbrs[v]) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(v, j) += a(u, j);
      }
      const double inv = 1.0 / static_cast<double>(nbrs[v].size());
      for (std::size_t j = 0; j < a.cols(); ++j) out(v, j) *= inv;
    }
    return out;
  };
  const auto relu = [](Matrix m) {
    for (double& v : m.flat()) v = v > 0.0 ? v : 0.0;
    return m;
  };
  const auto add_bias = [](Matrix m, const Matrix& b) {
    for (std::size_t v = 0; v < m.rows(); ++v) {
      for (std::size_t j = 0; j < m.cols(); ++j) m(v, j) = m(v, j) + b(0, j);
    }
    return m;
  };
  Matrix h = mul(x, *p.input_projection);
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const auto& layer = p.layers[l];
    if (layer.format) h = relu(add_bias(mul(h, layer.format->weight[0]), layer.format->bias));
    if (layer.content) {
      const Matrix hidden = relu(add_bias(mul(h, layer.content->weight[0]), layer.content->bias));
      const Matrix agg = mul(mean(hidden), layer.content->aggregate_weight[0]);
      h = Matrix(hidden.rows(), hidden.cols());
      for (std::size_t i = 0; i < h.size(); ++i) h.flat()[i] = hidden.flat()[i] + agg.flat()[i];
    }
    Matrix combined = mean(h);
    for (std::size_t i = 0; i < combined.size(); ++i) combined.flat()[i] = h.flat()[i] + combined.flat()[i];
    h = relu(mul(combined, layer.regular_weight));
  }
  return add_bias(mul(h, p.classifier_weight), p.classifier_bias);
}

namespace {

double objective(const Matrix& features, const pagnn::TypedAdjacency& adj, const pagnn::PagnnConfig& c, const pagnn::PagnnParams& p,
                 const Matrix& upstream) {
  const auto logits = pagnn::pagnn_forward(features, adj, c, p);
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) s += logits.flat()[i] * upstream.flat()[i];
  return s;
}

}  // namespace

double kink_distance(const Matrix& features, const pagnn::TypedAdjacency& adj, const pagnn::PagnnConfig& c, const pagnn::PagnnParams& p) {
  pagnn::ForwardTrace t;
  pagnn::pagnn_forward(features, adj, c, p, &t);
  double m = std::numeric_limits<double>::infinity();
  const auto scan = [&](const Matrix& pre) {
    for (const double v : pre.flat()) m = std::min(m, std::abs(v));
  };
  for (const auto& l : t.layers) {
    if (l.format_out) scan(l.format.pre);
    if (l.content_out) scan(l.content.pre);
    scan(l.regular.pre);
  }
  return m;
}

FdResult finite_difference_check(const Matrix& features, const pagnn::TypedAdjacency& adj, const pagnn::PagnnConfig& c,
                                 pagnn::PagnnParams p, const Matrix& upstream) {
  const double h = 1e-4;
  const auto grads = pagnn::pagnn_backward(features, adj, c, p, upstream);
  std::vector<Matrix*> tensors;
  std::vector<const Matrix*> grad_tensors;
  pagnn::for_each_tensor(p, [&](Matrix& m, pagnn::TensorRole) { tensors.push_back(&m); });
  pagnn::for_each_tensor(grads.params, [&](const Matrix& m, pagnn::TensorRole) { grad_tensors.push_back(&m); });
  FdResult r;
  const auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-4}); };
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    for (std::size_t i = 0; i < tensors[t]->size(); ++i) {
      double& w = tensors[t]->flat()[i];
      const double saved = w;
      w = saved + h;
      const double up = objective(features, adj, c, p, upstream);
      w = saved - h;
      const double down = objective(features, adj, c, p, upstream);
      w = saved;
      r.worst = std::max(r.worst, rel(grad_tensors[t]->flat()[i], (up - down) / (2 * h)));
      ++r.checked;
    }
  }
  Matrix x = features;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.flat()[i];
    x.flat()[i] = saved + h;
    const double up = objective(x, adj, c, p, upstream);
    x.flat()[i] = saved - h;
    const double down = objective(x, adj, c, p, upstream);
    x.flat()[i] = saved;
    r.worst = std::max(r.worst, rel(grads.features.flat()[i], (up - down) / (2 * h)));
    ++r.checked;
  }
  return r;
}

}  // namespace ghgrl::testing
