#include "ghgrl/pagnn.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>

#include "ghgrl/error.hpp"
#include "ghgrl/rng.hpp"

namespace ghgrl::pagnn {
namespace {

const char* block_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::input_projection: return "input projection";
    case BlockKind::format: return "format alignment block";
    case BlockKind::content: return "content processing block";
    case BlockKind::regular: return "regular block";
    case BlockKind::classifier: return "classifier";
  }
  return "block";
}

void require_finite(const Matrix& m, std::size_t layer, BlockKind kind) {
  if (!m.all_finite()) {
    throw DataError(std::string("non-finite values after ") + block_name(kind) +
                    (layer > 0 ? " of layer " + std::to_string(layer) : std::string()));
  }
}

double effective_confidence(double c, double floor) noexcept { return std::max(c, floor); }

// Sum of rows[u] over the neighbors of v divided by the degree; zero when
// v has no neighbors.
void neighbor_mean(const Matrix& rows, const std::vector<std::size_t>& nbrs, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (nbrs.empty()) return;
  for (const auto u : nbrs) {
    const auto r = rows.row(u);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += r[j];
  }
  const double inv = 1.0 / static_cast<double>(nbrs.size());
  for (auto& x : out) x *= inv;
}

// Adds g / deg(v) into grad rows of every neighbor of v.
void scatter_mean_grad(std::span<const double> g, const std::vector<std::size_t>& nbrs, Matrix& grad_rows) {
  if (nbrs.empty()) return;
  const double inv = 1.0 / static_cast<double>(nbrs.size());
  for (const auto u : nbrs) {
    auto r = grad_rows.row(u);
    for (std::size_t j = 0; j < g.size(); ++j) r[j] += g[j] * inv;
  }
}

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DataError(what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) add_row_times(a.row(i), b, out.row(i));
  return out;
}

}  // namespace

double activate(Activation act, double x) noexcept {
  if (x > 0.0) return x;
  return act == Activation::relu ? 0.0 : kLeakySlope * x;
}

double activate_grad(Activation act, double pre) noexcept {
  if (pre > 0.0) return 1.0;
  return act == Activation::relu ? 0.0 : kLeakySlope;
}

void PagnnConfig::validate() const {
  if (num_layers < 1) throw DataError("PAGNN needs at least one layer");
  if (!(format_layers <= content_layers && content_layers <= num_layers)) {
    throw DataError("layer schedule must satisfy format_layers <= content_layers <= num_layers");
  }
  if (format_dim == 0 || format_dim != content_dim || content_dim != regular_dim) {
    throw DataError("hidden widths must be positive and equal (format_dim = content_dim = regular_dim)");
  }
  if (input_dim == 0) throw DataError("input_dim must be positive");
  if (!use_input_projection && input_dim != format_dim) {
    throw DataError("without an input projection input_dim must equal the hidden width");
  }
  if (num_format_types == 0 || num_content_types == 0) throw DataError("type counts must be positive");
  if (num_classes == 0) throw DataError("num_classes must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DataError("alpha must be a finite non-negative number");
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) throw DataError("confidence_floor must lie in [0, 1]");
}

void for_each_tensor(PagnnParams& params, const std::function<void(Matrix&, TensorRole)>& fn) {
  if (params.input_projection) fn(*params.input_projection, TensorRole::weight);
  for (auto& layer : params.layers) {
    if (layer.format) {
      for (auto& w : layer.format->weight) fn(w, TensorRole::weight);
      fn(layer.format->bias, TensorRole::bias);
    }
    if (layer.content) {
      for (auto& w : layer.content->weight) fn(w, TensorRole::weight);
      fn(layer.content->bias, TensorRole::bias);
      for (auto& w : layer.content->aggregate_weight) fn(w, TensorRole::weight);
    }
    fn(layer.regular_weight, TensorRole::weight);
  }
  fn(params.classifier_weight, TensorRole::weight);
  fn(params.classifier_bias, TensorRole::bias);
}

void for_each_tensor(const PagnnParams& params, const std::function<void(const Matrix&, TensorRole)>& fn) {
  for_each_tensor(const_cast<PagnnParams&>(params), [&](Matrix& m, TensorRole role) { fn(m, role); });
}

PagnnParams zeros_like(const PagnnParams& params) {
  PagnnParams z = params;
  for_each_tensor(z, [](Matrix& m, TensorRole) { m.fill(0.0); });
  return z;
}

std::size_t parameter_count(const PagnnParams& params) {
  std::size_t n = 0;
  for_each_tensor(params, [&](const Matrix& m, TensorRole) { n += m.size(); });
  return n;
}

PagnnParams init_params(const PagnnConfig& config) {
  config.validate();
  const std::size_t d = config.hidden_dim();
  PagnnParams p;
  if (config.use_input_projection) p.input_projection = Matrix(config.input_dim, d);
  p.layers.resize(config.num_layers);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    auto& layer = p.layers[l];
    if (l < config.format_layers) {
      layer.format = FormatBlockParams{std::vector<Matrix>(config.num_format_types, Matrix(d, d)),
                                       Matrix(config.num_format_types, d)};
    }
    if (l < config.content_layers) {
      layer.content = ContentBlockParams{std::vector<Matrix>(config.num_content_types, Matrix(d, d)),
                                         Matrix(config.num_content_types, d),
                                         std::vector<Matrix>(config.num_content_types, Matrix(d, d))};
    }
    layer.regular_weight = Matrix(d, d);
  }
  p.classifier_weight = Matrix(d, config.num_classes);
  p.classifier_bias = Matrix(1, config.num_classes);

  std::uint64_t tensor = 0;
  for_each_tensor(p, [&](Matrix& m, TensorRole role) {
    const std::uint64_t stream = derive_seed(config.seed, tensor++);
    if (role == TensorRole::bias) return;
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    auto flat = m.flat();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      flat[i] = -bound + 2.0 * bound * unit_interval(mix64(stream + i));
    }
  });
  return p;
}

void check_params(const PagnnParams& params, const PagnnConfig& config) {
  config.validate();
  const std::size_t d = config.hidden_dim();
  if (config.use_input_projection != params.input_projection.has_value()) {
    throw DataError("input projection presence does not match the config");
  }
  if (params.input_projection) check_shape(*params.input_projection, config.input_dim, d, "input projection");
  if (params.layers.size() != config.num_layers) throw DataError("layer count does not match the config");
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const auto& layer = params.layers[l];
    const std::string tag = "layer " + std::to_string(l + 1) + " ";
    if ((l < config.format_layers) != layer.format.has_value()) throw DataError(tag + "format block presence mismatch");
    if ((l < config.content_layers) != layer.content.has_value()) throw DataError(tag + "content block presence mismatch");
    if (layer.format) {
      if (layer.format->weight.size() != config.num_format_types) throw DataError(tag + "format type count mismatch");
      for (const auto& w : layer.format->weight) check_shape(w, d, d, tag + "format weight");
      check_shape(layer.format->bias, config.num_format_types, d, tag + "format bias");
    }
    if (layer.content) {
      if (layer.content->weight.size() != config.num_content_types ||
          layer.content->aggregate_weight.size() != config.num_content_types) {
        throw DataError(tag + "content type count mismatch");
      }
      for (const auto& w : layer.content->weight) check_shape(w, d, d, tag + "content weight");
      for (const auto& w : layer.content->aggregate_weight) check_shape(w, d, d, tag + "aggregation weight");
      check_shape(layer.content->bias, config.num_content_types, d, tag + "content bias");
    }
    check_shape(layer.regular_weight, d, d, tag + "regular weight");
  }
  check_shape(params.classifier_weight, d, config.num_classes, "classifier weight");
  check_shape(params.classifier_bias, 1, config.num_classes, "classifier bias");
  bool finite = true;
  for_each_tensor(params, [&](const Matrix& m, TensorRole) { finite = finite && m.all_finite(); });
  if (!finite) throw DataError("parameters contain non-finite values");
}

TypedAdjacency TypedAdjacency::build(const HeteroGraph& graph, const std::vector<llm::NodeAnnotation>& annotations) {
  if (annotations.size() != graph.node_count()) {
    throw DataError("annotation count " + std::to_string(annotations.size()) + " does not match node count " +
                    std::to_string(graph.node_count()));
  }
  TypedAdjacency adj;
  adj.neighbors = neighbor_lists(graph);
  for (const auto& a : annotations) {
    adj.format_index.push_back(a.format_index);
    adj.format_confidence.push_back(a.format_confidence);
    adj.content_index.push_back(a.content_index);
    adj.content_confidence.push_back(a.content_confidence);
  }
  return adj;
}

void TypedAdjacency::validate(std::size_t num_format_types, std::size_t num_content_types) const {
  const std::size_t n = node_count();
  if (format_index.size() != n || content_index.size() != n || format_confidence.size() != n ||
      content_confidence.size() != n) {
    throw DataError("typed adjacency arrays have inconsistent lengths");
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (format_index[v] >= num_format_types || content_index[v] >= num_content_types) {
      throw DataError("type index of node " + std::to_string(v) + " outside the configured type counts");
    }
    const auto ok = [](double c) { return c >= 0.0 && c <= 1.0; };
    if (!ok(format_confidence[v]) || !ok(content_confidence[v])) {
      throw DataError("confidence of node " + std::to_string(v) + " outside [0, 1]");
    }
    for (const auto u : neighbors[v]) {
      if (u >= n) throw DataError("neighbor index out of range");
      if (!std::binary_search(neighbors[u].begin(), neighbors[u].end(), v)) {
        throw DataError("neighbor lists are not symmetric");
      }
    }
  }
}

Matrix format_alignment_forward(const Matrix& input, const TypedAdjacency& adj, const FormatBlockParams& params,
                                Activation act, double confidence_floor, FormatTrace* trace) {
  if (!input.all_finite()) throw DataError("non-finite input to format alignment block");
  const std::size_t n = input.rows();
  const std::size_t d = input.cols();
  Matrix pre(n, d);
  Matrix out(n, d);
  std::vector<double> affine(d);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t t = adj.format_index[v];
    const double c = effective_confidence(adj.format_confidence[v], confidence_floor);
    const auto x = input.row(v);
    row_times(x, params.weight[t], affine);
    const auto b = params.bias.row(t);
    auto p = pre.row(v);
    auto o = out.row(v);
    for (std::size_t j = 0; j < d; ++j) {
      p[j] = c * (affine[j] + b[j]) + (1.0 - c) * x[j];
      o[j] = activate(act, p[j]);
    }
  }
  if (trace != nullptr) trace->pre = std::move(pre);
  return out;
}

Matrix content_forward(const Matrix& input, const TypedAdjacency& adj, const ContentBlockParams& params,
                       double alpha, Activation act, double confidence_floor, ContentTrace* trace) {
  if (!input.all_finite()) throw DataError("non-finite input to content processing block");
  const std::size_t n = input.rows();
  const std::size_t d = input.cols();
  Matrix pre(n, d);
  Matrix hidden(n, d);
  std::vector<double> affine(d);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t t = adj.content_index[v];
    const double c = effective_confidence(adj.content_confidence[v], confidence_floor);
    row_times(input.row(v), params.weight[t], affine);
    const auto b = params.bias.row(t);
    auto p = pre.row(v);
    auto h = hidden.row(v);
    for (std::size_t j = 0; j < d; ++j) {
      p[j] = c * (affine[j] + b[j]);
      h[j] = activate(act, p[j]);
    }
  }
  Matrix neighbor(n, d);
  Matrix out(n, d);
  for (std::size_t v = 0; v < n; ++v) {
    neighbor_mean(hidden, adj.neighbors[v], neighbor.row(v));
    auto o = out.row(v);
    row_times(neighbor.row(v), params.aggregate_weight[adj.content_index[v]], o);
    const auto h = hidden.row(v);
    for (std::size_t j = 0; j < d; ++j) o[j] = alpha * h[j] + o[j];
  }
  if (trace != nullptr) {
    trace->pre = std::move(pre);
    trace->hidden = std::move(hidden);
    trace->neighbor = std::move(neighbor);
  }
  return out;
}

Matrix regular_forward(const Matrix& input, const TypedAdjacency& adj, const Matrix& weight, Activation act,
                       RegularTrace* trace) {
  if (!input.all_finite()) throw DataError("non-finite input to regular block");
  const std::size_t n = input.rows();
  const std::size_t d = input.cols();
  Matrix combined(n, d);
  Matrix pre(n, weight.cols());
  Matrix out(n, weight.cols());
  for (std::size_t v = 0; v < n; ++v) {
    auto s = combined.row(v);
    neighbor_mean(input, adj.neighbors[v], s);
    const auto x = input.row(v);
    for (std::size_t j = 0; j < d; ++j) s[j] = x[j] + s[j];
    row_times(s, weight, pre.row(v));
    auto o = out.row(v);
    const auto p = pre.row(v);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] = activate(act, p[j]);
  }
  if (trace != nullptr) {
    trace->combined = std::move(combined);
    trace->pre = std::move(pre);
  }
  return out;
}

Matrix pagnn_forward(const Matrix& features, const TypedAdjacency& adj, const PagnnConfig& config,
                     const PagnnParams& params, ForwardTrace* trace) {
  check_params(params, config);
  adj.validate(config.num_format_types, config.num_content_types);
  if (features.rows() != adj.node_count()) {
    throw DataError("feature rows (" + std::to_string(features.rows()) + ") do not match node count (" +
                    std::to_string(adj.node_count()) + ")");
  }
  if (features.cols() != config.input_dim) {
    throw DataError("feature width " + std::to_string(features.cols()) + " does not match input_dim " +
                    std::to_string(config.input_dim));
  }
  if (!features.all_finite()) throw DataError("non-finite input features");

  Matrix h;
  if (params.input_projection) {
    h = matmul(features, *params.input_projection);
    require_finite(h, 0, BlockKind::input_projection);
    if (trace != nullptr) trace->calls.push_back({0, BlockKind::input_projection});
  } else {
    h = features;
  }
  if (trace != nullptr) {
    trace->projected = h;
    trace->layers.assign(config.num_layers, {});
  }

  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const auto& layer = params.layers[l];
    LayerTrace* lt = trace != nullptr ? &trace->layers[l] : nullptr;
    if (lt != nullptr) lt->input = h;
    if (layer.format) {
      h = format_alignment_forward(h, adj, *layer.format, config.activation, config.confidence_floor,
                                   lt ? &lt->format : nullptr);
      require_finite(h, l + 1, BlockKind::format);
      if (lt != nullptr) {
        lt->format_out = h;
        trace->calls.push_back({l + 1, BlockKind::format});
      }
    }
    if (layer.content) {
      h = content_forward(h, adj, *layer.content, config.alpha, config.activation, config.confidence_floor,
                          lt ? &lt->content : nullptr);
      require_finite(h, l + 1, BlockKind::content);
      if (lt != nullptr) {
        lt->content_out = h;
        trace->calls.push_back({l + 1, BlockKind::content});
      }
    }
    h = regular_forward(h, adj, layer.regular_weight, config.activation, lt ? &lt->regular : nullptr);
    require_finite(h, l + 1, BlockKind::regular);
    if (lt != nullptr) {
      lt->output = h;
      trace->calls.push_back({l + 1, BlockKind::regular});
    }
  }

  Matrix logits(h.rows(), config.num_classes);
  const auto bias = params.classifier_bias.row(0);
  for (std::size_t v = 0; v < h.rows(); ++v) {
    auto o = logits.row(v);
    row_times(h.row(v), params.classifier_weight, o);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] += bias[j];
  }
  require_finite(logits, 0, BlockKind::classifier);
  if (trace != nullptr) trace->calls.push_back({0, BlockKind::classifier});
  return logits;
}

PagnnGradients pagnn_backward(const Matrix& features, const TypedAdjacency& adj, const PagnnConfig& config,
                              const PagnnParams& params, const Matrix& upstream) {
  ForwardTrace trace;
  pagnn_forward(features, adj, config, params, &trace);
  const std::size_t n = features.rows();
  const std::size_t d = config.hidden_dim();
  check_shape(upstream, n, config.num_classes, "upstream gradient");

  PagnnGradients grads{zeros_like(params), Matrix(n, features.cols())};
  PagnnParams& g = grads.params;
  const Activation act = config.activation;

  // Classifier.
  const Matrix& last = config.num_layers > 0 ? trace.layers.back().output : trace.projected;
  Matrix dh(n, d);
  for (std::size_t v = 0; v < n; ++v) {
    const auto gv = upstream.row(v);
    add_outer(last.row(v), gv, 1.0, g.classifier_weight);
    auto gb = g.classifier_bias.row(0);
    for (std::size_t j = 0; j < gv.size(); ++j) gb[j] += gv[j];
    add_row_times_transpose(gv, params.classifier_weight, dh.row(v));
  }

  for (std::size_t li = config.num_layers; li-- > 0;) {
    const auto& layer = params.layers[li];
    auto& glayer = g.layers[li];
    const LayerTrace& lt = trace.layers[li];

    // Regular block: out = act(S W), S[v] = H[v] + mean H[N(v)].
    {
      Matrix d_in(n, d);
      std::vector<double> d_pre(d);
      std::vector<double> d_s(d);
      for (std::size_t v = 0; v < n; ++v) {
        const auto p = lt.regular.pre.row(v);
        const auto go = dh.row(v);
        for (std::size_t j = 0; j < d; ++j) d_pre[j] = go[j] * activate_grad(act, p[j]);
        add_outer(lt.regular.combined.row(v), d_pre, 1.0, glayer.regular_weight);
        std::fill(d_s.begin(), d_s.end(), 0.0);
        add_row_times_transpose(d_pre, layer.regular_weight, d_s);
        auto di = d_in.row(v);
        for (std::size_t j = 0; j < d; ++j) di[j] += d_s[j];
        scatter_mean_grad(d_s, adj.neighbors[v], d_in);
      }
      dh = std::move(d_in);
    }

    // Content block.
    if (layer.content) {
      const Matrix& block_in = lt.format_out ? *lt.format_out : lt.input;
      auto& gc = *glayer.content;
      Matrix d_hidden(n, d);
      std::vector<double> d_mean(d);
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t t = adj.content_index[v];
        const auto go = dh.row(v);
        auto dhv = d_hidden.row(v);
        for (std::size_t j = 0; j < d; ++j) dhv[j] += config.alpha * go[j];
        add_outer(lt.content.neighbor.row(v), go, 1.0, gc.aggregate_weight[t]);
        std::fill(d_mean.begin(), d_mean.end(), 0.0);
        add_row_times_transpose(go, layer.content->aggregate_weight[t], d_mean);
        scatter_mean_grad(d_mean, adj.neighbors[v], d_hidden);
      }
      Matrix d_in(n, d);
      std::vector<double> d_pre(d);
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t t = adj.content_index[v];
        const double c = effective_confidence(adj.content_confidence[v], config.confidence_floor);
        const auto p = lt.content.pre.row(v);
        const auto dhv = d_hidden.row(v);
        for (std::size_t j = 0; j < d; ++j) d_pre[j] = dhv[j] * activate_grad(act, p[j]);
        add_outer(block_in.row(v), d_pre, c, gc.weight[t]);
        auto gb = gc.bias.row(t);
        for (std::size_t j = 0; j < d; ++j) gb[j] += c * d_pre[j];
        for (auto& x : d_pre) x *= c;
        add_row_times_transpose(d_pre, layer.content->weight[t], d_in.row(v));
      }
      dh = std::move(d_in);
    }

    // Format block: pre = c (H W + B) + (1 - c) H.
    if (layer.format) {
      auto& gf = *glayer.format;
      Matrix d_in(n, d);
      std::vector<double> d_pre(d);
      std::vector<double> scaled(d);
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t t = adj.format_index[v];
        const double c = effective_confidence(adj.format_confidence[v], config.confidence_floor);
        const auto p = lt.format.pre.row(v);
        const auto go = dh.row(v);
        for (std::size_t j = 0; j < d; ++j) d_pre[j] = go[j] * activate_grad(act, p[j]);
        add_outer(lt.input.row(v), d_pre, c, gf.weight[t]);
        auto gb = gf.bias.row(t);
        for (std::size_t j = 0; j < d; ++j) gb[j] += c * d_pre[j];
        auto di = d_in.row(v);
        for (std::size_t j = 0; j < d; ++j) {
          scaled[j] = c * d_pre[j];
          di[j] += (1.0 - c) * d_pre[j];
        }
        add_row_times_transpose(scaled, layer.format->weight[t], di);
      }
      dh = std::move(d_in);
    }
  }

  if (params.input_projection) {
    for (std::size_t v = 0; v < n; ++v) {
      add_outer(features.row(v), dh.row(v), 1.0, *g.input_projection);
      add_row_times_transpose(dh.row(v), *params.input_projection, grads.features.row(v));
    }
  } else {
    grads.features = std::move(dh);
  }
  return grads;
}

namespace {

constexpr std::array<char, 4> kCheckpointMagic = {'G', 'H', 'G', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

class LeWriter {
 public:
  explicit LeWriter(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  void bytes(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::ostream& out_;
};

class LeReader {
 public:
  LeReader(std::istream& in, std::filesystem::path path) : in_(in), path_(std::move(path)) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  std::uint64_t bytes(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw DataError(path_.string() + ": truncated checkpoint");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  std::istream& in_;
  std::filesystem::path path_;
};

}  // namespace

void write_checkpoint(const PagnnConfig& config, const PagnnParams& params, const std::filesystem::path& path) {
  check_params(params, config);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  LeWriter w(out);
  w.u32(kCheckpointVersion);
  w.u64(config.num_layers);
  w.u64(config.format_layers);
  w.u64(config.content_layers);
  w.u64(config.input_dim);
  w.u64(config.format_dim);
  w.u64(config.content_dim);
  w.u64(config.regular_dim);
  w.f64(config.alpha);
  w.u64(config.num_format_types);
  w.u64(config.num_content_types);
  w.u64(config.num_classes);
  w.u8(static_cast<std::uint8_t>(config.activation));
  w.u8(config.use_input_projection ? 1 : 0);
  w.f64(config.confidence_floor);
  w.u64(config.seed);
  for_each_tensor(params, [&](const Matrix& m, TensorRole) {
    for (const double x : m.flat()) w.f64(x);
  });
  if (!out) throw DataError("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kCheckpointMagic) throw DataError(path.string() + ": not a GHGP checkpoint");
  LeReader r(in, path);
  if (const auto version = r.u32(); version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  auto& c = ck.config;
  c.num_layers = r.u64();
  c.format_layers = r.u64();
  c.content_layers = r.u64();
  c.input_dim = r.u64();
  c.format_dim = r.u64();
  c.content_dim = r.u64();
  c.regular_dim = r.u64();
  c.alpha = r.f64();
  c.num_format_types = r.u64();
  c.num_content_types = r.u64();
  c.num_classes = r.u64();
  const auto act = r.u8();
  if (act > static_cast<std::uint8_t>(Activation::leaky_relu)) throw DataError(path.string() + ": bad activation tag");
  c.activation = static_cast<Activation>(act);
  c.use_input_projection = r.u8() != 0;
  c.confidence_floor = r.f64();
  c.seed = r.u64();
  c.validate();
  ck.params = init_params(c);
  for_each_tensor(ck.params, [&](Matrix& m, TensorRole) {
    for (auto& x : m.flat()) x = r.f64();
  });
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(path.string() + ": trailing bytes in checkpoint");
  check_params(ck.params, c);
  return ck;
}

}  // namespace ghgrl::pagnn
