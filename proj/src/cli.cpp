#include "ghgrl/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ghgrl/analysis.hpp"
#include "ghgrl/corruption.hpp"
#include "ghgrl/digest.hpp"
#include "ghgrl/embedding.hpp"
#include "ghgrl/error.hpp"
#include "ghgrl/graph.hpp"
#include "ghgrl/llm_pipeline.hpp"
#include "ghgrl/pagnn.hpp"
#include "ghgrl/train.hpp"

namespace ghgrl::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

/// Records what a run consumed and produced. Written next to the primary
/// output as <output>.manifest.json.
class Manifest {
 public:
  Manifest(std::string command, const CLI::App& sub) : command_(std::move(command)), started_(utc_now()) {
    for (const CLI::Option* opt : sub.get_options()) {
      if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
      const auto& results = opt->results();
      std::string value;
      if (results.empty()) {
        value = opt->get_default_str();
        if (opt->get_type_size() == 0 && value.empty()) value = "false";
      } else {
        for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
        if (opt->get_type_size() == 0) value = "true";
      }
      config_[opt->get_name()] = value;
    }
  }

  void input(const fs::path& p) { inputs_[p.string()] = sha256_file(p); }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void schema_digest(const std::string& digest) { schema_digest_ = digest; }

  void write(const fs::path& primary) const {
    ordered_json j;
    j["tool"] = "ghgrl";
    j["tool_version"] = kToolVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    if (!schema_digest_.empty()) j["schema_digest"] = schema_digest_;
    j["seeds"] = seeds_;
    j["outputs"] = outputs_;
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    std::ofstream out(primary.string() + ".manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest for " + primary.string());
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::string started_;
  std::map<std::string, std::string> config_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> outputs_;
  std::string schema_digest_;
};

struct GraphArgs {
  std::string nodes;
  std::string edges;
  bool allow_self_loops = false;

  void add(CLI::App* sub) {
    sub->add_option("--nodes", nodes, "Nodes JSONL file")->required()->check(CLI::ExistingFile);
    sub->add_option("--edges", edges, "Edges CSV file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--allow-self-loops", allow_self_loops, "Keep self-loop edges");
  }

  HeteroGraph load(Manifest& m) const {
    m.input(nodes);
    m.input(edges);
    return load_dataset(nodes, edges, {allow_self_loops});
  }
};

struct BackendArgs {
  std::string backend = "mock";
  std::string model = "llama-3-70b-instruct";
  std::string templates;
  int max_retries = 3;

  void add(CLI::App* sub) {
    sub->add_option("--backend", backend, "LLM backend")->check(CLI::IsMember({"mock", "remote"}))->capture_default_str();
    sub->add_option("--model", model, "Model name sent to the remote backend")->capture_default_str();
    sub->add_option("--templates", templates, "JSON file with prompt templates")->check(CLI::ExistingFile);
    sub->add_option("--max-retries", max_retries, "Extra attempts after a failed request")->check(CLI::NonNegativeNumber)->capture_default_str();
  }

  std::unique_ptr<llm::LlmBackend> make() const {
    if (backend == "mock") return std::make_unique<llm::MockLlmBackend>();
    auto config = llm::RemoteLlmConfig::from_env();
    config.model = model;
    return std::make_unique<llm::RemoteLlmBackend>(config);
  }

  llm::PromptTemplates load_templates(Manifest& m) const {
    if (templates.empty()) return llm::PromptTemplates::defaults();
    m.input(templates);
    return llm::read_templates(templates);
  }

  llm::PipelineOptions options() const {
    llm::PipelineOptions o;
    o.max_retries = max_retries;
    if (backend == "remote") o.retry_backoff = std::chrono::milliseconds(500);
    return o;
  }
};

struct ModelArgs {
  std::size_t layers = 2;
  std::size_t format_layers = 1;
  std::size_t content_layers = 2;
  std::size_t hidden = 64;
  double alpha = 1.0;
  std::string activation = "relu";
  bool no_projection = false;
  double confidence_floor = 0.0;
  std::uint64_t seed = 0;

  void add(CLI::App* sub) {
    sub->add_option("--layers", layers, "Total PAGNN layers")->capture_default_str();
    sub->add_option("--format-layers", format_layers, "Layers with the format alignment block")->capture_default_str();
    sub->add_option("--content-layers", content_layers, "Layers with the content processing block")->capture_default_str();
    sub->add_option("--hidden", hidden, "Hidden width")->capture_default_str();
    sub->add_option("--alpha", alpha, "Weight of a node's own content representation")->capture_default_str();
    sub->add_option("--activation", activation, "Activation")->check(CLI::IsMember({"relu", "leaky_relu"}))->capture_default_str();
    sub->add_flag("--no-projection", no_projection, "Feed features straight into layer 1");
    sub->add_option("--confidence-floor", confidence_floor, "Lower bound applied to confidences")->capture_default_str();
    sub->add_option("--seed", seed, "Parameter initialisation seed")->capture_default_str();
  }

  pagnn::PagnnConfig config(std::size_t input_dim, std::size_t fmt_types, std::size_t cont_types,
                            std::size_t classes) const {
    pagnn::PagnnConfig c;
    c.num_layers = layers;
    c.format_layers = format_layers;
    c.content_layers = content_layers;
    c.input_dim = input_dim;
    c.format_dim = c.content_dim = c.regular_dim = hidden;
    c.alpha = alpha;
    c.num_format_types = fmt_types;
    c.num_content_types = cont_types;
    c.num_classes = classes;
    c.activation = activation == "relu" ? pagnn::Activation::relu : pagnn::Activation::leaky_relu;
    c.use_input_projection = !no_projection;
    c.confidence_floor = confidence_floor;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct SplitArgs {
  double train_ratio = 0.4;
  double val_ratio = 0.1;
  std::uint64_t split_seed = 0;

  void add(CLI::App* sub) {
    sub->add_option("--train-ratio", train_ratio, "Train fraction per class when the nodes file has no splits")->capture_default_str();
    sub->add_option("--val-ratio", val_ratio, "Validation fraction per class when the nodes file has no splits")->capture_default_str();
    sub->add_option("--split-seed", split_seed, "Seed for generated splits")->capture_default_str();
  }

  void apply(HeteroGraph& g) const {
    if (!g.has_splits()) g.splits = stratified_splits(g, train_ratio, val_ratio, split_seed);
  }
};

/// Annotations, features and type counts aligned with a graph.
struct ModelInputs {
  std::vector<llm::NodeAnnotation> annotations;
  pagnn::TypedAdjacency adj;
  Matrix features;
  std::size_t format_types = 1;
  std::size_t content_types = 1;
};

ModelInputs load_model_inputs(const HeteroGraph& graph, const std::string& annotations_path,
                              const std::string& features_path, const std::string& schema_path, Manifest& m) {
  ModelInputs in;
  m.input(annotations_path);
  m.input(features_path);
  auto file = llm::read_annotations(annotations_path);
  if (file.node_ids != graph.node_ids) throw DataError("annotation ids do not match the nodes file order");
  in.annotations = std::move(file.annotations);
  if (!schema_path.empty()) {
    m.input(schema_path);
    const auto schema = llm::read_schema(schema_path);
    m.schema_digest(sha256_hex(schema.canonical_json()));
    in.format_types = schema.format_types.size();
    in.content_types = schema.content_types.size();
    for (const auto& a : in.annotations) llm::check_annotation(a, schema);
  } else {
    for (const auto& a : in.annotations) {
      in.format_types = std::max(in.format_types, a.format_index + 1);
      in.content_types = std::max(in.content_types, a.content_index + 1);
    }
  }
  const auto features = llm::read_features(features_path);
  if (features.rows() != graph.node_count()) throw DataError("feature rows do not match node count");
  in.features = features.to_matrix();
  in.adj = pagnn::TypedAdjacency::build(graph, in.annotations);
  return in;
}

std::size_t require_classes(const HeteroGraph& g) {
  if (g.num_classes <= 0) throw DataError("the nodes file carries no labels");
  return static_cast<std::size_t>(g.num_classes);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous graph representation learning with LLM-estimated node types", "ghgrl"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // gen-types
  auto* gen = app.add_subcommand("gen-types", "Generate format and content type names from sampled attributes");
  GraphArgs gen_graph;
  BackendArgs gen_backend;
  std::size_t m_fmt = 0;
  std::size_t m_cont = 0;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t max_tokens = 8192;
  gen_graph.add(gen);
  gen_backend.add(gen);
  gen->add_option("--m-fmt", m_fmt, "Number of format types")->required()->check(CLI::PositiveNumber);
  gen->add_option("--m-cont", m_cont, "Number of content types")->required()->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Schema JSON output")->required();
  gen->add_option("--seed", gen_seed, "Attribute sampling seed")->capture_default_str();
  gen->add_option("--max-tokens", max_tokens, "Model context budget for the sampled attributes")->check(CLI::PositiveNumber)->capture_default_str();

  // annotate
  auto* ann = app.add_subcommand("annotate", "Estimate types, confidences and descriptions for every node");
  GraphArgs ann_graph;
  BackendArgs ann_backend;
  std::string ann_schema;
  std::string ann_out;
  std::string cache_dir;
  std::size_t max_in_flight = 4;
  bool no_fallback = false;
  double fallback_confidence = 0.5;
  ann_graph.add(ann);
  ann_backend.add(ann);
  ann->add_option("--schema", ann_schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  ann->add_option("--out", ann_out, "Annotations JSONL output")->required();
  ann->add_option("--cache-dir", cache_dir, "Annotation cache directory (default $GHGRL_CACHE_DIR)");
  ann->add_option("--max-in-flight", max_in_flight, "Concurrent backend requests")->check(CLI::PositiveNumber)->capture_default_str();
  ann->add_flag("--no-fallback", no_fallback, "Fail instead of using the fallback annotation");
  ann->add_option("--fallback-confidence", fallback_confidence, "Confidence assigned to fallback annotations")->check(CLI::Range(0.0, 1.0))->capture_default_str();

  // embed
  auto* emb = app.add_subcommand("embed", "Embed annotation texts into a feature matrix");
  std::string emb_annotations;
  std::string embedder_kind = "mock";
  std::size_t emb_dim = 64;
  std::size_t batch_size = 32;
  std::string emb_out;
  emb->add_option("--annotations", emb_annotations, "Annotations JSONL")->required()->check(CLI::ExistingFile);
  emb->add_option("--embedder", embedder_kind, "Embedding backend")->check(CLI::IsMember({"mock", "remote"}))->capture_default_str();
  emb->add_option("--dim", emb_dim, "Mock embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
  emb->add_option("--batch-size", batch_size, "Texts per embedding request")->check(CLI::PositiveNumber)->capture_default_str();
  emb->add_option("--out", emb_out, "Feature file output")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a PAGNN node classifier");
  GraphArgs tr_graph;
  ModelArgs tr_model;
  SplitArgs tr_split;
  std::string tr_annotations;
  std::string tr_features;
  std::string tr_schema;
  std::string out_params;
  std::string history_path;
  train::TrainConfig tr_config;
  tr_graph.add(tr);
  tr_model.add(tr);
  tr_split.add(tr);
  tr->add_option("--annotations", tr_annotations, "Annotations JSONL")->required()->check(CLI::ExistingFile);
  tr->add_option("--features", tr_features, "Feature file")->required()->check(CLI::ExistingFile);
  tr->add_option("--schema", tr_schema, "Schema JSON (type counts)")->check(CLI::ExistingFile);
  tr->add_option("--out-params", out_params, "Checkpoint output")->required();
  tr->add_option("--history", history_path, "Per-epoch history CSV output")->required();
  tr->add_option("--epochs", tr_config.epochs, "Maximum epochs")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--lr", tr_config.learning_rate, "Adam learning rate")->capture_default_str();
  tr->add_option("--weight-decay", tr_config.weight_decay, "L2 weight decay")->capture_default_str();
  tr->add_option("--patience", tr_config.early_stop_patience, "Epochs without validation improvement before stopping")->check(CLI::PositiveNumber)->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint with Macro-F1 and Micro-F1");
  GraphArgs ev_graph;
  SplitArgs ev_split;
  std::string ev_annotations;
  std::string ev_features;
  std::string ev_schema;
  std::string ev_params;
  std::string ev_split_name = "test";
  std::string ev_out;
  ev_graph.add(ev);
  ev_split.add(ev);
  ev->add_option("--annotations", ev_annotations, "Annotations JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--features", ev_features, "Feature file")->required()->check(CLI::ExistingFile);
  ev->add_option("--schema", ev_schema, "Schema JSON (type counts)")->check(CLI::ExistingFile);
  ev->add_option("--params", ev_params, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--split", ev_split_name, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();
  ev->add_option("--out", ev_out, "Report JSON output")->required();

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "Per-layer over-smoothing profile: PAGNN vs. no type-conditioned blocks");
  GraphArgs dg_graph;
  ModelArgs dg_model;
  SplitArgs dg_split;
  std::string dg_annotations;
  std::string dg_features;
  std::string dg_schema;
  std::string dg_params;
  std::string dg_out_dir;
  std::size_t max_layer = 4;
  std::size_t dg_epochs = 0;
  dg_model.layers = 4;
  dg_model.format_layers = 4;
  dg_model.content_layers = 4;
  dg_graph.add(dg);
  dg_model.add(dg);
  dg_split.add(dg);
  dg->add_option("--annotations", dg_annotations, "Annotations JSONL")->required()->check(CLI::ExistingFile);
  dg->add_option("--features", dg_features, "Feature file")->required()->check(CLI::ExistingFile);
  dg->add_option("--schema", dg_schema, "Schema JSON (type counts)")->check(CLI::ExistingFile);
  dg->add_option("--params", dg_params, "Checkpoint for the full model (otherwise initialised or trained here)")->check(CLI::ExistingFile);
  dg->add_option("--max-layer", max_layer, "Deepest layer to profile")->capture_default_str();
  dg->add_option("--epochs", dg_epochs, "Train both models for this many epochs before profiling")->capture_default_str();
  dg->add_option("--out-dir", dg_out_dir, "Output directory")->required();

  // corrupt
  auto* co = app.add_subcommand("corrupt", "Build an RIR or RID variant of a dataset");
  GraphArgs co_graph;
  std::string kind;
  double ratio = 0.0;
  double deletion = 0.0;
  std::string pool_path;
  std::uint64_t co_seed = 0;
  std::string co_out;
  std::string co_out_edges;
  co_graph.add(co);
  co->add_option("--kind", kind, "Corruption kind")->required()->check(CLI::IsMember({"rid", "rir"}));
  co->add_option("--r", ratio, "Fraction of nodes corrupted")->required()->check(CLI::Range(0.0, 1.0));
  co->add_option("--deletion", deletion, "Fraction of tokens deleted per corrupted node (rid)")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  co->add_option("--pool", pool_path, "Replacement pool JSONL (rir)")->check(CLI::ExistingFile);
  co->add_option("--seed", co_seed, "Corruption seed")->capture_default_str();
  co->add_option("--out", co_out, "Corrupted nodes JSONL output")->required();
  co->add_option("--out-edges", co_out_edges, "Optional copy of the edges CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return usage_error;
  }

  try {
    if (*gen) {
      Manifest m("gen-types", *gen);
      const auto graph = gen_graph.load(m);
      const auto templates = gen_backend.load_templates(m);
      auto backend = gen_backend.make();
      const auto sample = llm::sample_attributes(graph, max_tokens * llm::kCharsPerToken, gen_seed);
      const auto schema =
          llm::generate_type_schema(graph, sample, m_fmt, m_cont, templates, *backend, gen_backend.options());
      llm::write_schema(schema, gen_out);
      m.seed("sample", gen_seed);
      m.schema_digest(sha256_hex(schema.canonical_json()));
      m.output(gen_out);
      m.write(gen_out);
      out << "wrote " << schema.format_types.size() << " format and " << schema.content_types.size()
          << " content types to " << gen_out << '\n';
    } else if (*ann) {
      Manifest m("annotate", *ann);
      const auto graph = ann_graph.load(m);
      m.input(ann_schema);
      const auto schema = llm::read_schema(ann_schema);
      m.schema_digest(sha256_hex(schema.canonical_json()));
      const auto templates = ann_backend.load_templates(m);
      auto backend = ann_backend.make();
      auto options = ann_backend.options();
      options.fallback_enabled = !no_fallback;
      options.fallback_confidence = fallback_confidence;
      if (cache_dir.empty()) {
        if (const char* env = std::getenv("GHGRL_CACHE_DIR")) cache_dir = env;
      }
      std::optional<llm::AnnotationCache> cache;
      if (!cache_dir.empty()) cache.emplace(cache_dir);
      const auto annotations = llm::annotate_all(graph, schema, templates, *backend, cache ? &*cache : nullptr,
                                                 max_in_flight, options);
      llm::write_annotations(annotations, graph.node_ids, schema, ann_out);
      m.output(ann_out);
      m.write(ann_out);
      out << "annotated " << annotations.size() << " nodes (" << backend->call_count() << " backend calls)\n";
    } else if (*emb) {
      Manifest m("embed", *emb);
      m.input(emb_annotations);
      const auto file = llm::read_annotations(emb_annotations);
      std::unique_ptr<llm::Embedder> embedder;
      if (embedder_kind == "mock") {
        embedder = std::make_unique<llm::MockEmbedder>(emb_dim);
      } else {
        embedder = llm::RemoteEmbedder::from_env();
      }
      const auto features = llm::build_feature_matrix(file.annotations, *embedder, batch_size);
      llm::write_features(features, emb_out);
      m.output(emb_out);
      m.write(emb_out);
      out << "wrote " << features.rows() << "x" << features.dim << " features to " << emb_out << '\n';
    } else if (*tr) {
      Manifest m("train", *tr);
      auto graph = tr_graph.load(m);
      tr_split.apply(graph);
      const auto inputs = load_model_inputs(graph, tr_annotations, tr_features, tr_schema, m);
      const auto config = tr_model.config(inputs.features.cols(), inputs.format_types, inputs.content_types,
                                          require_classes(graph));
      tr_config.seed = tr_model.seed;
      const auto result = train::train(graph, inputs.adj, inputs.features, config, tr_config);
      pagnn::write_checkpoint(config, result.params, out_params);
      train::write_history_csv(result.history, history_path);
      m.seed("init", tr_model.seed);
      m.seed("split", tr_split.split_seed);
      m.output(out_params);
      m.output(history_path);
      m.write(out_params);
      out << "trained " << result.history.size() << " epochs, best epoch " << result.best_epoch << '\n';
    } else if (*ev) {
      Manifest m("eval", *ev);
      auto graph = ev_graph.load(m);
      ev_split.apply(graph);
      const auto inputs = load_model_inputs(graph, ev_annotations, ev_features, ev_schema, m);
      m.input(ev_params);
      const auto ck = pagnn::read_checkpoint(ev_params);
      const auto logits = pagnn::pagnn_forward(inputs.features, inputs.adj, ck.config, ck.params);
      const auto split = *parse_split(ev_split_name);
      const auto report = train::evaluate(logits, graph.labels, train::split_mask(graph, split),
                                          ck.config.num_classes, ev_split_name);
      {
        std::ofstream f(ev_out, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + ev_out);
        f << train::report_json(report);
      }
      m.seed("split", ev_split.split_seed);
      m.output(ev_out);
      m.write(ev_out);
      out << ev_split_name << " macro-F1 " << report.macro_f1 << " micro-F1 " << report.micro_f1 << '\n';
    } else if (*dg) {
      Manifest m("diagnose", *dg);
      auto graph = dg_graph.load(m);
      const auto inputs = load_model_inputs(graph, dg_annotations, dg_features, dg_schema, m);
      const std::size_t classes = graph.num_classes > 0 ? static_cast<std::size_t>(graph.num_classes) : 1;
      pagnn::PagnnConfig full_config;
      pagnn::PagnnParams full_params;
      if (!dg_params.empty()) {
        m.input(dg_params);
        auto ck = pagnn::read_checkpoint(dg_params);
        full_config = ck.config;
        full_params = std::move(ck.params);
      } else {
        full_config = dg_model.config(inputs.features.cols(), inputs.format_types, inputs.content_types, classes);
        full_params = pagnn::init_params(full_config);
      }
      const auto ablated = analysis::ablation_config(full_config);
      auto ablated_params = pagnn::init_params(ablated);
      if (dg_epochs > 0) {
        dg_split.apply(graph);
        train::TrainConfig tc;
        tc.epochs = dg_epochs;
        tc.early_stop_patience = dg_epochs;
        if (dg_params.empty()) full_params = train::train(graph, inputs.adj, inputs.features, full_config, tc).params;
        ablated_params = train::train(graph, inputs.adj, inputs.features, ablated, tc).params;
      }
      const auto full = analysis::oversmoothing_profile(inputs.features, inputs.adj, full_config, full_params, max_layer);
      const auto abl = analysis::oversmoothing_profile(inputs.features, inputs.adj, ablated, ablated_params, max_layer);
      const fs::path dir(dg_out_dir);
      fs::create_directories(dir);
      analysis::write_profile_csv(full, dir / "profile_full.csv");
      analysis::write_profile_csv(abl, dir / "profile_ablation.csv");
      analysis::write_comparison_csv({"full", "ablation"}, {full, abl}, dir / "profile_comparison.csv");
      analysis::write_gnuplot_data({"full", "ablation"}, {full, abl}, dir / "profile.dat");
      for (const char* name : {"profile_full.csv", "profile_ablation.csv", "profile_comparison.csv", "profile.dat"}) {
        m.output(dir / name);
      }
      m.seed("init", full_config.seed);
      m.write(dir / "profile_comparison.csv");
      for (std::size_t l = 0; l < full.value.size(); ++l) {
        out << "layer " << l << ": full " << full.value[l] << " ablation " << abl.value[l] << '\n';
      }
    } else if (*co) {
      Manifest m("corrupt", *co);
      const auto graph = co_graph.load(m);
      CorruptionSpec spec;
      spec.kind = kind == "rid" ? CorruptionKind::rid : CorruptionKind::rir;
      spec.ratio = ratio;
      spec.deletion_fraction = deletion;
      spec.seed = co_seed;
      if (spec.kind == CorruptionKind::rir) {
        if (pool_path.empty()) throw DataError("--pool is required for rir corruption");
        m.input(pool_path);
        spec.pool = load_replacement_pool(pool_path, graph);
      }
      const auto corrupted = corrupt(graph, spec);
      write_nodes(corrupted, co_out);
      m.output(co_out);
      if (!co_out_edges.empty()) {
        write_edges(corrupted, co_out_edges);
        m.output(co_out_edges);
      }
      m.seed("corruption", co_seed);
      m.write(co_out);
      out << "wrote corrupted nodes to " << co_out << '\n';
    }
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return backend_error;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return data_error;
  }
  return ok;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"ghgrl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ghgrl::cli
