#include "ghgrl/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ghgrl/error.hpp"

namespace ghgrl::train {
namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

}  // namespace

LossResult cross_entropy_loss(const Matrix& logits, const std::vector<std::optional<int>>& labels,
                              const std::vector<bool>& mask) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  if (labels.size() != n || mask.size() != n) throw DataError("loss: labels/mask length does not match logits");
  std::size_t count = 0;
  for (std::size_t v = 0; v < n; ++v) count += (mask[v] && labels[v]) ? 1 : 0;
  if (count == 0) throw DataError("loss: mask selects no labeled node");

  LossResult out{0.0, Matrix(n, k)};
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask[v] || !labels[v]) continue;
    const auto y = static_cast<std::size_t>(*labels[v]);
    if (y >= k) throw DataError("loss: label outside the logit range");
    const auto row = logits.row(v);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (const double z : row) sum += std::exp(z - mx);
    const double lse = mx + std::log(sum);
    out.loss += (lse - row[y]) * inv;
    auto g = out.grad.row(v);
    for (std::size_t j = 0; j < k; ++j) g[j] = std::exp(row[j] - lse) * inv;
    g[y] -= inv;
  }
  return out;
}

std::size_t argmax(std::span<const double> row) noexcept {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

EvalReport evaluate_predictions(const std::vector<std::size_t>& predictions, const std::vector<int>& labels,
                                std::size_t num_classes, std::string split) {
  if (predictions.size() != labels.size()) throw DataError("evaluate: prediction and label counts differ");
  if (num_classes == 0) throw DataError("evaluate: num_classes must be positive");
  EvalReport r;
  r.split = std::move(split);
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes || predictions[i] >= num_classes) {
      throw DataError("evaluate: class index out of range");
    }
    ++r.confusion[static_cast<std::size_t>(labels[i])][predictions[i]];
  }
  std::size_t tp_all = 0;
  std::size_t fp_all = 0;
  std::size_t fn_all = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t tp = r.confusion[c][c];
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t o = 0; o < num_classes; ++o) {
      if (o == c) continue;
      fp += r.confusion[o][c];
      fn += r.confusion[c][o];
    }
    r.per_class_f1.push_back(f1(tp, fp, fn));
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  double sum = 0.0;
  for (const double x : r.per_class_f1) sum += x;
  r.macro_f1 = sum / static_cast<double>(num_classes);
  r.micro_f1 = f1(tp_all, fp_all, fn_all);
  return r;
}

EvalReport evaluate(const Matrix& logits, const std::vector<std::optional<int>>& labels,
                    const std::vector<bool>& mask, std::size_t num_classes, std::string split) {
  if (labels.size() != logits.rows() || mask.size() != logits.rows()) {
    throw DataError("evaluate: labels/mask length does not match logits");
  }
  if (logits.cols() != num_classes) throw DataError("evaluate: logit width does not match num_classes");
  std::vector<std::size_t> preds;
  std::vector<int> truth;
  for (std::size_t v = 0; v < logits.rows(); ++v) {
    if (!mask[v] || !labels[v]) continue;
    preds.push_back(argmax(logits.row(v)));
    truth.push_back(*labels[v]);
  }
  if (truth.empty()) throw DataError("evaluate: split '" + split + "' has no labeled nodes");
  return evaluate_predictions(preds, truth, num_classes, std::move(split));
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["split"] = report.split;
  j["macro_f1"] = report.macro_f1;
  j["micro_f1"] = report.micro_f1;
  j["per_class_f1"] = report.per_class_f1;
  j["confusion"] = report.confusion;
  return j.dump(2) + "\n";
}

std::vector<bool> split_mask(const HeteroGraph& graph, Split split) {
  std::vector<bool> mask(graph.node_count(), false);
  if (graph.splits.empty()) return mask;
  for (std::size_t v = 0; v < graph.node_count(); ++v) mask[v] = graph.splits[v] == split;
  return mask;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw DataError("epochs must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw DataError("learning rate must be non-negative");
  if (!(weight_decay >= 0.0)) throw DataError("weight decay must be non-negative");
  if (early_stop_patience == 0) throw DataError("early-stop patience must be at least 1");
}

Adam::Adam(const pagnn::PagnnParams& shape, const TrainConfig& config)
    : config_(config), m_(pagnn::zeros_like(shape)), v_(pagnn::zeros_like(shape)) {}

void Adam::step(pagnn::PagnnParams& params, const pagnn::PagnnParams& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::vector<std::span<double>> p;
  std::vector<std::span<const double>> g;
  std::vector<std::span<double>> m;
  std::vector<std::span<double>> v;
  pagnn::for_each_tensor(params, [&](Matrix& x, pagnn::TensorRole) { p.push_back(x.flat()); });
  pagnn::for_each_tensor(grads, [&](const Matrix& x, pagnn::TensorRole) { g.push_back(x.flat()); });
  pagnn::for_each_tensor(m_, [&](Matrix& x, pagnn::TensorRole) { m.push_back(x.flat()); });
  pagnn::for_each_tensor(v_, [&](Matrix& x, pagnn::TensorRole) { v.push_back(x.flat()); });
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double grad = g[k][i] + config_.weight_decay * p[k][i];
      m[k][i] = config_.beta1 * m[k][i] + (1.0 - config_.beta1) * grad;
      v[k][i] = config_.beta2 * v[k][i] + (1.0 - config_.beta2) * grad * grad;
      const double m_hat = m[k][i] / bc1;
      const double v_hat = v[k][i] / bc2;
      p[k][i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

TrainResult train(const HeteroGraph& graph, const pagnn::TypedAdjacency& adj, const Matrix& features,
                  const pagnn::PagnnConfig& model_config, const TrainConfig& config,
                  std::optional<pagnn::PagnnParams> initial) {
  config.validate();
  model_config.validate();
  if (graph.labels.size() != graph.node_count()) throw DataError("training requires node labels");
  if (model_config.num_classes != static_cast<std::size_t>(graph.num_classes)) {
    throw DataError("model num_classes does not match the dataset");
  }
  const auto train_mask = split_mask(graph, Split::train);
  const auto val_mask = split_mask(graph, Split::val);
  bool any_train = false;
  bool any_val = false;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    any_train = any_train || (train_mask[v] && graph.labels[v]);
    any_val = any_val || (val_mask[v] && graph.labels[v]);
  }
  if (!any_train) throw DataError("no labeled nodes in the train split");

  TrainResult result;
  result.params = initial ? std::move(*initial) : pagnn::init_params(model_config);
  Adam optimizer(result.params, config);
  pagnn::PagnnParams best = result.params;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const Matrix logits = pagnn::pagnn_forward(features, adj, model_config, result.params);
    const auto loss = cross_entropy_loss(logits, graph.labels, train_mask);
    EpochRecord rec{epoch, loss.loss, std::nan(""), std::nan("")};
    if (any_val) {
      const auto report = evaluate(logits, graph.labels, val_mask, model_config.num_classes, "val");
      rec.val_macro_f1 = report.macro_f1;
      rec.val_micro_f1 = report.micro_f1;
      if (report.macro_f1 > best_score) {
        best_score = report.macro_f1;
        best = result.params;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.history.push_back(rec);
    if (any_val && since_best >= config.early_stop_patience) break;

    const auto grads = pagnn::pagnn_backward(features, adj, model_config, result.params, loss.grad);
    optimizer.step(result.params, grads.params);
  }

  if (any_val) {
    result.params = std::move(best);
  } else {
    result.best_epoch = result.history.size();
  }
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,train_loss,val_macro_f1,val_micro_f1\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_macro_f1) << ','
        << format_double(r.val_micro_f1) << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace ghgrl::train
