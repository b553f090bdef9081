#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ghgrl/graph.hpp"
#include "ghgrl/matrix.hpp"
#include "ghgrl/pagnn.hpp"

namespace ghgrl::train {

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

/// Mean over masked nodes of -log softmax(logits[v])[label_v]. Unmasked
/// rows get zero gradient. Throws DataError when the mask selects no
/// labeled node.
LossResult cross_entropy_loss(const Matrix& logits, const std::vector<std::optional<int>>& labels,
                              const std::vector<bool>& mask);

struct EvalReport {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::string split;
};

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> row) noexcept;

/// Macro-F1 averages per-class F1 over all num_classes classes, scoring a
/// class that is absent from both labels and predictions as 0. Micro-F1 is
/// computed from global counts.
EvalReport evaluate(const Matrix& logits, const std::vector<std::optional<int>>& labels,
                    const std::vector<bool>& mask, std::size_t num_classes, std::string split = "test");

/// Same metrics from precomputed predictions.
EvalReport evaluate_predictions(const std::vector<std::size_t>& predictions, const std::vector<int>& labels,
                                std::size_t num_classes, std::string split = "test");

std::string report_json(const EvalReport& report);

std::vector<bool> split_mask(const HeteroGraph& graph, Split split);

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 5e-3;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t early_stop_patience = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adam with L2 weight decay folded into the gradient.
class Adam {
 public:
  Adam(const pagnn::PagnnParams& shape, const TrainConfig& config);
  void step(pagnn::PagnnParams& params, const pagnn::PagnnParams& grads);

 private:
  TrainConfig config_;
  pagnn::PagnnParams m_;
  pagnn::PagnnParams v_;
  std::size_t t_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;  // NaN when there is no validation split
  double val_micro_f1 = 0.0;
};

struct TrainResult {
  pagnn::PagnnParams params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

/// Full-graph training. Each epoch evaluates the current parameters (train
/// loss, validation F1), keeps a copy when validation Macro-F1 improves, and
/// then takes one Adam step. With a validation split, training stops after
/// `early_stop_patience` epochs without improvement and the best copy is
/// returned.
TrainResult train(const HeteroGraph& graph, const pagnn::TypedAdjacency& adj, const Matrix& features,
                  const pagnn::PagnnConfig& model_config, const TrainConfig& config,
                  std::optional<pagnn::PagnnParams> initial = std::nullopt);

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace ghgrl::train
