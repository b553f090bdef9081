#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ghgrl/graph.hpp"
#include "ghgrl/matrix.hpp"
#include "ghgrl/pagnn.hpp"

namespace ghgrl::analysis {

enum class SimplifiedVariant { plain_g, typed_g_tilde };

enum class WeightInit { scaled_identity, random };

/// Configuration for the two linear propagation models used to study
/// over-smoothing:
///   plain_g:        h_v <- h_v + mean_{u in N(v)}(h_u W_l)
///   typed_g_tilde:  h_v <- h_v + mean_{u in N(v)}(h_u W[t(v)] + B[t(v)])
/// plain_g uses one weight per layer (scaled identity or random);
/// typed_g_tilde uses one random (W, B) pair per type, shared by all layers.
struct SimplifiedModelSpec {
  SimplifiedVariant variant = SimplifiedVariant::plain_g;
  std::size_t layers = 0;
  std::uint64_t weight_seed = 0;
  std::vector<std::size_t> types;  // typed variant: one entry per node
  bool normalize_each_layer = true;
  WeightInit weight_init = WeightInit::scaled_identity;
  double identity_scale = 1.0;
  double blowup_threshold = 1e100;
};

/// Runs the recurrence. With `normalize_each_layer` every row is rescaled to
/// unit norm after each layer (zero rows stay zero). Without it, a magnitude
/// above `blowup_threshold` is a DataError naming the layer.
Matrix simplified_iterate(const std::vector<std::vector<std::size_t>>& neighbors, const Matrix& features,
                          const SimplifiedModelSpec& spec);
Matrix simplified_iterate(const HeteroGraph& graph, const Matrix& features, const SimplifiedModelSpec& spec);

struct DependenceReport {
  bool dependent = false;
  std::size_t rank = 0;
  double max_abs_cosine = 0.0;
  std::vector<double> singular_values;  // of the row-normalised matrix, descending
};

/// Numerical rank of the row set after normalising each row to unit
/// length: singular values at most tol * largest count as zero. The set is
/// dependent when the rank is below the row count.
DependenceReport linear_dependence_check(const Matrix& rows, double tol);

/// All pairwise cosines between rows (i < j), row-major pair order.
std::vector<double> pairwise_cosines(const Matrix& rows);

/// Per-layer over-smoothing measure: for each content type, cosine between
/// the type's mean representation and the mean over all nodes; `value` is
/// the mean over types that have members. Layer 0 is the input to the
/// first layer.
struct OversmoothingProfile {
  std::size_t layer_count = 0;  // layers after the input
  std::size_t type_count = 0;
  std::vector<std::vector<double>> per_type;  // [layer][type], NaN for empty types
  std::vector<double> value;                  // [layer]
};

OversmoothingProfile profile_from_representations(const std::vector<Matrix>& representations,
                                                  const std::vector<std::size_t>& content_index,
                                                  std::size_t type_count);

/// Post-layer representations (after each layer's regular block) of a
/// PAGNN, preceded by the layer-1 input.
std::vector<Matrix> layer_representations(const Matrix& features, const pagnn::TypedAdjacency& adj,
                                          const pagnn::PagnnConfig& config, const pagnn::PagnnParams& params);

OversmoothingProfile oversmoothing_profile(const Matrix& features, const pagnn::TypedAdjacency& adj,
                                           const pagnn::PagnnConfig& config, const pagnn::PagnnParams& params,
                                           std::size_t max_layer);

/// Same network with the type-conditioned blocks removed.
pagnn::PagnnConfig ablation_config(pagnn::PagnnConfig config);

void write_profile_csv(const OversmoothingProfile& profile, const std::filesystem::path& path);

/// layer,<name1>,<name2>,... with one column per profile.
void write_comparison_csv(const std::vector<std::string>& names, const std::vector<OversmoothingProfile>& profiles,
                          const std::filesystem::path& path);

/// Whitespace-separated columns with a '#' header line, for gnuplot.
void write_gnuplot_data(const std::vector<std::string>& names, const std::vector<OversmoothingProfile>& profiles,
                        const std::filesystem::path& path);

}  // namespace ghgrl::analysis
