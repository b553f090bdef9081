#include "ghgrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/SVD>

#include "ghgrl/error.hpp"
#include "ghgrl/rng.hpp"

namespace ghgrl::analysis {
namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Rng rng(seed);
  for (auto& x : m.flat()) x = rng.uniform(-bound, bound);
  return m;
}

void normalize_rows(Matrix& m) {
  for (std::size_t v = 0; v < m.rows(); ++v) {
    auto r = m.row(v);
    const double n = norm2(r);
    if (n == 0.0) continue;
    for (auto& x : r) x /= n;
  }
}

std::string format_value(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void check_profiles(const std::vector<std::string>& names, const std::vector<OversmoothingProfile>& profiles) {
  if (names.size() != profiles.size() || profiles.empty()) throw DataError("profile names and data do not match");
  for (const auto& p : profiles) {
    if (p.value.size() != profiles.front().value.size()) throw DataError("profiles cover different layer counts");
  }
}

}  // namespace

Matrix simplified_iterate(const std::vector<std::vector<std::size_t>>& neighbors, const Matrix& features,
                          const SimplifiedModelSpec& spec) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (neighbors.size() != n) throw DataError("feature rows do not match node count");
  if (!features.all_finite()) throw DataError("non-finite input features");
  const bool typed = spec.variant == SimplifiedVariant::typed_g_tilde;
  std::size_t type_count = 0;
  if (typed) {
    if (spec.types.size() != n) throw DataError("typed variant requires a type index for every node");
    for (const auto t : spec.types) type_count = std::max(type_count, t + 1);
  }

  std::vector<Matrix> type_weight;
  std::vector<Matrix> type_bias;
  for (std::size_t t = 0; t < type_count; ++t) {
    type_weight.push_back(random_matrix(d, d, derive_seed(spec.weight_seed, 2 * t)));
    type_bias.push_back(random_matrix(1, d, derive_seed(spec.weight_seed, 2 * t + 1)));
  }
  const auto layer_weight = [&](std::size_t l) {
    if (spec.weight_init == WeightInit::random) return random_matrix(d, d, derive_seed(spec.weight_seed, 1000 + l));
    Matrix w(d, d);
    for (std::size_t i = 0; i < d; ++i) w(i, i) = spec.identity_scale;
    return w;
  };

  Matrix h = features;
  Matrix mean(n, d);
  Matrix next(n, d);
  for (std::size_t l = 0; l < spec.layers; ++l) {
    for (std::size_t v = 0; v < n; ++v) {
      auto m = mean.row(v);
      std::fill(m.begin(), m.end(), 0.0);
      for (const auto u : neighbors[v]) {
        const auto r = h.row(u);
        for (std::size_t j = 0; j < d; ++j) m[j] += r[j];
      }
      if (!neighbors[v].empty()) {
        for (auto& x : m) x /= static_cast<double>(neighbors[v].size());
      }
    }
    const Matrix w = typed ? Matrix() : layer_weight(l);
    for (std::size_t v = 0; v < n; ++v) {
      auto out = next.row(v);
      const auto hv = h.row(v);
      std::copy(hv.begin(), hv.end(), out.begin());
      if (neighbors[v].empty()) continue;
      // mean(h_u W + B) = mean(h_u) W + B for a non-empty neighborhood.
      if (typed) {
        const std::size_t t = spec.types[v];
        add_row_times(mean.row(v), type_weight[t], out);
        const auto b = type_bias[t].row(0);
        for (std::size_t j = 0; j < d; ++j) out[j] += b[j];
      } else {
        add_row_times(mean.row(v), w, out);
      }
    }
    std::swap(h, next);
    if (spec.normalize_each_layer) {
      normalize_rows(h);
    } else {
      for (const double x : h.flat()) {
        if (!std::isfinite(x) || std::abs(x) > spec.blowup_threshold) {
          throw DataError("simplified model magnitude blew up at layer " + std::to_string(l + 1));
        }
      }
    }
  }
  return h;
}

Matrix simplified_iterate(const HeteroGraph& graph, const Matrix& features, const SimplifiedModelSpec& spec) {
  return simplified_iterate(neighbor_lists(graph), features, spec);
}

DependenceReport linear_dependence_check(const Matrix& rows, double tol) {
  DependenceReport r;
  const std::size_t n = rows.rows();
  if (n == 0) return r;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows.cols()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = rows.row(i);
    const double len = norm2(row);
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = len == 0.0 ? 0.0 : row[j] / len;
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  r.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double largest = r.singular_values.empty() ? 0.0 : r.singular_values.front();
  for (const double s : r.singular_values) {
    if (largest > 0.0 && s > tol * largest) ++r.rank;
  }
  r.dependent = r.rank < n;
  for (const double c : pairwise_cosines(rows)) r.max_abs_cosine = std::max(r.max_abs_cosine, std::abs(c));
  return r;
}

std::vector<double> pairwise_cosines(const Matrix& rows) {
  std::vector<double> out;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t j = i + 1; j < rows.rows(); ++j) out.push_back(cosine(rows.row(i), rows.row(j)));
  }
  return out;
}

OversmoothingProfile profile_from_representations(const std::vector<Matrix>& representations,
                                                  const std::vector<std::size_t>& content_index,
                                                  std::size_t type_count) {
  if (representations.empty()) throw DataError("no representations to profile");
  OversmoothingProfile p;
  p.layer_count = representations.size() - 1;
  p.type_count = type_count;
  for (const auto& h : representations) {
    if (h.rows() != content_index.size()) throw DataError("representation rows do not match type indices");
    const std::size_t d = h.cols();
    std::vector<double> global(d, 0.0);
    Matrix type_sum(type_count, d);
    std::vector<std::size_t> members(type_count, 0);
    for (std::size_t v = 0; v < h.rows(); ++v) {
      const std::size_t t = content_index[v];
      if (t >= type_count) throw DataError("content type index out of range");
      ++members[t];
      const auto r = h.row(v);
      auto ts = type_sum.row(t);
      for (std::size_t j = 0; j < d; ++j) {
        global[j] += r[j];
        ts[j] += r[j];
      }
    }
    for (auto& x : global) x /= static_cast<double>(h.rows());
    std::vector<double> per_type(type_count, std::nan(""));
    double total = 0.0;
    std::size_t present = 0;
    for (std::size_t t = 0; t < type_count; ++t) {
      if (members[t] == 0) continue;
      auto ts = type_sum.row(t);
      for (auto& x : ts) x /= static_cast<double>(members[t]);
      per_type[t] = cosine(ts, global);
      total += per_type[t];
      ++present;
    }
    p.per_type.push_back(std::move(per_type));
    p.value.push_back(present == 0 ? std::nan("") : total / static_cast<double>(present));
  }
  return p;
}

std::vector<Matrix> layer_representations(const Matrix& features, const pagnn::TypedAdjacency& adj,
                                          const pagnn::PagnnConfig& config, const pagnn::PagnnParams& params) {
  pagnn::ForwardTrace trace;
  pagnn::pagnn_forward(features, adj, config, params, &trace);
  std::vector<Matrix> reps;
  reps.push_back(std::move(trace.projected));
  for (auto& layer : trace.layers) reps.push_back(std::move(layer.output));
  return reps;
}

OversmoothingProfile oversmoothing_profile(const Matrix& features, const pagnn::TypedAdjacency& adj,
                                           const pagnn::PagnnConfig& config, const pagnn::PagnnParams& params,
                                           std::size_t max_layer) {
  if (max_layer > config.num_layers) throw DataError("max_layer exceeds the number of model layers");
  auto reps = layer_representations(features, adj, config, params);
  reps.resize(max_layer + 1);
  return profile_from_representations(reps, adj.content_index, config.num_content_types);
}

pagnn::PagnnConfig ablation_config(pagnn::PagnnConfig config) {
  config.format_layers = 0;
  config.content_layers = 0;
  return config;
}

void write_profile_csv(const OversmoothingProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "layer,value\n";
  for (std::size_t l = 0; l < profile.value.size(); ++l) out << l << ',' << format_value(profile.value[l]) << '\n';
}

void write_comparison_csv(const std::vector<std::string>& names, const std::vector<OversmoothingProfile>& profiles,
                          const std::filesystem::path& path) {
  check_profiles(names, profiles);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "layer";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t l = 0; l < profiles.front().value.size(); ++l) {
    out << l;
    for (const auto& p : profiles) out << ',' << format_value(p.value[l]);
    out << '\n';
  }
}

void write_gnuplot_data(const std::vector<std::string>& names, const std::vector<OversmoothingProfile>& profiles,
                        const std::filesystem::path& path) {
  check_profiles(names, profiles);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# layer";
  for (const auto& n : names) out << ' ' << n;
  out << '\n';
  for (std::size_t l = 0; l < profiles.front().value.size(); ++l) {
    out << l;
    for (const auto& p : profiles) out << ' ' << format_value(p.value[l]);
    out << '\n';
  }
}

}  // namespace ghgrl::analysis
