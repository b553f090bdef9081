#include "ghgrl/embedding.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "ghgrl/digest.hpp"
#include "ghgrl/error.hpp"

namespace ghgrl::llm {
namespace {

constexpr std::array<char, 4> kMagic = {'G', 'H', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError(path.string() + ": truncated feature file");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

Matrix FeatureMatrix::to_matrix() const {
  Matrix m(rows(), dim);
  for (std::size_t i = 0; i < values.size(); ++i) m.flat()[i] = static_cast<double>(values[i]);
  return m;
}

void write_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  if (features.dim == 0 || features.values.size() % features.dim != 0) {
    throw DataError("feature matrix has inconsistent shape");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, features.rows());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(features.dim));
  for (const float v : features.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw DataError("write failed for " + path.string());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError(path.string() + ": not a GHGF feature file");
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kVersion) throw DataError(path.string() + ": unsupported feature file version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(in, path);
  const auto dim = get_le<std::uint32_t>(in, path);
  if (dim == 0) throw DataError(path.string() + ": zero feature dimension");
  FeatureMatrix f;
  f.dim = dim;
  f.values.resize(static_cast<std::size_t>(rows) * dim);
  for (auto& v : f.values) {
    v = std::bit_cast<float>(get_le<std::uint32_t>(in, path));
    if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite feature value");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(path.string() + ": trailing bytes after features");
  return f;
}

std::vector<std::vector<float>> Embedder::embed(const std::vector<std::string>& texts) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  auto vectors = do_embed(texts);
  if (vectors.size() != texts.size()) {
    throw BackendError("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                       std::to_string(texts.size()) + " texts");
  }
  std::lock_guard lock(mutex_);
  for (const auto& v : vectors) {
    if (v.empty()) throw DataError("embedder returned an empty vector");
    if (!dim_) dim_ = v.size();
    if (v.size() != *dim_) {
      throw DataError("embedding dimension " + std::to_string(v.size()) + " differs from earlier " +
                      std::to_string(*dim_));
    }
    for (const float x : v) {
      if (!std::isfinite(x)) throw DataError("embedder returned a non-finite value");
    }
  }
  return vectors;
}

std::optional<std::size_t> Embedder::dim() const {
  std::lock_guard lock(mutex_);
  return dim_;
}

MockEmbedder::MockEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DataError("embedding dimension must be positive");
}

std::vector<float> MockEmbedder::embed_text(const std::string& text, std::size_t dim) {
  std::vector<double> acc(dim, 0.0);
  std::string token;
  const auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = stable_hash64(token);
    acc[h % dim] += (h >> 63) != 0 ? -1.0 : 1.0;
    token.clear();
  };
  for (const char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      token += static_cast<char>(std::tolower(uc));
    } else {
      flush();
    }
  }
  flush();
  double norm = 0.0;
  for (const double x : acc) norm += x * x;
  if (norm == 0.0) {
    // No tokens, or every token cancelled out.
    acc.assign(dim, 0.0);
    acc[stable_hash64(text) % dim] = 1.0;
    norm = 1.0;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

std::vector<std::vector<float>> MockEmbedder::do_embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t, dim_));
  return out;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (endpoint_.empty()) throw BackendError("embedding endpoint is empty");
}

std::unique_ptr<RemoteEmbedder> RemoteEmbedder::from_env() {
  const char* endpoint = std::getenv("GHGRL_EMBED_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') throw BackendError("GHGRL_EMBED_ENDPOINT is not set");
  return std::make_unique<RemoteEmbedder>(endpoint);
}

std::vector<std::vector<float>> RemoteEmbedder::do_embed(const std::vector<std::string>& texts) {
  httplib::Client client(endpoint_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  const nlohmann::json body = {{"texts", texts}};
  const auto res = client.Post("/embed", body.dump(), "application/json");
  if (!res) throw BackendError("embedding request to " + endpoint_ + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("embedding request returned HTTP " + std::to_string(res->status));
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("embeddings").get<std::vector<std::vector<float>>>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed embedding response: ") + e.what());
  }
}

std::string embedding_text(const NodeAnnotation& annotation) {
  return annotation.description + "\n" + annotation.reasoning;
}

std::vector<float> embed_annotation(const NodeAnnotation& annotation, Embedder& embedder) {
  return embedder.embed({embedding_text(annotation)}).front();
}

FeatureMatrix build_feature_matrix(const std::vector<NodeAnnotation>& annotations, Embedder& embedder,
                                   std::size_t batch_size) {
  if (batch_size == 0) batch_size = 1;
  FeatureMatrix f;
  for (std::size_t start = 0; start < annotations.size(); start += batch_size) {
    const std::size_t end = std::min(annotations.size(), start + batch_size);
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) texts.push_back(embedding_text(annotations[i]));
    for (auto& v : embedder.embed(texts)) {
      f.dim = v.size();
      f.values.insert(f.values.end(), v.begin(), v.end());
    }
  }
  return f;
}

}  // namespace ghgrl::llm
