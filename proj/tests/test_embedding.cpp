#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "ghgrl/digest.hpp"
#include "ghgrl/embedding.hpp"
#include "ghgrl/error.hpp"

namespace ghgrl::llm {
namespace {

using ghgrl::testing::TempDir;

double norm(const std::vector<float>& v) {
  double s = 0.0;
  for (const float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

TEST(MockEmbedder, DeterministicUnitNorm) {
  MockEmbedder e(8);
  const NodeAnnotation a{0, 1, 0, 1, "A film about space", "Mentions a director"};
  const auto v1 = embed_annotation(a, e);
  const auto v2 = embed_annotation(a, e);
  EXPECT_EQ(v1, v2);
  ASSERT_EQ(v1.size(), 8u);
  EXPECT_NEAR(norm(v1), 1.0, 1e-6);
}

TEST(MockEmbedder, ReasoningChangesVector) {
  MockEmbedder e(64);
  const NodeAnnotation a{0, 1, 0, 1, "same description", "first reason"};
  auto b = a;
  b.reasoning = "another explanation entirely";
  EXPECT_NE(embed_annotation(a, e), embed_annotation(b, e));
}

// Oracle: signed token counts in hashed buckets, then L2 normalisation.
TEST(MockEmbedder, MatchesHashedBagDefinition) {
  const std::size_t dim = 16;
  const std::vector<std::string> tokens{"node", "attribute", "reads", "node"};
  std::vector<double> acc(dim, 0.0);
  for (const auto& t : tokens) {
    const auto h = stable_hash64(t);
    acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double n = 0.0;
  for (const double x : acc) n += x * x;
  n = std::sqrt(n);
  const auto got = MockEmbedder::embed_text("Node, attribute\nREADS node!", dim);
  for (std::size_t i = 0; i < dim; ++i) EXPECT_EQ(got[i], static_cast<float>(acc[i] / n)) << i;
  const auto empty = MockEmbedder::embed_text("", dim);
  EXPECT_NEAR(norm(empty), 1.0, 1e-7);
}

TEST(EmbeddingText, JoinsDescriptionAndReasoning) {
  EXPECT_EQ(embedding_text({0, 1, 0, 1, "desc", "why"}), "desc\nwhy");
}

std::vector<NodeAnnotation> three_annotations() {
  return {{0, 1, 0, 1, "first node", "r1"}, {1, 1, 0, 1, "second node", "r2"}, {0, 1, 1, 1, "third", "r3"}};
}

TEST(FeatureMatrix, ShapeAndRowAlignment) {
  MockEmbedder e(8);
  auto anns = three_annotations();
  const auto f = build_feature_matrix(anns, e, 2);
  EXPECT_EQ(f.rows(), 3u);
  EXPECT_EQ(f.dim, 8u);
  std::swap(anns[0], anns[2]);
  const auto g = build_feature_matrix(anns, e, 2);
  const auto row = [](const FeatureMatrix& m, std::size_t r) {
    return std::vector<float>(m.values.begin() + static_cast<std::ptrdiff_t>(r * m.dim),
                              m.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * m.dim));
  };
  EXPECT_EQ(row(f, 0), row(g, 2));
  EXPECT_EQ(row(f, 1), row(g, 1));
  EXPECT_EQ(row(f, 2), row(g, 0));
  EXPECT_EQ(e.call_count(), 4u);
}

TEST(FeatureFile, BinaryRoundTripIsBitIdentical) {
  TempDir dir;
  MockEmbedder e(8);
  const auto f = build_feature_matrix(three_annotations(), e);
  write_features(f, dir / "f.bin");
  EXPECT_EQ(read_features(dir / "f.bin"), f);
  const auto m = f.to_matrix();
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m(2, 7), static_cast<double>(f.values[23]));
}

TEST(FeatureFile, ExactByteLayout) {
  TempDir dir;
  write_features({2, {1.0f, -2.0f}}, dir / "f.bin");
  const std::string expected("GHGF\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00\x02\x00\x00\x00"
                             "\x00\x00\x80\x3f\x00\x00\x00\xc0",
                             28);
  EXPECT_EQ(ghgrl::testing::read_file(dir / "f.bin"), expected);
}

TEST(FeatureFile, RejectsCorruptFiles) {
  TempDir dir;
  write_features({2, {1.0f, -2.0f}}, dir / "ok.bin");
  const auto good = ghgrl::testing::read_file(dir / "ok.bin");
  ghgrl::testing::write_file(dir / "magic.bin", "XHGF" + good.substr(4));
  EXPECT_THROW(read_features(dir / "magic.bin"), DataError);
  ghgrl::testing::write_file(dir / "short.bin", good.substr(0, good.size() - 1));
  EXPECT_THROW(read_features(dir / "short.bin"), DataError);
  ghgrl::testing::write_file(dir / "long.bin", good + "x");
  EXPECT_THROW(read_features(dir / "long.bin"), DataError);
  write_features({1, {std::numeric_limits<float>::quiet_NaN()}}, dir / "nan.bin");
  EXPECT_THROW(read_features(dir / "nan.bin"), DataError);
  EXPECT_THROW(read_features(dir / "absent.bin"), DataError);
}

class ShiftingEmbedder final : public Embedder {
 protected:
  std::vector<std::vector<float>> do_embed(const std::vector<std::string>& texts) override {
    std::vector<std::vector<float>> out;
    for (const auto& t : texts) out.emplace_back(t.size() % 2 ? 3 : 4, 0.5f);
    return out;
  }
};

TEST(Embedder, DimensionMismatchIsAnError) {
  ShiftingEmbedder e;
  EXPECT_NO_THROW(e.embed({"ab"}));
  EXPECT_EQ(e.dim(), 4u);
  EXPECT_THROW(e.embed({"abc"}), DataError);
}

}  // namespace
}  // namespace ghgrl::llm
