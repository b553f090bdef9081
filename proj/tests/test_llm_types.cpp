#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ghgrl/digest.hpp"
#include "ghgrl/error.hpp"
#include "ghgrl/llm_types.hpp"

namespace ghgrl::llm {
namespace {

using ghgrl::testing::TempDir;

TEST(TypeSchema, ValidateRejectsEmptyAndDuplicateNames) {
  EXPECT_NO_THROW((TypeSchema{{"a", "b"}, {"c"}}.validate()));
  EXPECT_THROW((TypeSchema{{}, {"c"}}.validate()), DataError);
  EXPECT_THROW((TypeSchema{{"a"}, {}}.validate()), DataError);
  EXPECT_THROW((TypeSchema{{"a", "a"}, {"c"}}.validate()), DataError);
  EXPECT_THROW((TypeSchema{{"a"}, {""}}.validate()), DataError);
}

TEST(TypeSchema, FileRoundTripAndCanonicalBytes) {
  TempDir dir;
  const TypeSchema s{{"noun", "long text"}, {"movie", "person", "keyword"}};
  write_schema(s, dir / "schema.json");
  EXPECT_EQ(read_schema(dir / "schema.json"), s);
  EXPECT_EQ(s.canonical_json(),
            R"({"format_types":["noun","long text"],"content_types":["movie","person","keyword"]})");
  ghgrl::testing::write_file(dir / "bad.json", R"({"format_types": ["a"]})");
  EXPECT_THROW(read_schema(dir / "bad.json"), DataError);
}

TEST(PromptTemplates, DefaultsAreValidAndPlaceholdersCounted) {
  const auto t = PromptTemplates::defaults();
  EXPECT_NO_THROW(t.validate());
  EXPECT_FALSE(t.version.empty());
  auto twice = t;
  twice.processing_template += "{{attribute}}";
  EXPECT_THROW(twice.validate(), DataError);
  auto missing = t;
  missing.generation_template = "no placeholders {{samples}}";
  EXPECT_THROW(missing.validate(), DataError);
}

TEST(PromptTemplates, ReadFromFile) {
  TempDir dir;
  ghgrl::testing::write_file(dir / "t.json", R"({"generation_template": "{{samples}} {{m_fmt}} {{m_cont}}",
    "processing_template": "{{attribute}} {{format_types}} {{content_types}}", "version": "v9"})");
  const auto t = read_templates(dir / "t.json");
  EXPECT_EQ(t.version, "v9");
  ghgrl::testing::write_file(dir / "bad.json", R"({"generation_template": "{{samples}}",
    "processing_template": "{{attribute}} {{format_types}} {{content_types}}", "version": "v9"})");
  EXPECT_THROW(read_templates(dir / "bad.json"), DataError);
}

TEST(Render, SubstitutesOnceWithoutRescanning) {
  EXPECT_EQ(render("a {{x}} b {{y}} c", {{"x", "1"}, {"y", "{{x}}"}}), "a 1 b {{x}} c");
  EXPECT_EQ(render("keep {{unknown}} and {{", {{"x", "1"}}), "keep {{unknown}} and {{");
}

TEST(Annotations, CheckRejectsOutOfRange) {
  const TypeSchema s{{"a", "b"}, {"c"}};
  NodeAnnotation a{1, 0.5, 0, 1.0, "d", "r"};
  EXPECT_NO_THROW(check_annotation(a, s));
  a.format_index = 2;
  EXPECT_THROW(check_annotation(a, s), DataError);
  a = {0, 1.1, 0, 0.2, "d", "r"};
  EXPECT_THROW(check_annotation(a, s), DataError);
}

TEST(Annotations, JsonlRoundTripIsExact) {
  TempDir dir;
  const TypeSchema s{{"a", "b"}, {"c", "d"}};
  const std::vector<NodeAnnotation> anns{{1, 0.1 + 0.2, 0, 1.0 / 3.0, "desc \"quoted\"", "why\nnewline"},
                                         {0, 0.0, 1, 1.0, "x", "y"}};
  write_annotations(anns, {7, -3}, s, dir / "a.jsonl");
  const auto file = read_annotations(dir / "a.jsonl");
  EXPECT_EQ(file.node_ids, (std::vector<std::int64_t>{7, -3}));
  EXPECT_EQ(file.annotations, anns);
  const auto text = ghgrl::testing::read_file(dir / "a.jsonl");
  EXPECT_NE(text.find("\"format_type\":\"b\""), std::string::npos);
  EXPECT_THROW(write_annotations(anns, {7}, s, dir / "b.jsonl"), DataError);
}

// Published SHA-256 test vectors.
TEST(Digest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  TempDir dir;
  ghgrl::testing::write_file(dir / "f", "abc");
  EXPECT_EQ(sha256_file(dir / "f"), sha256_hex("abc"));
  EXPECT_EQ(stable_hash64("x"), stable_hash64("x"));
  EXPECT_NE(stable_hash64("x"), stable_hash64("y"));
}

}  // namespace
}  // namespace ghgrl::llm
